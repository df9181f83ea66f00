#pragma once

// The five contract risks and the expected round utilities, each with an
// exact path and a Monte Carlo path.
//
// Exact paths exploit three structural facts:
//  * the edge's utility and the usage rate are deterministic functions of the
//    attendee count m ~ Binomial(num_users, attendance_prob), so edge-side
//    quantities are finite sums over m;
//  * a served user's utility is non-decreasing in channel gain, so the
//    probability of a non-positive outcome inverts to a gain threshold on the
//    uniform gain distribution;
//  * third-party demand takes cloud_capacity + 1 equally likely values, so
//    cloud-side quantities enumerate completely, jointly with the two-point
//    backup-purchase event.
//
// Monte Carlo paths replay the same allocation rule on sampled rounds and are
// kept deliberately independent of the closed forms: they exist to catch a
// formula bug, not to agree by construction.

#include <cmath>
#include <cstdint>
#include <vector>

#include "oatf/contracts.hpp"
#include "oatf/market_config.hpp"
#include "oatf/numeric.hpp"
#include "oatf/rng.hpp"
#include "oatf/utility_model.hpp"

namespace oatf {

struct RiskReport {
    double user_negative = 0.0;
    double user_unserved = 0.0;
    double edge_below_expectation = 0.0;
    double edge_underutilization = 0.0;
    double cloud_below_expectation = 0.0;
    RiskThresholds thresholds;
    bool satisfied = false;
};

inline bool within_thresholds(const RiskReport& r) {
    const RiskThresholds& t = r.thresholds;
    return r.user_negative <= t.user_negative && r.user_unserved <= t.user_unserved &&
           r.edge_below_expectation <= t.edge_below_expectation &&
           r.edge_underutilization <= t.edge_underutilization &&
           r.cloud_below_expectation <= t.cloud_below_expectation;
}

struct EdgeRiskPair {
    double below_expectation = 0.0;
    double underutilization = 0.0;
};

namespace detail {

// Comparisons against an expectation tolerate a relative slack: when a
// contract makes a party's utility constant, the summed expectation can land
// an ulp away from the constant, and without slack every round would count
// as "below expectation" (or none as "at most" it) depending on rounding
// luck.  1e-9 is far above accumulated rounding error and far below any
// economically meaningful utility gap.
inline double expectation_slack(double e) {
    return 1e-9 * std::max(1.0, std::abs(e));
}

constexpr double usage_floor_slack = 1e-12;

// P(served utility <= 0) over the uniform gain range for one tier.  Utility
// is non-decreasing in gain, so this is the cdf at the zero crossing.
inline double served_nonpositive_fraction(UserStatus tier_status, const EdgeContract& ec,
                                          const LatencyEnergyProfile& p, const MarketConfig& c) {
    auto u = [&](double g) { return user_utility(true, g, tier_status, ec, p, c); };
    if (c.gamma_low == c.gamma_high) return u(c.gamma_low) <= 0.0 ? 1.0 : 0.0;
    if (u(c.gamma_low) > 0.0) return 0.0;
    if (u(c.gamma_high) <= 0.0) return 1.0;
    const double root = bisect_nondecreasing_root(u, c.gamma_low, c.gamma_high);
    const double f = (root - c.gamma_low) / (c.gamma_high - c.gamma_low);
    return std::min(1.0, std::max(0.0, f));
}

// Mean served utility over the gain range for one tier.
inline double served_mean_utility(UserStatus tier_status, const EdgeContract& ec,
                                  const LatencyEnergyProfile& p, const MarketConfig& c) {
    auto u = [&](double g) { return user_utility(true, g, tier_status, ec, p, c); };
    return uniform_mean(u, c.gamma_low, c.gamma_high);
}

// Smallest attendee count that triggers a backup purchase.
inline int backup_trigger_count(const EdgeContract& ec, const MarketConfig& c) {
    return c.edge_capacity / ec.reserved_per_user + 1;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Exact paths

// P(one user's round utility <= 0).  Absence always contributes: an absent
// user's utility is -penalty <= 0 even when the penalty is zero.
inline double user_risk_negative(const EdgeContract& ec, const CloudContract& cc,
                                 const LatencyEnergyProfile& p, const MarketConfig& c) {
    const double a = c.attendance_prob;
    const double frac_edge = detail::served_nonpositive_fraction(UserStatus::ServedEdge, ec, p, c);
    const double frac_cloud = detail::served_nonpositive_fraction(UserStatus::ServedCloud, ec, p, c);
    const double comp_hits = ec.compensation_edge_to_user <= 0.0 ? 1.0 : 0.0;
    const std::vector<double> pmf = binomial_pmf_table(c.num_users - 1, a);
    double attend_term = 0.0;
    for (int k = 0; k <= c.num_users - 1; ++k) {
        const int m = k + 1;
        const ServeCounts sc = serve_counts(m, ec, cc, c);
        const double inv_m = 1.0 / m;
        attend_term += pmf[static_cast<std::size_t>(k)] *
                       (sc.edge * inv_m * frac_edge + sc.cloud * inv_m * frac_cloud +
                        sc.compensated * inv_m * comp_hits);
    }
    return (1.0 - a) + a * attend_term;
}

// P(a user attends while total attending demand exceeds the secured supply).
// With K other attendees the user's own demand tips the total to
// reserved * (K + 1), so the event is K >= supply / reserved (integer floor).
inline double user_risk_unserved(const EdgeContract& ec, const CloudContract& cc, const MarketConfig& c) {
    const int supply = c.edge_capacity + cc.backup_slots;
    const int k0 = supply / ec.reserved_per_user;
    return c.attendance_prob * binomial_tail_geq(c.num_users - 1, k0, c.attendance_prob);
}

// Edge utility of a round as a function of the attendee count alone: gains
// never enter the edge's cash flows.
inline double edge_utility_at_attendance(int attendees, const EdgeContract& ec, const CloudContract& cc,
                                         const MarketConfig& c) {
    const ServeCounts sc = serve_counts(attendees, ec, cc, c);
    return edge_utility(sc.edge + sc.cloud, c.num_users - attendees, sc.compensated, ec, cc,
                        sc.bought_backup);
}

// Usage rate of a round as a function of the attendee count: occupied slots
// over the supply actually held (backup counts only when bought).
inline double usage_rate_at_attendance(int attendees, const EdgeContract& ec, const CloudContract& cc,
                                       const MarketConfig& c) {
    const ServeCounts sc = serve_counts(attendees, ec, cc, c);
    const double held = sc.bought_backup ? c.edge_capacity + cc.backup_slots : c.edge_capacity;
    return ec.reserved_per_user * (sc.edge + sc.cloud) / held;
}

inline double expected_edge_utility(const EdgeContract& ec, const CloudContract& cc, const MarketConfig& c) {
    const std::vector<double> pmf = binomial_pmf_table(c.num_users, c.attendance_prob);
    double e = 0.0;
    for (int m = 0; m <= c.num_users; ++m) {
        e += pmf[static_cast<std::size_t>(m)] * edge_utility_at_attendance(m, ec, cc, c);
    }
    return e;
}

// P(edge utility < its expectation) -- strictly below -- and P(usage rate
// below the configured floor), both exact binomial sums.
inline EdgeRiskPair edge_risks_exact(const EdgeContract& ec, const CloudContract& cc, const MarketConfig& c) {
    const std::vector<double> pmf = binomial_pmf_table(c.num_users, c.attendance_prob);
    const double expectation = expected_edge_utility(ec, cc, c);
    const double slack = detail::expectation_slack(expectation);
    EdgeRiskPair out;
    for (int m = 0; m <= c.num_users; ++m) {
        const double w = pmf[static_cast<std::size_t>(m)];
        if (edge_utility_at_attendance(m, ec, cc, c) < expectation - slack) out.below_expectation += w;
        if (usage_rate_at_attendance(m, ec, cc, c) < c.usage_floor - detail::usage_floor_slack) {
            out.underutilization += w;
        }
    }
    return out;
}

// P(the edge buys backup in a round).
inline double backup_purchase_probability(const EdgeContract& ec, const MarketConfig& c) {
    return binomial_tail_geq(c.num_users, detail::backup_trigger_count(ec, c), c.attendance_prob);
}

inline double expected_cloud_utility(const EdgeContract& ec, const CloudContract& cc,
                                     const CloudSideState& st, const MarketConfig& c) {
    const double pi = backup_purchase_probability(ec, c);
    const double mean_demand = 0.5 * c.cloud_capacity;
    // E[max(0, demand - open capacity)] over demand ~ U{0..cloud_capacity}.
    const double rb = cc.backup_slots;
    const double mean_waiting = rb * (rb + 1.0) / 2.0 / (c.cloud_capacity + 1.0);
    return st.other_price * mean_demand - st.refund_rate * st.other_price * mean_waiting +
           pi * cc.price_edge_to_cloud + (1.0 - pi) * cc.penalty_edge_to_cloud;
}

// Expected cloud income with no contract at all: third-party sales only.
inline double cloud_no_contract_baseline(const CloudSideState& st, const MarketConfig& c) {
    return st.other_price * 0.5 * c.cloud_capacity;
}

// P(cloud utility <= its expectation), enumerated exactly over every
// third-party demand level jointly with the backup-purchase event.
inline double cloud_risk(const EdgeContract& ec, const CloudContract& cc, const CloudSideState& st,
                         const MarketConfig& c) {
    const double pi = backup_purchase_probability(ec, c);
    const double expectation = expected_cloud_utility(ec, cc, st, c);
    const double cutoff = expectation + detail::expectation_slack(expectation);
    const double w = 1.0 / (c.cloud_capacity + 1.0);
    double prob = 0.0;
    for (int beta = 0; beta <= c.cloud_capacity; ++beta) {
        if (cloud_utility(beta, cc, true, st, c) <= cutoff) prob += pi * w;
        if (cloud_utility(beta, cc, false, st, c) <= cutoff) prob += (1.0 - pi) * w;
    }
    return prob;
}

inline double expected_user_total_utility(const EdgeContract& ec, const CloudContract& cc,
                                          const LatencyEnergyProfile& p, const MarketConfig& c) {
    const double a = c.attendance_prob;
    const double mean_edge = detail::served_mean_utility(UserStatus::ServedEdge, ec, p, c);
    const double mean_cloud = detail::served_mean_utility(UserStatus::ServedCloud, ec, p, c);
    const std::vector<double> pmf = binomial_pmf_table(c.num_users - 1, a);
    double attend_term = 0.0;
    for (int k = 0; k <= c.num_users - 1; ++k) {
        const int m = k + 1;
        const ServeCounts sc = serve_counts(m, ec, cc, c);
        const double inv_m = 1.0 / m;
        attend_term += pmf[static_cast<std::size_t>(k)] *
                       (sc.edge * inv_m * mean_edge + sc.cloud * inv_m * mean_cloud +
                        sc.compensated * inv_m * ec.compensation_edge_to_user);
    }
    const double per_user = (1.0 - a) * -ec.penalty_user_to_edge + a * attend_term;
    return c.num_users * per_user;
}

// Full exact risk report against the configured thresholds.
inline RiskReport certify_exact(const EdgeContract& ec, const CloudContract& cc,
                                const LatencyEnergyProfile& p, const CloudSideState& st,
                                const MarketConfig& c) {
    RiskReport r;
    r.thresholds = c.risk_thresholds;
    r.user_negative = user_risk_negative(ec, cc, p, c);
    r.user_unserved = user_risk_unserved(ec, cc, c);
    const EdgeRiskPair e = edge_risks_exact(ec, cc, c);
    r.edge_below_expectation = e.below_expectation;
    r.edge_underutilization = e.underutilization;
    r.cloud_below_expectation = cloud_risk(ec, cc, st, c);
    r.satisfied = within_thresholds(r);
    return r;
}

// ---------------------------------------------------------------------------
// Monte Carlo paths

namespace detail {

// One simulated round, reduced to what the risk estimators consume.  Arrival
// order matters only through which attendees land in which tier, so the
// attendee list itself is shuffled instead of a full user permutation.
struct McRound {
    std::vector<int> attendee_ids; // shuffled: first counts.edge serve on edge, etc.
    std::vector<double> attendee_gain; // indexed like attendee_ids before the shuffle
    int attendees = 0;
    int other_demand = 0;
};

inline void sample_mc_round(const MarketConfig& c, RngStream& rng, bool need_gains, McRound& out) {
    out.attendee_ids.clear();
    out.attendee_gain.clear();
    for (int i = 0; i < c.num_users; ++i) {
        if (rng.bernoulli(c.attendance_prob)) out.attendee_ids.push_back(i);
    }
    out.attendees = static_cast<int>(out.attendee_ids.size());
    if (need_gains) {
        out.attendee_gain.resize(out.attendee_ids.size());
        for (double& g : out.attendee_gain) g = rng.uniform(c.gamma_low, c.gamma_high);
    }
    out.other_demand = rng.uniform_int(0, c.cloud_capacity);
    if (need_gains) {
        // Shuffle positions; gains stay keyed by position so gain i follows
        // attendee slot i into its tier.
        for (std::size_t i = out.attendee_gain.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.uniform_below(i));
            std::swap(out.attendee_gain[i - 1], out.attendee_gain[j]);
        }
    }
}

} // namespace detail

inline double user_risk_negative_mc(const EdgeContract& ec, const CloudContract& cc,
                                    const LatencyEnergyProfile& p, const MarketConfig& c,
                                    std::int64_t n_samples, RngStream& rng) {
    if (n_samples < 1) throw std::invalid_argument("user_risk_negative_mc: n_samples must be >= 1");
    detail::McRound round;
    double acc = 0.0;
    for (std::int64_t s = 0; s < n_samples; ++s) {
        detail::sample_mc_round(c, rng, true, round);
        const ServeCounts sc = serve_counts(round.attendees, ec, cc, c);
        int hits = c.num_users - round.attendees; // absentees: -penalty <= 0 always
        for (int i = 0; i < round.attendees; ++i) {
            const UserStatus st = i < sc.edge ? UserStatus::ServedEdge
                                  : i < sc.edge + sc.cloud ? UserStatus::ServedCloud
                                                           : UserStatus::Compensated;
            const double g = round.attendee_gain[static_cast<std::size_t>(i)];
            if (user_utility(true, g, st, ec, p, c) <= 0.0) ++hits;
        }
        acc += static_cast<double>(hits) / c.num_users;
    }
    return acc / static_cast<double>(n_samples);
}

inline double user_risk_unserved_mc(const EdgeContract& ec, const CloudContract& cc,
                                    const MarketConfig& c, std::int64_t n_samples, RngStream& rng) {
    if (n_samples < 1) throw std::invalid_argument("user_risk_unserved_mc: n_samples must be >= 1");
    const long long supply = c.edge_capacity + cc.backup_slots;
    double acc = 0.0;
    for (std::int64_t s = 0; s < n_samples; ++s) {
        int m = 0;
        for (int i = 0; i < c.num_users; ++i) m += rng.bernoulli(c.attendance_prob) ? 1 : 0;
        if (static_cast<long long>(ec.reserved_per_user) * m > supply) {
            acc += static_cast<double>(m) / c.num_users;
        }
    }
    return acc / static_cast<double>(n_samples);
}

// Monte Carlo edge risks: a first pass estimates the expected edge utility, a
// second pass on a fresh stream estimates how often rounds fall below it and
// below the usage floor.
inline EdgeRiskPair edge_risks(const EdgeContract& ec, const CloudContract& cc, const MarketConfig& c,
                               std::int64_t n_samples, const StreamFamily& streams) {
    if (n_samples < 10000) throw std::invalid_argument("edge_risks: n_samples must be >= 10000");
    auto draw_attendees = [&](RngStream& rng) {
        int m = 0;
        for (int i = 0; i < c.num_users; ++i) m += rng.bernoulli(c.attendance_prob) ? 1 : 0;
        return m;
    };
    RngStream mean_rng = streams.substream(stream_kind::risk_expectation, 0);
    double mean = 0.0;
    for (std::int64_t s = 0; s < n_samples; ++s) {
        mean += edge_utility_at_attendance(draw_attendees(mean_rng), ec, cc, c);
    }
    mean /= static_cast<double>(n_samples);

    RngStream prob_rng = streams.substream(stream_kind::risk_probability, 0);
    const double slack = detail::expectation_slack(mean);
    EdgeRiskPair out;
    for (std::int64_t s = 0; s < n_samples; ++s) {
        const int m = draw_attendees(prob_rng);
        if (edge_utility_at_attendance(m, ec, cc, c) < mean - slack) out.below_expectation += 1.0;
        if (usage_rate_at_attendance(m, ec, cc, c) < c.usage_floor - detail::usage_floor_slack) {
            out.underutilization += 1.0;
        }
    }
    out.below_expectation /= static_cast<double>(n_samples);
    out.underutilization /= static_cast<double>(n_samples);
    return out;
}

inline double cloud_risk_mc(const EdgeContract& ec, const CloudContract& cc, const CloudSideState& st,
                            const MarketConfig& c, std::int64_t n_samples, const StreamFamily& streams) {
    if (n_samples < 1) throw std::invalid_argument("cloud_risk_mc: n_samples must be >= 1");
    auto draw_round = [&](RngStream& rng, bool& bought, int& beta) {
        int m = 0;
        for (int i = 0; i < c.num_users; ++i) m += rng.bernoulli(c.attendance_prob) ? 1 : 0;
        bought = buys_backup(m, ec, c);
        beta = rng.uniform_int(0, c.cloud_capacity);
    };
    RngStream mean_rng = streams.substream(stream_kind::risk_expectation, 1);
    double mean = 0.0;
    for (std::int64_t s = 0; s < n_samples; ++s) {
        bool bought = false;
        int beta = 0;
        draw_round(mean_rng, bought, beta);
        mean += cloud_utility(beta, cc, bought, st, c);
    }
    mean /= static_cast<double>(n_samples);

    RngStream prob_rng = streams.substream(stream_kind::risk_probability, 1);
    const double cutoff = mean + detail::expectation_slack(mean);
    double prob = 0.0;
    for (std::int64_t s = 0; s < n_samples; ++s) {
        bool bought = false;
        int beta = 0;
        draw_round(prob_rng, bought, beta);
        if (cloud_utility(beta, cc, bought, st, c) <= cutoff) prob += 1.0;
    }
    return prob / static_cast<double>(n_samples);
}

// Full Monte Carlo risk report; the certification used to double-check a
// negotiated contract with fresh randomness.
inline RiskReport certify_mc(const EdgeContract& ec, const CloudContract& cc,
                             const LatencyEnergyProfile& p, const CloudSideState& st,
                             const MarketConfig& c, std::int64_t n_samples,
                             const StreamFamily& streams) {
    if (n_samples < 10000) throw std::invalid_argument("certify_mc: n_samples must be >= 10000");
    RiskReport r;
    r.thresholds = c.risk_thresholds;

    // Pass 1: expectations.
    RngStream mean_rng = streams.substream(stream_kind::risk_expectation, 2);
    double mean_edge = 0.0, mean_cloud = 0.0;
    for (std::int64_t s = 0; s < n_samples; ++s) {
        int m = 0;
        for (int i = 0; i < c.num_users; ++i) m += mean_rng.bernoulli(c.attendance_prob) ? 1 : 0;
        const int beta = mean_rng.uniform_int(0, c.cloud_capacity);
        mean_edge += edge_utility_at_attendance(m, ec, cc, c);
        mean_cloud += cloud_utility(beta, cc, buys_backup(m, ec, c), st, c);
    }
    mean_edge /= static_cast<double>(n_samples);
    mean_cloud /= static_cast<double>(n_samples);

    // Pass 2: all five probabilities on a fresh stream.
    RngStream prob_rng = streams.substream(stream_kind::risk_probability, 2);
    const double edge_slack = detail::expectation_slack(mean_edge);
    const double cloud_cutoff = mean_cloud + detail::expectation_slack(mean_cloud);
    const long long supply = c.edge_capacity + cc.backup_slots;
    detail::McRound round;
    double acc_neg = 0.0, acc_unserved = 0.0, acc_edge_below = 0.0, acc_underutil = 0.0,
           acc_cloud_below = 0.0;
    for (std::int64_t s = 0; s < n_samples; ++s) {
        detail::sample_mc_round(c, prob_rng, true, round);
        const int m = round.attendees;
        const ServeCounts sc = serve_counts(m, ec, cc, c);
        int hits = c.num_users - m;
        for (int i = 0; i < m; ++i) {
            const UserStatus stt = i < sc.edge ? UserStatus::ServedEdge
                                   : i < sc.edge + sc.cloud ? UserStatus::ServedCloud
                                                            : UserStatus::Compensated;
            const double g = round.attendee_gain[static_cast<std::size_t>(i)];
            if (user_utility(true, g, stt, ec, p, c) <= 0.0) ++hits;
        }
        acc_neg += static_cast<double>(hits) / c.num_users;
        if (static_cast<long long>(ec.reserved_per_user) * m > supply) {
            acc_unserved += static_cast<double>(m) / c.num_users;
        }
        if (edge_utility_at_attendance(m, ec, cc, c) < mean_edge - edge_slack) acc_edge_below += 1.0;
        if (usage_rate_at_attendance(m, ec, cc, c) < c.usage_floor - detail::usage_floor_slack) {
            acc_underutil += 1.0;
        }
        if (cloud_utility(round.other_demand, cc, sc.bought_backup, st, c) <= cloud_cutoff) {
            acc_cloud_below += 1.0;
        }
    }
    const double inv = 1.0 / static_cast<double>(n_samples);
    r.user_negative = acc_neg * inv;
    r.user_unserved = acc_unserved * inv;
    r.edge_below_expectation = acc_edge_below * inv;
    r.edge_underutilization = acc_underutil * inv;
    r.cloud_below_expectation = acc_cloud_below * inv;
    r.satisfied = within_thresholds(r);
    return r;
}

} // namespace oatf
