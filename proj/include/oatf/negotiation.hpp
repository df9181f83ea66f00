#pragma once

// Forward-market negotiation.
//
// Quotes are swept exhaustively: every edge quote, cloud quote, per-user
// reservation and backup size is certified in full.  Pruning by staged range
// checks was rejected on purpose; the sweep is cheap (a few thousand exact
// certifications) and a pruned search is hard to prove equivalent near corner
// cases where a risk is non-monotone in the pruned variable.
//
// Selection runs in two stages mirroring who signs what:
//   1. for each quote pair, users commit to the reservation sizing that
//      maximizes their expected total utility among feasible sizings;
//   2. the edge signs the quote pair whose user-committed sizing maximizes
//      its own expected utility.
// Both stages break ties deterministically (documented at the comparators),
// so negotiation involves no randomness at all.

#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oatf/contracts.hpp"
#include "oatf/market_config.hpp"
#include "oatf/risk.hpp"

namespace oatf {

struct EdgeQuote {
    double price_user_to_edge = 0.0;
    double penalty_user_to_edge = 0.0;
    double compensation_edge_to_user = 0.0;
};

struct CloudQuote {
    double price_per_slot = 0.0;   // lump price is price_per_slot * backup_slots
    double penalty_per_slot = 0.0; // lump penalty likewise
};

struct QuotationGrid {
    std::vector<EdgeQuote> edge_quotes;
    std::vector<CloudQuote> cloud_quotes;
    std::vector<int> r_user_domain;
    std::vector<int> r_backup_domain;
};

// The grid used by the stock experiments.  The last two edge quotes are
// deliberately unattractive (a refundable booking whose edge income swings
// with attendance, and a price that wipes out the offloading gain); they give
// the sweep something to reject.
inline QuotationGrid default_quotation_grid() {
    QuotationGrid g;
    g.edge_quotes = {
        {0.90, 0.90, 0.30}, {1.05, 1.05, 0.30}, {1.20, 1.20, 0.30}, {1.35, 1.35, 0.30},
        {1.50, 1.50, 0.30}, {1.50, 1.50, 0.60}, {1.50, 0.75, 0.30}, {3.50, 3.50, 0.90},
    };
    g.cloud_quotes = {
        {0.40, 0.40}, {0.45, 0.45}, {0.50, 0.50}, {0.55, 0.55}, {0.60, 0.60}, {0.50, 0.25},
    };
    g.r_user_domain = {1, 2, 3, 4, 5};
    for (int rb = 0; rb <= 300; rb += 25) g.r_backup_domain.push_back(rb);
    return g;
}

enum class Mode { OATF, CBooking };

inline const char* mode_name(Mode m) { return m == Mode::OATF ? "oatf" : "cbooking"; }

class NoFeasibleContract : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ContractPair {
    EdgeContract edge;
    CloudContract cloud;
    double expected_user_total = 0.0;
    double expected_edge = 0.0;
    double expected_cloud = 0.0;
    RiskReport risk;
};

struct NegotiationStats {
    long long candidates_evaluated = 0;
    long long feasible_candidates = 0;
};

struct NegotiationResult {
    ContractPair winner;
    NegotiationStats stats;
};

inline EdgeContract make_edge_contract(const EdgeQuote& q, int r_user) {
    return EdgeContract{r_user, q.price_user_to_edge, q.penalty_user_to_edge,
                        q.compensation_edge_to_user};
}

inline CloudContract make_cloud_contract(const CloudQuote& q, int backup_slots) {
    return CloudContract{backup_slots, q.price_per_slot * backup_slots,
                         q.penalty_per_slot * backup_slots};
}

// Certify one candidate and check that every party would sign: risks inside
// thresholds, users and edge no worse than staying out, cloud no worse than
// selling all capacity to third parties.  CBooking additionally refuses to
// book more user demand than the secured supply.
inline std::optional<ContractPair> evaluate_candidate(const EdgeContract& ec, const CloudContract& cc,
                                                      Mode mode, const SimulationConfig& cfg) {
    const MarketConfig& mc = cfg.market;
    if (mode == Mode::CBooking) {
        const long long booked = static_cast<long long>(mc.num_users) * ec.reserved_per_user;
        if (booked > static_cast<long long>(mc.edge_capacity) + cc.backup_slots) return std::nullopt;
    }
    ContractPair p;
    p.edge = ec;
    p.cloud = cc;
    p.risk = certify_exact(ec, cc, cfg.profile, cfg.cloud_state, mc);
    if (!p.risk.satisfied) return std::nullopt;
    p.expected_user_total = expected_user_total_utility(ec, cc, cfg.profile, mc);
    p.expected_edge = expected_edge_utility(ec, cc, mc);
    p.expected_cloud = expected_cloud_utility(ec, cc, cfg.cloud_state, mc);
    if (p.expected_user_total < 0.0) return std::nullopt;
    if (p.expected_edge < 0.0) return std::nullopt;
    if (p.expected_cloud < cloud_no_contract_baseline(cfg.cloud_state, mc)) return std::nullopt;
    return p;
}

// Stage-1 preference: expected user total, then expected edge, then expected
// cloud, then the smaller reservation, then the smaller backup.  Candidates
// equal on all keys keep the earlier sweep position.
inline bool users_prefer(const ContractPair& a, const ContractPair& b) {
    if (a.expected_user_total != b.expected_user_total) return a.expected_user_total > b.expected_user_total;
    if (a.expected_edge != b.expected_edge) return a.expected_edge > b.expected_edge;
    if (a.expected_cloud != b.expected_cloud) return a.expected_cloud > b.expected_cloud;
    if (a.edge.reserved_per_user != b.edge.reserved_per_user) return a.edge.reserved_per_user < b.edge.reserved_per_user;
    return a.cloud.backup_slots < b.cloud.backup_slots;
}

// Stage-2 preference: expected edge first, otherwise the same key order.
inline bool edge_prefers(const ContractPair& a, const ContractPair& b) {
    if (a.expected_edge != b.expected_edge) return a.expected_edge > b.expected_edge;
    if (a.expected_user_total != b.expected_user_total) return a.expected_user_total > b.expected_user_total;
    if (a.expected_cloud != b.expected_cloud) return a.expected_cloud > b.expected_cloud;
    if (a.edge.reserved_per_user != b.edge.reserved_per_user) return a.edge.reserved_per_user < b.edge.reserved_per_user;
    return a.cloud.backup_slots < b.cloud.backup_slots;
}

inline NegotiationResult negotiate(const QuotationGrid& grid, Mode mode, const SimulationConfig& cfg) {
    if (grid.edge_quotes.empty() || grid.cloud_quotes.empty() || grid.r_user_domain.empty() ||
        grid.r_backup_domain.empty()) {
        throw std::invalid_argument("negotiate: quotation grid has an empty dimension");
    }
    NegotiationStats stats;
    std::optional<ContractPair> overall;
    for (const EdgeQuote& eq : grid.edge_quotes) {
        for (const CloudQuote& cq : grid.cloud_quotes) {
            std::optional<ContractPair> pair_best;
            for (int ru : grid.r_user_domain) {
                for (int rb : grid.r_backup_domain) {
                    const EdgeContract ec = make_edge_contract(eq, ru);
                    const CloudContract cc = make_cloud_contract(cq, rb);
                    validate(ec, cfg.market);
                    validate(cc, cfg.market);
                    ++stats.candidates_evaluated;
                    std::optional<ContractPair> cand = evaluate_candidate(ec, cc, mode, cfg);
                    if (!cand) continue;
                    ++stats.feasible_candidates;
                    if (!pair_best || users_prefer(*cand, *pair_best)) pair_best = cand;
                }
            }
            if (pair_best && (!overall || edge_prefers(*pair_best, *overall))) overall = pair_best;
        }
    }
    if (!overall) {
        throw NoFeasibleContract(std::string("no feasible contract for mode ") + mode_name(mode));
    }
    return NegotiationResult{*overall, stats};
}

// ---------------------------------------------------------------------------
// Screening diagnostics.  These answer "which sizings could work at all" for
// one side of the market; negotiate() never consults them, they exist for
// reporting and for sanity checks against the full sweep.

// Reservation sizes a user could accept under some backup size in the domain:
// both user risks inside thresholds and non-negative expected total utility.
inline std::vector<int> user_feasible_r(const EdgeQuote& eq, const QuotationGrid& grid,
                                        const SimulationConfig& cfg) {
    std::vector<int> out;
    for (int ru : grid.r_user_domain) {
        const EdgeContract ec = make_edge_contract(eq, ru);
        bool ok = false;
        for (int rb : grid.r_backup_domain) {
            const CloudContract cc{rb, 0.0, 0.0}; // cloud pricing never reaches users
            if (user_risk_negative(ec, cc, cfg.profile, cfg.market) > cfg.market.risk_thresholds.user_negative) continue;
            if (user_risk_unserved(ec, cc, cfg.market) > cfg.market.risk_thresholds.user_unserved) continue;
            if (expected_user_total_utility(ec, cc, cfg.profile, cfg.market) < 0.0) continue;
            ok = true;
            break;
        }
        if (ok) out.push_back(ru);
    }
    return out;
}

// Backup sizes the edge could accept at a given reservation size: both edge
// risks inside thresholds and non-negative expected utility.
inline std::vector<int> edge_feasible_backup(const EdgeQuote& eq, const CloudQuote& cq, int r_user,
                                             const QuotationGrid& grid, const SimulationConfig& cfg) {
    std::vector<int> out;
    const EdgeContract ec = make_edge_contract(eq, r_user);
    for (int rb : grid.r_backup_domain) {
        const CloudContract cc = make_cloud_contract(cq, rb);
        const EdgeRiskPair r = edge_risks_exact(ec, cc, cfg.market);
        if (r.below_expectation > cfg.market.risk_thresholds.edge_below_expectation) continue;
        if (r.underutilization > cfg.market.risk_thresholds.edge_underutilization) continue;
        if (expected_edge_utility(ec, cc, cfg.market) < 0.0) continue;
        out.push_back(rb);
    }
    return out;
}

// Backup sizes the cloud could accept at a given reservation size: its risk
// inside the threshold and expected utility at least the no-contract income.
inline std::vector<int> cloud_feasible_backup(const EdgeQuote& eq, const CloudQuote& cq, int r_user,
                                              const QuotationGrid& grid, const SimulationConfig& cfg) {
    std::vector<int> out;
    const EdgeContract ec = make_edge_contract(eq, r_user);
    for (int rb : grid.r_backup_domain) {
        const CloudContract cc = make_cloud_contract(cq, rb);
        if (cloud_risk(ec, cc, cfg.cloud_state, cfg.market) > cfg.market.risk_thresholds.cloud_below_expectation) continue;
        if (expected_cloud_utility(ec, cc, cfg.cloud_state, cfg.market) <
            cloud_no_contract_baseline(cfg.cloud_state, cfg.market)) continue;
        out.push_back(rb);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Contract persistence, same key=value format as the configuration files.

inline std::string serialize_contract_pair(const ContractPair& p) {
    std::ostringstream out;
    auto put_d = [&](const char* k, double v) { out << k << " = " << detail::format_double(v) << "\n"; };
    auto put_i = [&](const char* k, long long v) { out << k << " = " << v << "\n"; };
    put_i("edge.reserved_per_user", p.edge.reserved_per_user);
    put_d("edge.price_user_to_edge", p.edge.price_user_to_edge);
    put_d("edge.penalty_user_to_edge", p.edge.penalty_user_to_edge);
    put_d("edge.compensation_edge_to_user", p.edge.compensation_edge_to_user);
    put_i("cloud.backup_slots", p.cloud.backup_slots);
    put_d("cloud.price_edge_to_cloud", p.cloud.price_edge_to_cloud);
    put_d("cloud.penalty_edge_to_cloud", p.cloud.penalty_edge_to_cloud);
    put_d("expected.user_total", p.expected_user_total);
    put_d("expected.edge", p.expected_edge);
    put_d("expected.cloud", p.expected_cloud);
    put_d("risk.user_negative", p.risk.user_negative);
    put_d("risk.user_unserved", p.risk.user_unserved);
    put_d("risk.edge_below_expectation", p.risk.edge_below_expectation);
    put_d("risk.edge_underutilization", p.risk.edge_underutilization);
    put_d("risk.cloud_below_expectation", p.risk.cloud_below_expectation);
    put_d("risk.threshold.user_negative", p.risk.thresholds.user_negative);
    put_d("risk.threshold.user_unserved", p.risk.thresholds.user_unserved);
    put_d("risk.threshold.edge_below_expectation", p.risk.thresholds.edge_below_expectation);
    put_d("risk.threshold.edge_underutilization", p.risk.thresholds.edge_underutilization);
    put_d("risk.threshold.cloud_below_expectation", p.risk.thresholds.cloud_below_expectation);
    put_i("risk.satisfied", p.risk.satisfied ? 1 : 0);
    return out.str();
}

inline ContractPair parse_contract_pair(const std::string& text) {
    auto kv = detail::parse_kv_text(text);
    auto take = [&](const char* key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError(std::string("contract key '") + key + "': missing");
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto take_d = [&](const char* key) { return detail::parse_double_value(key, take(key)); };
    auto take_i = [&](const char* key) {
        const std::int64_t v = detail::parse_int_value(key, take(key));
        if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(std::string("contract key '") + key + "': out of range");
        return static_cast<int>(v);
    };
    ContractPair p;
    p.edge.reserved_per_user = take_i("edge.reserved_per_user");
    p.edge.price_user_to_edge = take_d("edge.price_user_to_edge");
    p.edge.penalty_user_to_edge = take_d("edge.penalty_user_to_edge");
    p.edge.compensation_edge_to_user = take_d("edge.compensation_edge_to_user");
    p.cloud.backup_slots = take_i("cloud.backup_slots");
    p.cloud.price_edge_to_cloud = take_d("cloud.price_edge_to_cloud");
    p.cloud.penalty_edge_to_cloud = take_d("cloud.penalty_edge_to_cloud");
    p.expected_user_total = take_d("expected.user_total");
    p.expected_edge = take_d("expected.edge");
    p.expected_cloud = take_d("expected.cloud");
    p.risk.user_negative = take_d("risk.user_negative");
    p.risk.user_unserved = take_d("risk.user_unserved");
    p.risk.edge_below_expectation = take_d("risk.edge_below_expectation");
    p.risk.edge_underutilization = take_d("risk.edge_underutilization");
    p.risk.cloud_below_expectation = take_d("risk.cloud_below_expectation");
    p.risk.thresholds.user_negative = take_d("risk.threshold.user_negative");
    p.risk.thresholds.user_unserved = take_d("risk.threshold.user_unserved");
    p.risk.thresholds.edge_below_expectation = take_d("risk.threshold.edge_below_expectation");
    p.risk.thresholds.edge_underutilization = take_d("risk.threshold.edge_underutilization");
    p.risk.thresholds.cloud_below_expectation = take_d("risk.threshold.cloud_below_expectation");
    p.risk.satisfied = take_i("risk.satisfied") != 0;
    if (!kv.empty()) throw ConfigError("contract key '" + kv.begin()->first + "': unknown");
    return p;
}

} // namespace oatf
