#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <cstdint>

#include "oatf/risk.hpp"

using namespace oatf;

namespace {

const SimulationConfig kStock = stock_config();
const EdgeContract kDeal{4, 1.5, 1.5, 0.3};
const CloudContract kBackup{300, 120.0, 120.0};

// P(one fixed user attends and total attending demand exceeds supply),
// summed over every attendance pattern of n users.
double unserved_brute_force(int n, double a, int r_user, long long supply) {
    double acc = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if ((mask & 1u) == 0) continue; // user 0 stayed home
        const int m = std::popcount(mask);
        if (static_cast<long long>(r_user) * m > supply) {
            acc += std::pow(a, m) * std::pow(1.0 - a, n - m);
        }
    }
    return acc;
}

} // namespace

TEST_CASE("unserved risk equals full enumeration on small markets") {
    struct Case {
        int n;
        double a;
        int r_user;
        int edge_capacity;
    };
    for (const Case& t : {Case{3, 0.5, 1, 2}, Case{8, 0.76, 3, 10}, Case{10, 0.3, 2, 7},
                          Case{12, 0.9, 5, 30}, Case{6, 0.05, 2, 4}}) {
        MarketConfig c = kStock.market;
        c.num_users = t.n;
        c.attendance_prob = t.a;
        c.edge_capacity = t.edge_capacity;
        const EdgeContract ec{t.r_user, 1.0, 1.0, 0.5};
        const CloudContract none{0, 0.0, 0.0};
        const double brute = unserved_brute_force(t.n, t.a, t.r_user, t.edge_capacity);
        REQUIRE(user_risk_unserved(ec, none, c) == Catch::Approx(brute).margin(1e-12));
    }
}

TEST_CASE("unserved risk closed form on the three-user market") {
    // Three users at attendance 1/2 booking one slot each against two
    // secured slots: a user is unserved iff it attends together with both
    // others, so the risk is (1/2) * (1/4) = 0.125.
    MarketConfig c = kStock.market;
    c.num_users = 3;
    c.attendance_prob = 0.5;
    c.edge_capacity = 2;
    const EdgeContract ec{1, 1.0, 1.0, 0.5};
    REQUIRE(user_risk_unserved(ec, CloudContract{0, 0.0, 0.0}, c) ==
            Catch::Approx(0.125).margin(1e-14));
}

TEST_CASE("unserved risk at the stock winner matches the binomial tail") {
    const MarketConfig& c = kStock.market;
    // Demand spills past 497 secured slots iff at least 124 of the other 136
    // users attend alongside.
    const double expect = 0.76 * binomial_tail_geq(136, 124, 0.76);
    REQUIRE(user_risk_unserved(kDeal, kBackup, c) == Catch::Approx(expect).margin(1e-15));
}

TEST_CASE("unserved risk shrinks with backup and grows with reservation size") {
    const MarketConfig& c = kStock.market;
    const EdgeContract ec{5, 1.5, 1.5, 0.3};
    double prev = 1.0;
    for (int rb : {0, 100, 200, 300}) {
        const double r = user_risk_unserved(ec, CloudContract{rb, 0.0, 0.0}, c);
        REQUIRE(r <= prev);
        prev = r;
    }
    for (int ru = 2; ru <= 5; ++ru) {
        REQUIRE(user_risk_unserved(EdgeContract{ru, 1.5, 1.5, 0.3}, kBackup, c) >=
                user_risk_unserved(EdgeContract{ru - 1, 1.5, 1.5, 0.3}, kBackup, c));
    }
    // Full coverage never strands anyone.
    MarketConfig small = kStock.market;
    small.num_users = 100;
    REQUIRE(user_risk_unserved(EdgeContract{1, 1.0, 1.0, 0.0}, CloudContract{0, 0.0, 0.0}, small) == 0.0);
}

TEST_CASE("negative-utility risk is the absence mass when service always pays") {
    const MarketConfig& c = kStock.market;
    // Served utility at the stock winner is at least 4 * 1.054 - 1.5 > 0 for
    // every stock channel, and compensation is positive, so only absence
    // (utility -1.5) lands at or below zero.
    REQUIRE(user_risk_negative(kDeal, kBackup, kStock.profile, c) ==
            Catch::Approx(1.0 - 0.76).margin(1e-15));
    // A zero penalty still counts: an absent user's utility is exactly zero.
    const EdgeContract no_penalty{4, 1.5, 0.0, 0.3};
    REQUIRE(user_risk_negative(no_penalty, kBackup, kStock.profile, c) ==
            Catch::Approx(1.0 - 0.76).margin(1e-15));
}

TEST_CASE("negative-utility risk saturates when the price erases the gain") {
    MarketConfig c = kStock.market;
    const EdgeContract ruinous{4, 50.0, 1.5, 0.3};
    // Everyone served pays more than offloading saves, absentees pay the
    // penalty, and the backup covers all attendees, so every user ends every
    // round at a loss except the compensated corner (which has mass only
    // beyond 124 attendees).
    const double r = user_risk_negative(ruinous, kBackup, kStock.profile, c);
    REQUIRE(r > 0.999);
    REQUIRE(r <= 1.0);
}

TEST_CASE("negative-utility risk is monotone in the service price") {
    const MarketConfig& c = kStock.market;
    double prev = 0.0;
    for (double p : {1.5, 4.0, 4.22, 4.24, 4.26, 4.3, 6.0}) {
        const double r = user_risk_negative(EdgeContract{4, p, 1.5, 0.3}, kBackup, kStock.profile, c);
        REQUIRE(r >= prev - 1e-12);
        REQUIRE(r >= 0.0);
        REQUIRE(r <= 1.0);
        prev = r;
    }
}

TEST_CASE("interior gain threshold matches a fine scan on a one-user market") {
    MarketConfig c = kStock.market;
    c.num_users = 1;
    const LatencyEnergyProfile& p = kStock.profile;
    // Price inside the served-utility range, so the zero crossing sits
    // strictly between the gain bounds.
    const EdgeContract ec{4, 4.24, 1.5, 0.3};
    const CloudContract none{0, 0.0, 0.0};
    const double risk = user_risk_negative(ec, none, p, c);
    // With a single user the attend branch is fully edge-served, so the
    // analytic risk is (1-a) + a * F(gain threshold).
    const int n_grid = 400000;
    int nonpositive = 0;
    for (int i = 0; i <= n_grid; ++i) {
        const double g = 100.0 + (300.0 * i) / n_grid;
        if (user_utility(true, g, UserStatus::ServedEdge, ec, p, c) <= 0.0) ++nonpositive;
    }
    const double scan_fraction = static_cast<double>(nonpositive) / (n_grid + 1);
    REQUIRE(scan_fraction > 0.05); // the crossing really is interior
    REQUIRE(scan_fraction < 0.95);
    REQUIRE(risk == Catch::Approx(0.24 + 0.76 * scan_fraction).margin(1e-4));
}

TEST_CASE("compensated branch mixes through the binomial attendance") {
    // Tiny market where the edge holds one user and nothing else: with zero
    // compensation every turned-away attendee has non-positive utility, so
    // the attend branch contributes sum_k pmf(4,a,k) * k/(k+1) and prices
    // are low enough that served users always profit.
    MarketConfig c = kStock.market;
    c.num_users = 5;
    c.edge_capacity = 2;
    const EdgeContract ec{2, 1.0, 1.0, 0.0};
    const CloudContract none{0, 0.0, 0.0};
    const double a = c.attendance_prob;
    double expect = 1.0 - a;
    for (int k = 0; k <= 4; ++k) {
        const double pmf =
            std::exp(std::lgamma(5.0) - std::lgamma(k + 1.0) - std::lgamma(5.0 - k)) *
            std::pow(a, k) * std::pow(1.0 - a, 4 - k);
        expect += a * pmf * (static_cast<double>(k) / (k + 1));
    }
    REQUIRE(user_risk_negative(ec, none, kStock.profile, c) == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("point gain range collapses the served distribution") {
    MarketConfig c = kStock.market;
    c.gamma_low = c.gamma_high = 250.0;
    const double r = user_risk_negative(kDeal, kBackup, kStock.profile, c);
    REQUIRE(r == Catch::Approx(0.24).margin(1e-15));
    const EdgeContract ruinous{4, 50.0, 1.5, 0.3};
    REQUIRE(user_risk_negative(ruinous, kBackup, kStock.profile, c) > 0.99);
    REQUIRE(expected_user_total_utility(kDeal, kBackup, kStock.profile, c) > 0.0);
}

TEST_CASE("edge risks at the stock winner follow the attendance regimes") {
    const MarketConfig& c = kStock.market;
    const EdgeRiskPair r = edge_risks_exact(kDeal, kBackup, c);
    // Non-refundable pricing keeps edge utility constant until attendees
    // exceed the 124-user service ceiling, so the below-expectation mass is
    // exactly the attendance tail past 124.
    REQUIRE(r.below_expectation == Catch::Approx(binomial_tail_geq(137, 125, 0.76)).margin(1e-12));
    // Usage drops under 50% only for m <= 24 (edge-only regime, supply 197)
    // or 50 <= m <= 62 (backup regime, supply 497).
    const double expect_underutil =
        (1.0 - binomial_tail_geq(137, 25, 0.76)) +
        (binomial_tail_geq(137, 50, 0.76) - binomial_tail_geq(137, 63, 0.76));
    REQUIRE(r.underutilization == Catch::Approx(expect_underutil).margin(1e-12));
}

TEST_CASE("constant edge utility never counts as below expectation") {
    // The no-overbooking winner serves every attendee and charges the same
    // penalty as price, so its round utility is one constant; rounding noise
    // in the expectation must not flip the whole mass below it.
    const MarketConfig& c = kStock.market;
    const EdgeContract cautious{3, 1.5, 1.5, 0.3};
    const EdgeRiskPair r = edge_risks_exact(cautious, kBackup, c);
    REQUIRE(r.below_expectation == 0.0);
    // Underutilization still has mass: 66..82 attendees trigger the backup
    // purchase (3m > 197) yet fill under half of the 497 slots then held,
    // and m <= 32 underfills the bare edge.
    const double expect_underutil =
        (1.0 - binomial_tail_geq(137, 33, 0.76)) +
        (binomial_tail_geq(137, 66, 0.76) - binomial_tail_geq(137, 83, 0.76));
    REQUIRE(r.underutilization == Catch::Approx(expect_underutil).margin(1e-12));
    REQUIRE(expected_edge_utility(cautious, kBackup, c) == Catch::Approx(85.5).margin(1e-9));
}

TEST_CASE("expected edge utility prices in the rare compensation tail") {
    const MarketConfig& c = kStock.market;
    // Below 125 attendees the stock winner's utility is exactly 85.5; above,
    // it declines as 308.7 - 1.8m.  The expectation follows directly.
    double expect = 85.5;
    for (int m = 125; m <= 137; ++m) {
        expect -= binomial_pmf(137, m, 0.76) * (85.5 - (308.7 - 1.8 * m));
    }
    REQUIRE(expected_edge_utility(kDeal, kBackup, c) == Catch::Approx(expect).margin(1e-10));
}

TEST_CASE("edge utility by attendance is flat then declining at the stock winner") {
    const MarketConfig& c = kStock.market;
    for (int m = 0; m <= 124; ++m) {
        REQUIRE(edge_utility_at_attendance(m, kDeal, kBackup, c) == Catch::Approx(85.5).margin(1e-12));
    }
    double prev = 85.5;
    for (int m = 125; m <= 137; ++m) {
        const double u = edge_utility_at_attendance(m, kDeal, kBackup, c);
        REQUIRE(u < prev);
        prev = u;
    }
}

TEST_CASE("usage rate accounts for the supply actually held") {
    const MarketConfig& c = kStock.market;
    REQUIRE(usage_rate_at_attendance(24, kDeal, kBackup, c) == Catch::Approx(96.0 / 197.0).margin(1e-15));
    REQUIRE(usage_rate_at_attendance(49, kDeal, kBackup, c) == Catch::Approx(196.0 / 197.0).margin(1e-15));
    REQUIRE(usage_rate_at_attendance(50, kDeal, kBackup, c) == Catch::Approx(200.0 / 497.0).margin(1e-15));
    REQUIRE(usage_rate_at_attendance(124, kDeal, kBackup, c) == Catch::Approx(496.0 / 497.0).margin(1e-15));
    REQUIRE(usage_rate_at_attendance(137, kDeal, kBackup, c) == Catch::Approx(496.0 / 497.0).margin(1e-15));
}

TEST_CASE("backup purchase probability is the attendance tail past the trigger") {
    const MarketConfig& c = kStock.market;
    REQUIRE(backup_purchase_probability(kDeal, c) ==
            Catch::Approx(binomial_tail_geq(137, 50, 0.76)).margin(1e-15));
    REQUIRE(backup_purchase_probability(EdgeContract{1, 0, 0, 0}, c) == 0.0);
}

TEST_CASE("expected cloud utility matches the closed-form ledger") {
    const MarketConfig& c = kStock.market;
    const CloudSideState& st = kStock.cloud_state;
    // Sales mean 0.4 * 300, refunds 0.9 * 0.4 * (300*301/2)/601, and the
    // contract pays 120 whether or not the backup is tapped.
    const double expect = 0.4 * 300.0 - 0.9 * 0.4 * (300.0 * 301.0 / 2.0 / 601.0) + 120.0;
    REQUIRE(expected_cloud_utility(kDeal, kBackup, st, c) == Catch::Approx(expect).margin(1e-10));
    REQUIRE(cloud_no_contract_baseline(st, c) == Catch::Approx(120.0).margin(1e-12));
    // The reservation must clear the baseline for the cloud to sign.
    REQUIRE(expected_cloud_utility(kDeal, kBackup, st, c) > cloud_no_contract_baseline(st, c));
}

TEST_CASE("cloud risk enumerates the demand lattice exactly") {
    const MarketConfig& c = kStock.market;
    const CloudSideState& st = kStock.cloud_state;
    // Without a reservation the utility is 0.4 * demand, whose expectation
    // sits on the demand value 300; 301 of 601 outcomes are at or below.
    REQUIRE(cloud_risk(kDeal, CloudContract{0, 0.0, 0.0}, st, c) ==
            Catch::Approx(301.0 / 601.0).margin(1e-12));
    // The stock winner's risk counts 233 demand levels.
    REQUIRE(cloud_risk(kDeal, kBackup, st, c) == Catch::Approx(233.0 / 601.0).margin(1e-12));
}

TEST_CASE("certify_exact mirrors the five standalone risks") {
    const RiskReport r = certify_exact(kDeal, kBackup, kStock.profile, kStock.cloud_state, kStock.market);
    REQUIRE(r.user_negative ==
            Catch::Approx(user_risk_negative(kDeal, kBackup, kStock.profile, kStock.market)).margin(1e-15));
    REQUIRE(r.user_unserved ==
            Catch::Approx(user_risk_unserved(kDeal, kBackup, kStock.market)).margin(1e-15));
    const EdgeRiskPair e = edge_risks_exact(kDeal, kBackup, kStock.market);
    REQUIRE(r.edge_below_expectation == Catch::Approx(e.below_expectation).margin(1e-15));
    REQUIRE(r.edge_underutilization == Catch::Approx(e.underutilization).margin(1e-15));
    REQUIRE(r.cloud_below_expectation ==
            Catch::Approx(cloud_risk(kDeal, kBackup, kStock.cloud_state, kStock.market)).margin(1e-15));
    REQUIRE(r.satisfied);
    REQUIRE(r.satisfied == within_thresholds(r));
    // Tightening a threshold below an attained risk flips certification.
    MarketConfig tight = kStock.market;
    tight.risk_thresholds.user_negative = 0.2;
    const RiskReport r2 = certify_exact(kDeal, kBackup, kStock.profile, kStock.cloud_state, tight);
    REQUIRE_FALSE(r2.satisfied);
}

TEST_CASE("Monte Carlo negative-utility risk converges to the analytic value") {
    const StreamFamily fam(kStock.market.rng_seed);
    RngStream rng = fam.substream(stream_kind::scratch, 1);
    const double mc =
        user_risk_negative_mc(kDeal, kBackup, kStock.profile, kStock.market, 20000, rng);
    REQUIRE(mc == Catch::Approx(0.24).margin(0.005));

    // Interior threshold case: part of the served mass is under water.
    const EdgeContract pricey{4, 4.24, 1.5, 0.3};
    const double exact = user_risk_negative(pricey, kBackup, kStock.profile, kStock.market);
    RngStream rng2 = fam.substream(stream_kind::scratch, 2);
    const double mc2 =
        user_risk_negative_mc(pricey, kBackup, kStock.profile, kStock.market, 30000, rng2);
    REQUIRE(exact > 0.3); // the case really exercises the served branch
    REQUIRE(mc2 == Catch::Approx(exact).margin(0.01));
    REQUIRE_THROWS_AS(user_risk_negative_mc(kDeal, kBackup, kStock.profile, kStock.market, 0, rng2),
                      std::invalid_argument);
}

TEST_CASE("Monte Carlo unserved risk converges to the analytic value") {
    const StreamFamily fam(kStock.market.rng_seed);
    const EdgeContract greedy{5, 1.5, 1.5, 0.3};
    const double exact = user_risk_unserved(greedy, kBackup, kStock.market);
    REQUIRE(exact > 0.3); // non-trivial tail at five slots per user
    RngStream rng = fam.substream(stream_kind::scratch, 3);
    const double mc = user_risk_unserved_mc(greedy, kBackup, kStock.market, 20000, rng);
    REQUIRE(mc == Catch::Approx(exact).margin(0.01));
}

TEST_CASE("Monte Carlo edge risks converge and enforce their sample floor") {
    const StreamFamily fam(kStock.market.rng_seed);
    // Refundable pricing makes edge utility swing with attendance, giving a
    // below-expectation probability near one half.
    const EdgeContract refundable{4, 1.5, 0.75, 0.3};
    const EdgeRiskPair exact = edge_risks_exact(refundable, kBackup, kStock.market);
    REQUIRE(exact.below_expectation > 0.35);
    const EdgeRiskPair mc = edge_risks(refundable, kBackup, kStock.market, 20000, fam);
    REQUIRE(mc.below_expectation == Catch::Approx(exact.below_expectation).margin(0.02));
    REQUIRE(mc.underutilization == Catch::Approx(exact.underutilization).margin(0.02));
    REQUIRE_THROWS_AS(edge_risks(refundable, kBackup, kStock.market, 9999, fam), std::invalid_argument);
}

TEST_CASE("Monte Carlo cloud risk converges to the enumeration") {
    const StreamFamily fam(kStock.market.rng_seed);
    const double exact = cloud_risk(kDeal, kBackup, kStock.cloud_state, kStock.market);
    const double mc = cloud_risk_mc(kDeal, kBackup, kStock.cloud_state, kStock.market, 20000, fam);
    REQUIRE(mc == Catch::Approx(exact).margin(0.015));
}

TEST_CASE("Monte Carlo certification reproduces the analytic report") {
    const StreamFamily fam(kStock.market.rng_seed);
    const RiskReport exact =
        certify_exact(kDeal, kBackup, kStock.profile, kStock.cloud_state, kStock.market);
    const RiskReport mc =
        certify_mc(kDeal, kBackup, kStock.profile, kStock.cloud_state, kStock.market, 30000, fam);
    REQUIRE(mc.user_negative == Catch::Approx(exact.user_negative).margin(0.01));
    REQUIRE(mc.user_unserved == Catch::Approx(exact.user_unserved).margin(0.01));
    REQUIRE(mc.edge_below_expectation == Catch::Approx(exact.edge_below_expectation).margin(0.01));
    REQUIRE(mc.edge_underutilization == Catch::Approx(exact.edge_underutilization).margin(0.01));
    REQUIRE(mc.cloud_below_expectation == Catch::Approx(exact.cloud_below_expectation).margin(0.015));
    REQUIRE(mc.satisfied);
    REQUIRE_THROWS_AS(
        certify_mc(kDeal, kBackup, kStock.profile, kStock.cloud_state, kStock.market, 5000, fam),
        std::invalid_argument);

    // Same family, same report, bit for bit.
    const RiskReport again =
        certify_mc(kDeal, kBackup, kStock.profile, kStock.cloud_state, kStock.market, 30000, fam);
    REQUIRE(again.user_negative == mc.user_negative);
    REQUIRE(again.cloud_below_expectation == mc.cloud_below_expectation);
}

TEST_CASE("expected user total utility at the stock winner") {
    const double e =
        expected_user_total_utility(kDeal, kBackup, kStock.profile, kStock.market);
    REQUIRE(e == Catch::Approx(254.20663963298998).epsilon(1e-9));
    // More slots per user pay off across the whole market.
    const double e3 =
        expected_user_total_utility(EdgeContract{3, 1.5, 1.5, 0.3}, kBackup, kStock.profile, kStock.market);
    REQUIRE(e > e3);
}
