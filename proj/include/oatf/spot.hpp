#pragma once

// Spot-trading baselines: no forward contracts, every round is negotiated on
// the spot.  Attendees request the same per-user slot count the forward
// market settled on, so the comparison isolates the trading mechanism.
//
// Two consequences of trading late drive the results.  First, the cloud's
// spare capacity is whatever third parties left over this round, so service
// collapses exactly in the rounds where the cloud happens to be busy.
// Second, every attendee pays a per-round negotiation overhead of repeated
// message exchanges before computing can even start; forward traders paid
// that once, off the clock.

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "oatf/contracts.hpp"
#include "oatf/engine.hpp"
#include "oatf/market_config.hpp"
#include "oatf/sampling.hpp"
#include "oatf/utility_model.hpp"

namespace oatf {

enum class SpotPricing { Uniform, Differential };

struct SpotTerms {
    int slots_per_user = 1;        // slots each attendee requests
    double base_price = 0.0;       // paid by a served user under uniform pricing
    double dp_spread = 0.0;        // differential price slope across the gain range
    double cloud_slot_price = 0.0; // open-market rate for one extra cloud slot
};

inline void validate(const SpotTerms& t) {
    auto fail = [](const char* m) { throw ConfigError(std::string("spot terms: ") + m); };
    if (t.slots_per_user < 1) fail("slots_per_user must be >= 1");
    if (!(t.base_price >= 0.0)) fail("base_price must be >= 0");
    if (!(t.dp_spread >= 0.0)) fail("dp_spread must be >= 0");
    if (!(t.cloud_slot_price >= 0.0)) fail("cloud_slot_price must be >= 0");
}

// Spot terms matched to a signed forward contract for like-for-like replay.
inline SpotTerms make_spot_terms(const EdgeContract& ec, const SimulationConfig& cfg) {
    SpotTerms t;
    t.slots_per_user = ec.reserved_per_user;
    t.base_price = ec.price_user_to_edge;
    t.dp_spread = cfg.spot.dp_spread;
    t.cloud_slot_price = cfg.cloud_state.other_price;
    return t;
}

// Wall time burned on per-round haggling before any computing starts.
inline double spot_negotiation_overhead_s(double e2e_delay_ms, const SpotParams& sp) {
    return sp.rounds_of_negotiation * sp.round_trips_per_exchange * 2.0 * (e2e_delay_ms / 1000.0);
}

inline double differential_price(double gain, const SpotTerms& t, const MarketConfig& c) {
    const double span = c.gamma_high - c.gamma_low;
    const double norm = span > 0.0 ? (gain - c.gamma_low) / span : 0.5;
    return t.base_price * (1.0 + t.dp_spread * (norm - 0.5));
}

inline RoundOutcome spot_round(const RoundSample& s, const SpotTerms& t, SpotPricing pricing,
                               const SimulationConfig& cfg) {
    const MarketConfig& mc = cfg.market;
    const std::size_t n = static_cast<std::size_t>(mc.num_users);
    if (s.attended.size() != n || s.arrival_order.size() != n) {
        throw std::invalid_argument("spot_round: sample sized for a different user count");
    }

    // Service order: first come first served under uniform pricing; the
    // provider cherry-picks the best channels under differential pricing.
    std::vector<int> order;
    order.reserve(n);
    if (pricing == SpotPricing::Uniform) {
        for (int u : s.arrival_order) {
            if (s.attended[static_cast<std::size_t>(u)]) order.push_back(u);
        }
    } else {
        for (int u = 0; u < mc.num_users; ++u) {
            if (s.attended[static_cast<std::size_t>(u)]) order.push_back(u);
        }
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return s.channel_gain[static_cast<std::size_t>(a)] > s.channel_gain[static_cast<std::size_t>(b)];
        });
    }
    const int m = static_cast<int>(order.size());

    const int edge_servable = mc.edge_capacity / t.slots_per_user;
    const int cloud_free = std::max(0, mc.cloud_capacity - s.other_demand);
    const int cloud_servable = cloud_free / t.slots_per_user;
    const int served_edge = std::min(m, edge_servable);
    const int served_cloud = std::min(m - served_edge, cloud_servable);
    const int bought_slots = served_cloud * t.slots_per_user;

    RoundOutcome out;
    out.attendees = m;
    out.served_edge = served_edge;
    out.served_cloud = served_cloud;
    out.compensated = m - served_edge - served_cloud;
    out.bought_backup = bought_slots > 0;
    out.other_demand = s.other_demand;

    const double overhead_value_per_s = cfg.profile.time_value + cfg.profile.energy_value * mc.tx_power_w;
    double edge_income = 0.0;
    for (int i = 0; i < m; ++i) {
        const std::size_t ui = static_cast<std::size_t>(order[static_cast<std::size_t>(i)]);
        const double gain = s.channel_gain[ui];
        const double overhead_s = spot_negotiation_overhead_s(s.e2e_delay_ms[ui], cfg.spot);
        const double overhead_cost = overhead_value_per_s * overhead_s;
        if (i < served_edge + served_cloud) {
            const UserStatus st = i < served_edge ? UserStatus::ServedEdge : UserStatus::ServedCloud;
            const double price = pricing == SpotPricing::Uniform ? t.base_price
                                                                 : differential_price(gain, t, mc);
            const EdgeContract deal{t.slots_per_user, price, 0.0, 0.0};
            out.user_total_utility += user_utility(true, gain, st, deal, cfg.profile, mc) - overhead_cost;
            out.sum_completion_s += served_completion_time(gain, st, deal, cfg.profile, mc) + overhead_s;
            edge_income += price;
        } else {
            out.user_total_utility -= overhead_cost;
            out.sum_completion_s += compensated_completion_time(cfg.profile, mc) + overhead_s;
        }
    }
    out.edge_utility = edge_income - bought_slots * t.cloud_slot_price;
    out.cloud_utility = cfg.cloud_state.other_price * s.other_demand + bought_slots * t.cloud_slot_price;
    const double held = static_cast<double>(mc.edge_capacity) + bought_slots;
    out.usage_rate = t.slots_per_user * (served_edge + served_cloud) / held;
    return out;
}

} // namespace oatf
