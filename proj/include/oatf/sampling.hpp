#pragma once

// Per-round stochastic state shared by every mechanism under comparison.
//
// One RoundSample is drawn per round index and replayed by each mechanism, so
// that differences between mechanisms are never sampling noise.  Draw order
// within a round is fixed (attendance, gains, third-party demand, message
// delays, arrival order) and must not be reordered: it defines the meaning of
// a seed.

#include <cstdint>
#include <numeric>
#include <vector>

#include "oatf/market_config.hpp"
#include "oatf/rng.hpp"

namespace oatf {

struct RoundSample {
    std::vector<bool> attended;       // attendance flag per user
    std::vector<double> channel_gain; // channel gain per user, U[gamma_low, gamma_high]
    int other_demand = 0;             // third-party cloud demand, U{0..cloud_capacity}
    std::vector<double> e2e_delay_ms; // per-user message delay (spot baselines only)
    std::vector<int> arrival_order;   // uniformly random service-request order
};

inline RoundSample sample_round(const MarketConfig& c, RngStream& rng) {
    RoundSample s;
    const std::size_t n = static_cast<std::size_t>(c.num_users);
    s.attended.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.attended[i] = rng.bernoulli(c.attendance_prob);
    s.channel_gain.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.channel_gain[i] = rng.uniform(c.gamma_low, c.gamma_high);
    s.other_demand = rng.uniform_int(0, c.cloud_capacity);
    s.e2e_delay_ms.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.e2e_delay_ms[i] = rng.uniform(c.e2e_delay_low_ms, c.e2e_delay_high_ms);
    s.arrival_order.resize(n);
    std::iota(s.arrival_order.begin(), s.arrival_order.end(), 0);
    rng.shuffle(s.arrival_order);
    return s;
}

inline int attendee_count(const RoundSample& s) {
    int m = 0;
    for (bool b : s.attended) m += b ? 1 : 0;
    return m;
}

} // namespace oatf
