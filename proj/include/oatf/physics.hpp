#pragma once

// Transmission and computation physics: uplink data rate over the wireless
// channel, offload round-trip delay/energy, and the local-execution baseline.
//
// Applications of one user run sequentially on the serving slot, so delay and
// energy scale linearly with the number of applications involved.

#include <cmath>
#include <stdexcept>

#include "oatf/market_config.hpp"

namespace oatf {

enum class Tier { Edge, Cloud };

struct DelayEnergy {
    double delay_s = 0.0;
    double user_energy_j = 0.0; // energy spent by the user's device
};

// Total compute demand of a single application, in CPU cycles.
inline double workload_cycles(const MarketConfig& c) {
    return c.cycles_per_bit * c.data_size_bits;
}

// Shannon capacity of the uplink at the given channel gain, in bits/s.
// Received SNR is tx_power_w * gain (gain already folds in path loss / noise).
inline double uplink_rate_bps(double gain, const MarketConfig& c) {
    if (!(gain > 0.0)) throw std::invalid_argument("uplink_rate_bps: gain must be positive");
    return c.bandwidth_hz * std::log2(1.0 + c.tx_power_w * gain);
}

inline double slot_cpu_hz(Tier tier, const LatencyEnergyProfile& p) {
    return tier == Tier::Edge ? p.edge_cpu_hz_per_slot : p.cloud_cpu_hz_per_slot;
}

// Delay and device energy for offloading n_apps applications: upload each
// application's data, then execute remotely.  The device radio is the only
// energy consumer on the user side; result downloads are negligible.
inline DelayEnergy offload_round_trip(double gain, int n_apps, const LatencyEnergyProfile& p,
                                      const MarketConfig& c, Tier tier) {
    if (n_apps < 1) throw std::invalid_argument("offload_round_trip: n_apps must be >= 1");
    const double rate = uplink_rate_bps(gain, c);
    const double tx_s = n_apps * c.data_size_bits / rate;
    const double compute_s = n_apps * workload_cycles(c) / slot_cpu_hz(tier, p);
    return DelayEnergy{tx_s + compute_s, c.tx_power_w * tx_s};
}

// Delay and energy for executing n_apps applications on the local CPU.
// Energy follows the usual dynamic-power model: kappa * f^2 per cycle.
inline DelayEnergy local_processing(int n_apps, const LatencyEnergyProfile& p, const MarketConfig& c) {
    if (n_apps < 1) throw std::invalid_argument("local_processing: n_apps must be >= 1");
    const double cycles = n_apps * workload_cycles(c);
    return DelayEnergy{cycles / p.local_cpu_hz,
                       p.compute_energy_coeff * p.local_cpu_hz * p.local_cpu_hz * cycles};
}

} // namespace oatf
