#pragma once

// Round utilities of the three parties, plus the small allocation arithmetic
// (who buys backup, how many users each tier can hold) shared by the trading
// engine and the risk calculators.
//
// Modeling notes that the formulas below rely on:
//  * A served user offloads min(reserved_per_user, apps_per_user) applications
//    and keeps the remainder on the local CPU.  Booking more slots therefore
//    buys more offloaded work, which is what makes a larger reservation worth
//    paying for at all.
//  * Savings are counted on the offloaded portion only; the applications that
//    stay local cost the same with or without the contract and cancel out.
//  * Service is all-or-nothing: a user's slots never straddle the edge/cloud
//    boundary, so per-tier capacity in users is floor(slots / reserved).

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oatf/contracts.hpp"
#include "oatf/market_config.hpp"
#include "oatf/physics.hpp"

namespace oatf {

enum class UserStatus { ServedEdge, ServedCloud, Compensated, Absent };

struct UserOutcome {
    UserStatus status = UserStatus::Absent;
    double utility = 0.0;
    double completion_time_s = 0.0; // 0 for absent users
};

inline int offloaded_apps(const EdgeContract& ec, const MarketConfig& c) {
    return std::min(ec.reserved_per_user, c.apps_per_user);
}

// The edge taps its cloud backup in a round iff attending contractual demand
// exceeds its own capacity.
inline bool buys_backup(int attendees, const EdgeContract& ec, const MarketConfig& c) {
    return static_cast<long long>(ec.reserved_per_user) * attendees > c.edge_capacity;
}

struct ServeCounts {
    int edge = 0;  // users served on edge slots
    int cloud = 0; // users served on reserved cloud slots
    int compensated = 0;
    bool bought_backup = false;
};

// How many of `attendees` users each tier absorbs under first-come-first-
// served filling with whole-user granularity.
inline ServeCounts serve_counts(int attendees, const EdgeContract& ec, const CloudContract& cc,
                                const MarketConfig& c) {
    ServeCounts sc;
    const int ru = ec.reserved_per_user;
    sc.bought_backup = buys_backup(attendees, ec, c);
    sc.edge = std::min(attendees, c.edge_capacity / ru);
    const int rest = attendees - sc.edge;
    sc.cloud = sc.bought_backup ? std::min(rest, cc.backup_slots / ru) : 0;
    sc.compensated = rest - sc.cloud;
    return sc;
}

// Net value of the round for one user.  `gain` is ignored for absent and
// compensated users.
inline double user_utility(bool attended, double gain, UserStatus status, const EdgeContract& ec,
                           const LatencyEnergyProfile& p, const MarketConfig& c) {
    if (status == UserStatus::Absent) {
        if (attended) throw std::invalid_argument("user_utility: attendee marked absent");
        return -ec.penalty_user_to_edge;
    }
    if (!attended) throw std::invalid_argument("user_utility: absentee marked as participating");
    if (status == UserStatus::Compensated) return ec.compensation_edge_to_user;
    const int k = offloaded_apps(ec, c);
    const Tier tier = status == UserStatus::ServedEdge ? Tier::Edge : Tier::Cloud;
    const DelayEnergy off = offload_round_trip(gain, k, p, c, tier);
    const DelayEnergy loc = local_processing(k, p, c);
    return p.time_value * (loc.delay_s - off.delay_s) +
           p.energy_value * (loc.user_energy_j - off.user_energy_j) -
           ec.price_user_to_edge;
}

// Wall time until all of a served user's applications are done: the offloaded
// batch and the locally kept batch run concurrently.
inline double served_completion_time(double gain, UserStatus status, const EdgeContract& ec,
                                     const LatencyEnergyProfile& p, const MarketConfig& c) {
    const int k = offloaded_apps(ec, c);
    const Tier tier = status == UserStatus::ServedEdge ? Tier::Edge : Tier::Cloud;
    const double off_s = offload_round_trip(gain, k, p, c, tier).delay_s;
    const int local_rest = c.apps_per_user - k;
    const double local_s = local_rest > 0 ? local_processing(local_rest, p, c).delay_s : 0.0;
    return std::max(off_s, local_s);
}

inline double compensated_completion_time(const LatencyEnergyProfile& p, const MarketConfig& c) {
    return local_processing(c.apps_per_user, p, c).delay_s;
}

// Net value of the round for the edge server, from allocation counts.
inline double edge_utility(int served_count, int absent_count, int compensated_count,
                           const EdgeContract& ec, const CloudContract& cc, bool bought_backup) {
    if (served_count < 0 || absent_count < 0 || compensated_count < 0) {
        throw std::invalid_argument("edge_utility: negative count");
    }
    return served_count * ec.price_user_to_edge + absent_count * ec.penalty_user_to_edge -
           compensated_count * ec.compensation_edge_to_user -
           (bought_backup ? cc.price_edge_to_cloud : cc.penalty_edge_to_cloud);
}

// How many third-party requesters are left waiting because the reservation
// shrank the cloud's open capacity.
inline int cloud_waiting_requesters(int other_demand, const CloudContract& cc, const MarketConfig& c) {
    return std::max(0, other_demand - (c.cloud_capacity - cc.backup_slots));
}

// Net value of the round for the cloud server: third-party sales, minus
// refunds owed to requesters displaced by the reservation, plus whichever of
// the contract payments the edge owes this round.
inline double cloud_utility(int other_demand, const CloudContract& cc, bool bought_backup,
                            const CloudSideState& st, const MarketConfig& c) {
    if (other_demand < 0 || other_demand > c.cloud_capacity) {
        throw std::invalid_argument("cloud_utility: other_demand outside {0..cloud_capacity}");
    }
    const int waiting = cloud_waiting_requesters(other_demand, cc, c);
    return st.other_price * other_demand - st.refund_rate * st.other_price * waiting +
           (bought_backup ? cc.price_edge_to_cloud : cc.penalty_edge_to_cloud);
}

} // namespace oatf
