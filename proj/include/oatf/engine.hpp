#pragma once

// Trading-round engine: replays signed contracts against sampled rounds.
//
// At round start the edge sees who showed up and buys the backup block iff
// the attending demand exceeds its own capacity.  Attendees are then placed
// first-come-first-served in arrival order; each takes all of their reserved
// slots or none (a partial allocation would break the latency promise the
// reservation encodes).

#include <stdexcept>
#include <vector>

#include "oatf/contracts.hpp"
#include "oatf/market_config.hpp"
#include "oatf/rng.hpp"
#include "oatf/sampling.hpp"
#include "oatf/utility_model.hpp"

namespace oatf {

struct Allocation {
    std::vector<UserStatus> status; // indexed by user id
    int served_edge = 0;
    int served_cloud = 0;
    int compensated = 0;
    bool bought_backup = false;
};

inline Allocation allocate_fcfs(const RoundSample& s, const EdgeContract& ec, const CloudContract& cc,
                                const MarketConfig& c) {
    const std::size_t n = static_cast<std::size_t>(c.num_users);
    if (s.attended.size() != n || s.arrival_order.size() != n) {
        throw std::invalid_argument("allocate_fcfs: sample sized for a different user count");
    }
    Allocation a;
    a.status.assign(n, UserStatus::Absent);
    a.bought_backup = buys_backup(attendee_count(s), ec, c);
    int edge_free = c.edge_capacity;
    int cloud_free = a.bought_backup ? cc.backup_slots : 0;
    for (int user : s.arrival_order) {
        if (!s.attended[static_cast<std::size_t>(user)]) continue;
        if (edge_free >= ec.reserved_per_user) {
            a.status[static_cast<std::size_t>(user)] = UserStatus::ServedEdge;
            edge_free -= ec.reserved_per_user;
            ++a.served_edge;
        } else if (cloud_free >= ec.reserved_per_user) {
            a.status[static_cast<std::size_t>(user)] = UserStatus::ServedCloud;
            cloud_free -= ec.reserved_per_user;
            ++a.served_cloud;
        } else {
            a.status[static_cast<std::size_t>(user)] = UserStatus::Compensated;
            ++a.compensated;
        }
    }
    return a;
}

struct RoundOutcome {
    int attendees = 0;
    int served_edge = 0;
    int served_cloud = 0;
    int compensated = 0; // attendees the edge had to pay off
    bool bought_backup = false;
    int other_demand = 0;
    double user_total_utility = 0.0;
    double edge_utility = 0.0;
    double cloud_utility = 0.0;
    double usage_rate = 0.0;     // occupied share of the supply held this round
    double sum_completion_s = 0.0; // summed over attendees
};

inline RoundOutcome run_round(const RoundSample& s, const EdgeContract& ec, const CloudContract& cc,
                              const SimulationConfig& cfg) {
    const MarketConfig& mc = cfg.market;
    const Allocation a = allocate_fcfs(s, ec, cc, mc);
    RoundOutcome out;
    out.served_edge = a.served_edge;
    out.served_cloud = a.served_cloud;
    out.compensated = a.compensated;
    out.attendees = a.served_edge + a.served_cloud + a.compensated;
    out.bought_backup = a.bought_backup;
    out.other_demand = s.other_demand;
    for (int i = 0; i < mc.num_users; ++i) {
        const std::size_t ui = static_cast<std::size_t>(i);
        const UserStatus st = a.status[ui];
        out.user_total_utility += user_utility(s.attended[ui], s.channel_gain[ui], st, ec, cfg.profile, mc);
        if (st == UserStatus::ServedEdge || st == UserStatus::ServedCloud) {
            out.sum_completion_s += served_completion_time(s.channel_gain[ui], st, ec, cfg.profile, mc);
        } else if (st == UserStatus::Compensated) {
            out.sum_completion_s += compensated_completion_time(cfg.profile, mc);
        }
    }
    out.edge_utility = edge_utility(a.served_edge + a.served_cloud, mc.num_users - out.attendees,
                                    a.compensated, ec, cc, a.bought_backup);
    out.cloud_utility = cloud_utility(s.other_demand, cc, a.bought_backup, cfg.cloud_state, mc);
    const double held = a.bought_backup ? mc.edge_capacity + cc.backup_slots : mc.edge_capacity;
    out.usage_rate = ec.reserved_per_user * (a.served_edge + a.served_cloud) / held;
    return out;
}

// Replays n_rounds independent rounds, one reproducible substream per round
// index, so round i's outcome is invariant to how many rounds run around it.
inline std::vector<RoundOutcome> run_campaign(const EdgeContract& ec, const CloudContract& cc,
                                              const SimulationConfig& cfg, int n_rounds,
                                              const StreamFamily& streams) {
    if (n_rounds < 1) throw std::invalid_argument("run_campaign: n_rounds must be >= 1");
    std::vector<RoundOutcome> out;
    out.reserve(static_cast<std::size_t>(n_rounds));
    for (int i = 0; i < n_rounds; ++i) {
        RngStream rng = streams.substream(stream_kind::campaign_round, static_cast<std::uint64_t>(i));
        const RoundSample s = sample_round(cfg.market, rng);
        out.push_back(run_round(s, ec, cc, cfg));
    }
    return out;
}

} // namespace oatf
