#pragma once

// Forward-contract terms agreed ahead of each trading campaign.
//
// The user-side contract books reserved_per_user slots for every contractual
// user; the cloud-side contract reserves backup_slots on the cloud as spill
// capacity.  All prices are lump currency amounts per trading round.

#include <stdexcept>
#include <string>

#include "oatf/market_config.hpp"

namespace oatf {

struct EdgeContract {
    int reserved_per_user = 0;           // slots booked by each user
    double price_user_to_edge = 0.0;     // paid by a served user
    double penalty_user_to_edge = 0.0;   // paid by an absent user
    double compensation_edge_to_user = 0.0; // paid to a booked-but-unserved user
};

struct CloudContract {
    int backup_slots = 0;              // cloud slots reserved for spill service
    double price_edge_to_cloud = 0.0;  // paid when the edge taps the backup
    double penalty_edge_to_cloud = 0.0; // paid when the backup goes unused
};

inline void validate(const EdgeContract& ec, const MarketConfig& c) {
    auto fail = [](const std::string& m) { throw ConfigError("edge contract: " + m); };
    if (ec.reserved_per_user < 1) fail("reserved_per_user must be >= 1");
    if (ec.reserved_per_user > c.edge_capacity + c.cloud_capacity) fail("reserved_per_user exceeds total capacity");
    if (!(ec.price_user_to_edge >= 0.0)) fail("price_user_to_edge must be >= 0");
    if (!(ec.penalty_user_to_edge >= 0.0)) fail("penalty_user_to_edge must be >= 0");
    if (!(ec.compensation_edge_to_user >= 0.0)) fail("compensation_edge_to_user must be >= 0");
}

inline void validate(const CloudContract& cc, const MarketConfig& c) {
    auto fail = [](const std::string& m) { throw ConfigError("cloud contract: " + m); };
    if (cc.backup_slots < 0) fail("backup_slots must be >= 0");
    if (cc.backup_slots > c.cloud_capacity) fail("backup_slots exceeds cloud capacity");
    if (!(cc.price_edge_to_cloud >= 0.0)) fail("price_edge_to_cloud must be >= 0");
    if (!(cc.penalty_edge_to_cloud >= 0.0)) fail("penalty_edge_to_cloud must be >= 0");
}

// Relative excess of slots booked by users over the slots actually secured
// (edge capacity plus reserved backup).  Positive means overbooked.
inline double overbooking_rate(const EdgeContract& ec, const CloudContract& cc, const MarketConfig& c) {
    const double booked = static_cast<double>(c.num_users) * ec.reserved_per_user;
    const double supply = static_cast<double>(c.edge_capacity) + cc.backup_slots;
    if (!(supply > 0.0)) throw std::invalid_argument("overbooking_rate: no supply");
    return (booked - supply) / supply;
}

} // namespace oatf
