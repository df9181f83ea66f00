#pragma once

// Market parameters, physical device profile, cloud-side constants, and spot
// trading constants, plus the plain-text key/value file format they load from.
//
// File format: one `key = value` per line, `#` starts a comment, blank lines
// ignored.  Every key is required exactly once and unknown keys are rejected,
// so a config file is always a complete, explicit record of an experiment.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace oatf {

// Raised for any malformed, missing, unknown, or out-of-range config input.
// The CLI maps this to its config-error exit code.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Acceptable probability caps for the five negotiated risks.
struct RiskThresholds {
    double user_negative = 0.30;        // P(a user's round utility <= 0)
    double user_unserved = 0.30;        // P(user attends and total demand exceeds supply)
    double edge_below_expectation = 0.40; // P(edge utility < its expectation)
    double edge_underutilization = 0.30;  // P(usage rate < usage_floor)
    double cloud_below_expectation = 0.40; // P(cloud utility <= its expectation)
};

struct MarketConfig {
    int num_users = 137;
    double attendance_prob = 0.76;
    double gamma_low = 100.0;  // channel gain range endpoints
    double gamma_high = 400.0;
    int edge_capacity = 197;   // service slots owned by the edge server
    int cloud_capacity = 600;  // service slots owned by the cloud server
    int apps_per_user = 5;
    double tx_power_w = 0.55;
    double bandwidth_hz = 6.0e6;
    double data_size_bits = 1048576.0; // per application
    double cycles_per_bit = 600.0;
    double e2e_delay_low_ms = 2.0;  // spot-negotiation message delay range
    double e2e_delay_high_ms = 15.0;
    RiskThresholds risk_thresholds;
    double usage_floor = 0.5; // usage rate below this counts as underutilized
    std::uint64_t rng_seed = 20240101;
};

// Compute-speed and valuation constants used to turn delays and energy into
// currency.  One slot serves one application stream at the listed rate.
struct LatencyEnergyProfile {
    double local_cpu_hz = 1.0e9;
    double edge_cpu_hz_per_slot = 4.0e9;
    double cloud_cpu_hz_per_slot = 8.0e9;
    double compute_energy_coeff = 1.0e-27; // J per cycle per Hz^2 (kappa * f^2 * cycles)
    double time_value = 1.0;   // currency per saved second
    double energy_value = 1.0; // currency per saved joule
};

// Cloud-side market constants outside the negotiated contract.
struct CloudSideState {
    double other_price = 0.4;  // income per slot sold to third-party requesters
    double refund_rate = 0.9;  // fraction of other_price refunded per waiting requester
};

// Constants of the two spot baselines.
struct SpotParams {
    int rounds_of_negotiation = 5;
    int round_trips_per_exchange = 2;
    double time_budget_s = 10.0; // available wall time per trading round
    double dp_spread = 0.5;      // differential-pricing slope across the gain range
};

struct SimulationConfig {
    MarketConfig market;
    LatencyEnergyProfile profile;
    CloudSideState cloud_state;
    SpotParams spot;
};

inline void validate(const MarketConfig& c) {
    auto fail = [](const std::string& m) { throw ConfigError("market config: " + m); };
    if (c.num_users < 1) fail("num_users must be >= 1");
    if (!(c.attendance_prob >= 0.0 && c.attendance_prob <= 1.0)) fail("attendance_prob outside [0,1]");
    if (!(c.gamma_low > 0.0)) fail("gamma_low must be positive");
    if (!(c.gamma_low <= c.gamma_high)) fail("gamma_low must not exceed gamma_high");
    if (c.edge_capacity < 1) fail("edge_capacity must be >= 1");
    if (c.cloud_capacity < 0) fail("cloud_capacity must be >= 0");
    if (c.apps_per_user < 1) fail("apps_per_user must be >= 1");
    if (!(c.tx_power_w > 0.0)) fail("tx_power_w must be positive");
    if (!(c.bandwidth_hz > 0.0)) fail("bandwidth_hz must be positive");
    if (!(c.data_size_bits > 0.0)) fail("data_size_bits must be positive");
    if (!(c.cycles_per_bit > 0.0)) fail("cycles_per_bit must be positive");
    if (!(c.e2e_delay_low_ms >= 0.0)) fail("e2e_delay_low_ms must be >= 0");
    if (!(c.e2e_delay_low_ms <= c.e2e_delay_high_ms)) fail("e2e_delay_low_ms must not exceed e2e_delay_high_ms");
    const RiskThresholds& t = c.risk_thresholds;
    for (double v : {t.user_negative, t.user_unserved, t.edge_below_expectation,
                     t.edge_underutilization, t.cloud_below_expectation}) {
        if (!(v >= 0.0 && v <= 1.0)) fail("risk thresholds must lie in [0,1]");
    }
    if (!(c.usage_floor >= 0.0 && c.usage_floor <= 1.0)) fail("usage_floor outside [0,1]");
}

inline void validate(const LatencyEnergyProfile& p) {
    auto fail = [](const std::string& m) { throw ConfigError("latency/energy profile: " + m); };
    if (!(p.local_cpu_hz > 0.0)) fail("local_cpu_hz must be positive");
    if (!(p.edge_cpu_hz_per_slot > 0.0)) fail("edge_cpu_hz_per_slot must be positive");
    if (!(p.cloud_cpu_hz_per_slot > 0.0)) fail("cloud_cpu_hz_per_slot must be positive");
    if (!(p.compute_energy_coeff >= 0.0)) fail("compute_energy_coeff must be >= 0");
    if (!(p.time_value >= 0.0)) fail("time_value must be >= 0");
    if (!(p.energy_value >= 0.0)) fail("energy_value must be >= 0");
}

inline void validate(const CloudSideState& s) {
    auto fail = [](const std::string& m) { throw ConfigError("cloud state: " + m); };
    if (!(s.other_price >= 0.0)) fail("other_price must be >= 0");
    if (!(s.refund_rate >= 0.0 && s.refund_rate <= 1.0)) fail("refund_rate outside [0,1]");
}

inline void validate(const SpotParams& s) {
    auto fail = [](const std::string& m) { throw ConfigError("spot params: " + m); };
    if (s.rounds_of_negotiation < 1) fail("rounds_of_negotiation must be >= 1");
    if (s.round_trips_per_exchange < 1) fail("round_trips_per_exchange must be >= 1");
    if (!(s.time_budget_s > 0.0)) fail("time_budget_s must be positive");
    if (!(s.dp_spread >= 0.0)) fail("dp_spread must be >= 0");
}

inline void validate(const SimulationConfig& c) {
    validate(c.market);
    validate(c.profile);
    validate(c.cloud_state);
    validate(c.spot);
}

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double_value(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* b = text.data();
    const char* e = b + text.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) {
        throw ConfigError("config key '" + key + "': not a valid number: '" + text + "'");
    }
    return v;
}

inline std::int64_t parse_int_value(const std::string& key, const std::string& text) {
    std::int64_t v = 0;
    const char* b = text.data();
    const char* e = b + text.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) {
        throw ConfigError("config key '" + key + "': not a valid integer: '" + text + "'");
    }
    return v;
}

inline std::uint64_t parse_uint_value(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const char* b = text.data();
    const char* e = b + text.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) {
        throw ConfigError("config key '" + key + "': not a valid unsigned integer: '" + text + "'");
    }
    return v;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Splits `key = value` lines into an ordered map, rejecting duplicates and
// malformed lines.
inline std::map<std::string, std::string> parse_kv_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (value.empty()) throw ConfigError("config key '" + key + "': empty value");
        if (!kv.emplace(key, value).second) {
            throw ConfigError("config key '" + key + "': duplicated");
        }
    }
    return kv;
}

} // namespace detail

// Serialized in a fixed order so identical configs produce identical bytes.
inline std::string serialize_config(const SimulationConfig& c) {
    std::ostringstream out;
    auto put_d = [&](const char* k, double v) { out << k << " = " << detail::format_double(v) << "\n"; };
    auto put_i = [&](const char* k, std::int64_t v) { out << k << " = " << v << "\n"; };
    out << "# Trading market configuration (all keys required)\n";
    put_i("num_users", c.market.num_users);
    put_d("attendance_prob", c.market.attendance_prob);
    put_d("gamma_low", c.market.gamma_low);
    put_d("gamma_high", c.market.gamma_high);
    put_i("edge_capacity", c.market.edge_capacity);
    put_i("cloud_capacity", c.market.cloud_capacity);
    put_i("apps_per_user", c.market.apps_per_user);
    put_d("tx_power_w", c.market.tx_power_w);
    put_d("bandwidth_hz", c.market.bandwidth_hz);
    put_d("data_size_bits", c.market.data_size_bits);
    put_d("cycles_per_bit", c.market.cycles_per_bit);
    put_d("e2e_delay_low_ms", c.market.e2e_delay_low_ms);
    put_d("e2e_delay_high_ms", c.market.e2e_delay_high_ms);
    put_d("risk_user_negative", c.market.risk_thresholds.user_negative);
    put_d("risk_user_unserved", c.market.risk_thresholds.user_unserved);
    put_d("risk_edge_below_expectation", c.market.risk_thresholds.edge_below_expectation);
    put_d("risk_edge_underutilization", c.market.risk_thresholds.edge_underutilization);
    put_d("risk_cloud_below_expectation", c.market.risk_thresholds.cloud_below_expectation);
    put_d("usage_floor", c.market.usage_floor);
    out << "rng_seed = " << c.market.rng_seed << "\n";
    put_d("local_cpu_hz", c.profile.local_cpu_hz);
    put_d("edge_cpu_hz_per_slot", c.profile.edge_cpu_hz_per_slot);
    put_d("cloud_cpu_hz_per_slot", c.profile.cloud_cpu_hz_per_slot);
    put_d("compute_energy_coeff", c.profile.compute_energy_coeff);
    put_d("time_value", c.profile.time_value);
    put_d("energy_value", c.profile.energy_value);
    put_d("other_price", c.cloud_state.other_price);
    put_d("refund_rate", c.cloud_state.refund_rate);
    put_i("spot_rounds_of_negotiation", c.spot.rounds_of_negotiation);
    put_i("spot_round_trips_per_exchange", c.spot.round_trips_per_exchange);
    put_d("spot_time_budget_s", c.spot.time_budget_s);
    put_d("spot_dp_spread", c.spot.dp_spread);
    return out.str();
}

inline SimulationConfig parse_config_text(const std::string& text) {
    auto kv = detail::parse_kv_text(text);
    SimulationConfig c;
    auto take = [&](const char* key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError(std::string("config key '") + key + "': missing");
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto take_d = [&](const char* key) { return detail::parse_double_value(key, take(key)); };
    auto take_i = [&](const char* key) {
        std::int64_t v = detail::parse_int_value(key, take(key));
        if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(std::string("config key '") + key + "': out of range");
        return static_cast<int>(v);
    };

    c.market.num_users = take_i("num_users");
    c.market.attendance_prob = take_d("attendance_prob");
    c.market.gamma_low = take_d("gamma_low");
    c.market.gamma_high = take_d("gamma_high");
    c.market.edge_capacity = take_i("edge_capacity");
    c.market.cloud_capacity = take_i("cloud_capacity");
    c.market.apps_per_user = take_i("apps_per_user");
    c.market.tx_power_w = take_d("tx_power_w");
    c.market.bandwidth_hz = take_d("bandwidth_hz");
    c.market.data_size_bits = take_d("data_size_bits");
    c.market.cycles_per_bit = take_d("cycles_per_bit");
    c.market.e2e_delay_low_ms = take_d("e2e_delay_low_ms");
    c.market.e2e_delay_high_ms = take_d("e2e_delay_high_ms");
    c.market.risk_thresholds.user_negative = take_d("risk_user_negative");
    c.market.risk_thresholds.user_unserved = take_d("risk_user_unserved");
    c.market.risk_thresholds.edge_below_expectation = take_d("risk_edge_below_expectation");
    c.market.risk_thresholds.edge_underutilization = take_d("risk_edge_underutilization");
    c.market.risk_thresholds.cloud_below_expectation = take_d("risk_cloud_below_expectation");
    c.market.usage_floor = take_d("usage_floor");
    c.market.rng_seed = detail::parse_uint_value("rng_seed", take("rng_seed"));
    c.profile.local_cpu_hz = take_d("local_cpu_hz");
    c.profile.edge_cpu_hz_per_slot = take_d("edge_cpu_hz_per_slot");
    c.profile.cloud_cpu_hz_per_slot = take_d("cloud_cpu_hz_per_slot");
    c.profile.compute_energy_coeff = take_d("compute_energy_coeff");
    c.profile.time_value = take_d("time_value");
    c.profile.energy_value = take_d("energy_value");
    c.cloud_state.other_price = take_d("other_price");
    c.cloud_state.refund_rate = take_d("refund_rate");
    c.spot.rounds_of_negotiation = take_i("spot_rounds_of_negotiation");
    c.spot.round_trips_per_exchange = take_i("spot_round_trips_per_exchange");
    c.spot.time_budget_s = take_d("spot_time_budget_s");
    c.spot.dp_spread = take_d("spot_dp_spread");

    if (!kv.empty()) {
        throw ConfigError("config key '" + kv.begin()->first + "': unknown");
    }
    validate(c);
    return c;
}

inline SimulationConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config_text(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

// The stock configuration used by the shipped experiments and the test suite.
inline SimulationConfig stock_config() {
    SimulationConfig c; // field initializers carry the stock values
    return c;
}

} // namespace oatf
