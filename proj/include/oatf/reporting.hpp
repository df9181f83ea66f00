#pragma once

// Campaign aggregation and on-disk reporting.
//
// Every writer here is byte-deterministic: doubles are printed with the
// shortest round-trip representation, map-free ordering is fixed, and no
// timestamps or machine identity leak into the files.  Rerunning with the
// same config must reproduce every output bit for bit.

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "oatf/contracts.hpp"
#include "oatf/engine.hpp"
#include "oatf/market_config.hpp"
#include "oatf/negotiation.hpp"
#include "oatf/rng.hpp"
#include "oatf/sampling.hpp"
#include "oatf/spot.hpp"

namespace oatf {

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Mechanism { OATF, CBooking, SpotUniform, SpotDifferential };

inline const char* mechanism_label(Mechanism m) {
    switch (m) {
    case Mechanism::OATF: return "oatf";
    case Mechanism::CBooking: return "cbooking";
    case Mechanism::SpotUniform: return "spot_up";
    case Mechanism::SpotDifferential: return "spot_dp";
    }
    throw std::invalid_argument("mechanism_label: unknown mechanism");
}

inline Mechanism parse_mechanism(const std::string& name) {
    if (name == "oatf") return Mechanism::OATF;
    if (name == "cbooking") return Mechanism::CBooking;
    if (name == "spot_up") return Mechanism::SpotUniform;
    if (name == "spot_dp") return Mechanism::SpotDifferential;
    throw ConfigError("unknown mechanism '" + name + "'");
}

struct MechanismRun {
    Mechanism mechanism = Mechanism::OATF;
    double overbooking_rate = 0.0; // 0 for spot runs: nothing is booked ahead
    std::vector<RoundOutcome> rounds;
};

struct MechanismSummary {
    Mechanism mechanism = Mechanism::OATF;
    long long rounds = 0;
    long long total_attendees = 0;
    long long total_served_edge = 0;
    long long total_served_cloud = 0;
    long long total_failed = 0;
    long long rounds_with_failure = 0;
    double failure_rate = 0.0; // failed attendees over all attendees
    double mean_user_total_utility = 0.0;
    double mean_edge_utility = 0.0;
    double mean_cloud_utility = 0.0;
    double mean_usage_rate = 0.0;
    double mean_completion_s = 0.0; // per attendee
    double overbooking_rate = 0.0;
};

inline MechanismSummary aggregate(const MechanismRun& run) {
    MechanismSummary s;
    s.mechanism = run.mechanism;
    s.overbooking_rate = run.overbooking_rate;
    s.rounds = static_cast<long long>(run.rounds.size());
    double sum_user = 0.0, sum_edge = 0.0, sum_cloud = 0.0, sum_usage = 0.0, sum_completion = 0.0;
    for (const RoundOutcome& r : run.rounds) {
        s.total_attendees += r.attendees;
        s.total_served_edge += r.served_edge;
        s.total_served_cloud += r.served_cloud;
        s.total_failed += r.compensated;
        if (r.compensated > 0) ++s.rounds_with_failure;
        sum_user += r.user_total_utility;
        sum_edge += r.edge_utility;
        sum_cloud += r.cloud_utility;
        sum_usage += r.usage_rate;
        sum_completion += r.sum_completion_s;
    }
    if (s.rounds > 0) {
        s.mean_user_total_utility = sum_user / s.rounds;
        s.mean_edge_utility = sum_edge / s.rounds;
        s.mean_cloud_utility = sum_cloud / s.rounds;
        s.mean_usage_rate = sum_usage / s.rounds;
    }
    if (s.total_attendees > 0) {
        s.failure_rate = static_cast<double>(s.total_failed) / static_cast<double>(s.total_attendees);
        s.mean_completion_s = sum_completion / static_cast<double>(s.total_attendees);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Round-level CSV.
//
// Columns: mechanism, round, attendees, served_edge, served_cloud, failed,
// bought_backup, other_demand, user_total_utility, edge_utility,
// cloud_utility, usage_rate, mean_completion_s, failure_rate,
// overbooking_rate.  One row per mechanism per round, mechanisms in the
// order they were run, rounds ascending within a mechanism.

inline void write_rounds_csv(std::ostream& out, const std::vector<MechanismRun>& runs) {
    out << "# schema=oatf-rounds/1\n";
    out << "mechanism,round,attendees,served_edge,served_cloud,failed,bought_backup,other_demand,"
           "user_total_utility,edge_utility,cloud_utility,usage_rate,mean_completion_s,failure_rate,"
           "overbooking_rate\n";
    for (const MechanismRun& run : runs) {
        const char* label = mechanism_label(run.mechanism);
        for (std::size_t i = 0; i < run.rounds.size(); ++i) {
            const RoundOutcome& r = run.rounds[i];
            const double mean_completion = r.attendees > 0 ? r.sum_completion_s / r.attendees : 0.0;
            const double failure = r.attendees > 0 ? static_cast<double>(r.compensated) / r.attendees : 0.0;
            out << label << ',' << i << ',' << r.attendees << ',' << r.served_edge << ','
                << r.served_cloud << ',' << r.compensated << ',' << (r.bought_backup ? 1 : 0) << ','
                << r.other_demand << ',' << detail::format_double(r.user_total_utility) << ','
                << detail::format_double(r.edge_utility) << ','
                << detail::format_double(r.cloud_utility) << ','
                << detail::format_double(r.usage_rate) << ','
                << detail::format_double(mean_completion) << ','
                << detail::format_double(failure) << ','
                << detail::format_double(run.overbooking_rate) << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// Experiment driver.

struct ExperimentRequest {
    std::vector<Mechanism> mechanisms = {Mechanism::OATF, Mechanism::CBooking,
                                         Mechanism::SpotUniform, Mechanism::SpotDifferential};
    int n_rounds = 5000;
    std::optional<std::uint64_t> seed_override;
    // Preloaded contracts skip negotiation for the matching mode.
    std::optional<ContractPair> oatf_contracts;
    std::optional<ContractPair> cbooking_contracts;
};

struct ExperimentResult {
    SimulationConfig config;
    std::uint64_t seed = 0;
    std::optional<NegotiationResult> oatf;
    std::optional<NegotiationResult> cbooking;
    std::vector<MechanismRun> runs;
    std::vector<MechanismSummary> summaries;
};

inline bool wants(const std::vector<Mechanism>& ms, Mechanism m) {
    for (Mechanism x : ms) {
        if (x == m) return true;
    }
    return false;
}

inline ExperimentResult run_experiment(const SimulationConfig& cfg, const ExperimentRequest& req) {
    validate(cfg);
    if (req.n_rounds < 1) throw ConfigError("rounds must be >= 1");
    if (req.mechanisms.empty()) throw ConfigError("no mechanisms requested");

    ExperimentResult res;
    res.config = cfg;
    res.seed = req.seed_override ? *req.seed_override : cfg.market.rng_seed;

    const bool spot_requested = wants(req.mechanisms, Mechanism::SpotUniform) ||
                                wants(req.mechanisms, Mechanism::SpotDifferential);
    const QuotationGrid grid = default_quotation_grid();
    if (wants(req.mechanisms, Mechanism::OATF) || spot_requested) {
        if (req.oatf_contracts) {
            res.oatf = NegotiationResult{*req.oatf_contracts, NegotiationStats{}};
        } else {
            res.oatf = negotiate(grid, Mode::OATF, cfg);
        }
    }
    if (wants(req.mechanisms, Mechanism::CBooking)) {
        if (req.cbooking_contracts) {
            res.cbooking = NegotiationResult{*req.cbooking_contracts, NegotiationStats{}};
        } else {
            res.cbooking = negotiate(grid, Mode::CBooking, cfg);
        }
    }

    for (Mechanism m : req.mechanisms) {
        MechanismRun run;
        run.mechanism = m;
        if (m == Mechanism::OATF) {
            run.overbooking_rate = overbooking_rate(res.oatf->winner.edge, res.oatf->winner.cloud, cfg.market);
        } else if (m == Mechanism::CBooking) {
            run.overbooking_rate =
                overbooking_rate(res.cbooking->winner.edge, res.cbooking->winner.cloud, cfg.market);
        }
        run.rounds.reserve(static_cast<std::size_t>(req.n_rounds));
        res.runs.push_back(std::move(run));
    }

    std::optional<SpotTerms> spot_terms;
    if (spot_requested) spot_terms = make_spot_terms(res.oatf->winner.edge, cfg);

    // One sample per round index, replayed by every mechanism, so comparisons
    // are paired: mechanism differences are never sampling differences.
    StreamFamily streams(res.seed);
    for (int i = 0; i < req.n_rounds; ++i) {
        RngStream rng = streams.substream(stream_kind::campaign_round, static_cast<std::uint64_t>(i));
        const RoundSample sample = sample_round(cfg.market, rng);
        for (MechanismRun& run : res.runs) {
            switch (run.mechanism) {
            case Mechanism::OATF:
                run.rounds.push_back(run_round(sample, res.oatf->winner.edge, res.oatf->winner.cloud, cfg));
                break;
            case Mechanism::CBooking:
                run.rounds.push_back(
                    run_round(sample, res.cbooking->winner.edge, res.cbooking->winner.cloud, cfg));
                break;
            case Mechanism::SpotUniform:
                run.rounds.push_back(spot_round(sample, *spot_terms, SpotPricing::Uniform, cfg));
                break;
            case Mechanism::SpotDifferential:
                run.rounds.push_back(spot_round(sample, *spot_terms, SpotPricing::Differential, cfg));
                break;
            }
        }
    }

    res.summaries.reserve(res.runs.size());
    for (const MechanismRun& run : res.runs) res.summaries.push_back(aggregate(run));
    return res;
}

// ---------------------------------------------------------------------------
// Summary writers.

inline void write_contract_block(std::ostream& out, const char* name, const NegotiationResult& nr) {
    out << "[" << name << " contracts]\n";
    std::istringstream lines(serialize_contract_pair(nr.winner));
    std::string line;
    while (std::getline(lines, line)) out << "  " << line << "\n";
    out << "  candidates_evaluated = " << nr.stats.candidates_evaluated << "\n";
    out << "  feasible_candidates = " << nr.stats.feasible_candidates << "\n";
}

inline void write_summary_text(std::ostream& out, const ExperimentResult& res) {
    out << "trading campaign summary\n";
    out << "rounds = " << (res.runs.empty() ? 0 : static_cast<long long>(res.runs.front().rounds.size()))
        << "\n";
    out << "seed = " << res.seed << "\n";
    out << "\n";
    if (res.oatf) write_contract_block(out, "oatf", *res.oatf);
    if (res.cbooking) write_contract_block(out, "cbooking", *res.cbooking);
    out << "\n";
    for (const MechanismSummary& s : res.summaries) {
        out << "[" << mechanism_label(s.mechanism) << "]\n";
        out << "  rounds = " << s.rounds << "\n";
        out << "  total_attendees = " << s.total_attendees << "\n";
        out << "  total_served_edge = " << s.total_served_edge << "\n";
        out << "  total_served_cloud = " << s.total_served_cloud << "\n";
        out << "  total_failed = " << s.total_failed << "\n";
        out << "  rounds_with_failure = " << s.rounds_with_failure << "\n";
        out << "  failure_rate = " << detail::format_double(s.failure_rate) << "\n";
        out << "  mean_user_total_utility = " << detail::format_double(s.mean_user_total_utility) << "\n";
        out << "  mean_edge_utility = " << detail::format_double(s.mean_edge_utility) << "\n";
        out << "  mean_cloud_utility = " << detail::format_double(s.mean_cloud_utility) << "\n";
        out << "  mean_usage_rate = " << detail::format_double(s.mean_usage_rate) << "\n";
        out << "  mean_completion_s = " << detail::format_double(s.mean_completion_s) << "\n";
        out << "  overbooking_rate = " << detail::format_double(s.overbooking_rate) << "\n";
    }
}

inline nlohmann::ordered_json contract_pair_json(const ContractPair& p) {
    nlohmann::ordered_json j;
    j["edge"] = {{"reserved_per_user", p.edge.reserved_per_user},
                 {"price_user_to_edge", p.edge.price_user_to_edge},
                 {"penalty_user_to_edge", p.edge.penalty_user_to_edge},
                 {"compensation_edge_to_user", p.edge.compensation_edge_to_user}};
    j["cloud"] = {{"backup_slots", p.cloud.backup_slots},
                  {"price_edge_to_cloud", p.cloud.price_edge_to_cloud},
                  {"penalty_edge_to_cloud", p.cloud.penalty_edge_to_cloud}};
    j["expected"] = {{"user_total", p.expected_user_total},
                     {"edge", p.expected_edge},
                     {"cloud", p.expected_cloud}};
    j["risk"] = {{"user_negative", p.risk.user_negative},
                 {"user_unserved", p.risk.user_unserved},
                 {"edge_below_expectation", p.risk.edge_below_expectation},
                 {"edge_underutilization", p.risk.edge_underutilization},
                 {"cloud_below_expectation", p.risk.cloud_below_expectation},
                 {"satisfied", p.risk.satisfied}};
    return j;
}

inline nlohmann::ordered_json summary_json(const ExperimentResult& res) {
    nlohmann::ordered_json j;
    j["schema"] = "oatf-summary/1";
    j["rounds"] = res.runs.empty() ? 0 : static_cast<long long>(res.runs.front().rounds.size());
    j["seed"] = res.seed;
    nlohmann::ordered_json contracts = nlohmann::ordered_json::object();
    if (res.oatf) contracts["oatf"] = contract_pair_json(res.oatf->winner);
    if (res.cbooking) contracts["cbooking"] = contract_pair_json(res.cbooking->winner);
    j["contracts"] = contracts;
    nlohmann::ordered_json mechs = nlohmann::ordered_json::array();
    for (const MechanismSummary& s : res.summaries) {
        nlohmann::ordered_json m;
        m["mechanism"] = mechanism_label(s.mechanism);
        m["rounds"] = s.rounds;
        m["total_attendees"] = s.total_attendees;
        m["total_served_edge"] = s.total_served_edge;
        m["total_served_cloud"] = s.total_served_cloud;
        m["total_failed"] = s.total_failed;
        m["rounds_with_failure"] = s.rounds_with_failure;
        m["failure_rate"] = s.failure_rate;
        m["mean_user_total_utility"] = s.mean_user_total_utility;
        m["mean_edge_utility"] = s.mean_edge_utility;
        m["mean_cloud_utility"] = s.mean_cloud_utility;
        m["mean_usage_rate"] = s.mean_usage_rate;
        m["mean_completion_s"] = s.mean_completion_s;
        m["overbooking_rate"] = s.overbooking_rate;
        mechs.push_back(std::move(m));
    }
    j["mechanisms"] = mechs;
    return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failed for '" + path + "'");
    return buf.str();
}

inline void write_experiment_files(const ExperimentResult& res, const std::string& out_dir) {
    std::ostringstream csv;
    write_rounds_csv(csv, res.runs);
    write_text_file(out_dir + "/rounds.csv", csv.str());
    std::ostringstream txt;
    write_summary_text(txt, res);
    write_text_file(out_dir + "/summary.txt", txt.str());
    write_text_file(out_dir + "/summary.json", summary_json(res).dump(2) + "\n");
}

inline void save_contract_file(const std::string& path, const ContractPair& p) {
    write_text_file(path, serialize_contract_pair(p));
}

inline ContractPair load_contract_file(const std::string& path) {
    try {
        return parse_contract_pair(read_text_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

} // namespace oatf
