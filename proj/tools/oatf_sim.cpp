// Command-line front end for the forward-market simulator.
//
// oatf_sim negotiate  settle contracts for one mode and print or save them
// oatf_sim run        negotiate (or load contracts), replay a trading
//                     campaign, and write rounds.csv / summary.txt /
//                     summary.json into the output directory
// oatf_sim config     print the stock configuration as a config file
//
// Exit codes: 0 success, 2 configuration problem, 3 no feasible contract,
// 4 file I/O failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oatf/oatf.hpp"

namespace {

oatf::SimulationConfig load_or_stock(const std::string& config_path) {
    if (config_path.empty()) return oatf::stock_config();
    return oatf::load_config_file(config_path);
}

std::vector<oatf::Mechanism> parse_mechanism_list(const std::string& csv) {
    std::vector<oatf::Mechanism> out;
    std::string::size_type pos = 0;
    while (pos <= csv.size()) {
        const std::string::size_type comma = csv.find(',', pos);
        const std::string name = csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (name.empty()) throw oatf::ConfigError("empty mechanism name in '" + csv + "'");
        out.push_back(oatf::parse_mechanism(name));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

int run_negotiate(const std::string& config_path, const std::string& mode_name,
                  const std::string& out_path, std::int64_t mc_certify) {
    const oatf::SimulationConfig cfg = load_or_stock(config_path);
    oatf::validate(cfg);
    const oatf::Mode mode = mode_name == "cbooking" ? oatf::Mode::CBooking : oatf::Mode::OATF;
    const oatf::NegotiationResult result = oatf::negotiate(oatf::default_quotation_grid(), mode, cfg);
    std::cout << "mode = " << oatf::mode_name(mode) << "\n"
              << "candidates_evaluated = " << result.stats.candidates_evaluated << "\n"
              << "feasible_candidates = " << result.stats.feasible_candidates << "\n"
              << oatf::serialize_contract_pair(result.winner);
    if (mc_certify > 0) {
        oatf::StreamFamily streams(cfg.market.rng_seed);
        const oatf::RiskReport mc = oatf::certify_mc(result.winner.edge, result.winner.cloud, cfg.profile,
                                                     cfg.cloud_state, cfg.market, mc_certify, streams);
        std::cout << "mc.samples = " << mc_certify << "\n"
                  << "mc.user_negative = " << oatf::detail::format_double(mc.user_negative) << "\n"
                  << "mc.user_unserved = " << oatf::detail::format_double(mc.user_unserved) << "\n"
                  << "mc.edge_below_expectation = "
                  << oatf::detail::format_double(mc.edge_below_expectation) << "\n"
                  << "mc.edge_underutilization = "
                  << oatf::detail::format_double(mc.edge_underutilization) << "\n"
                  << "mc.cloud_below_expectation = "
                  << oatf::detail::format_double(mc.cloud_below_expectation) << "\n";
    }
    if (!out_path.empty()) oatf::save_contract_file(out_path, result.winner);
    return 0;
}

int run_campaign_cmd(const std::string& config_path, const std::string& mechanisms_csv, int rounds,
                     std::int64_t seed, const std::string& out_dir, const std::string& load_oatf,
                     const std::string& load_cbooking, const std::string& save_dir) {
    const oatf::SimulationConfig cfg = load_or_stock(config_path);
    oatf::ExperimentRequest req;
    if (!mechanisms_csv.empty()) req.mechanisms = parse_mechanism_list(mechanisms_csv);
    req.n_rounds = rounds;
    if (seed >= 0) req.seed_override = static_cast<std::uint64_t>(seed);
    if (!load_oatf.empty()) req.oatf_contracts = oatf::load_contract_file(load_oatf);
    if (!load_cbooking.empty()) req.cbooking_contracts = oatf::load_contract_file(load_cbooking);
    const oatf::ExperimentResult res = oatf::run_experiment(cfg, req);
    oatf::write_experiment_files(res, out_dir);
    if (!save_dir.empty()) {
        if (res.oatf) oatf::save_contract_file(save_dir + "/contracts_oatf.txt", res.oatf->winner);
        if (res.cbooking) {
            oatf::save_contract_file(save_dir + "/contracts_cbooking.txt", res.cbooking->winner);
        }
    }
    for (const oatf::MechanismSummary& s : res.summaries) {
        std::cout << oatf::mechanism_label(s.mechanism)
                  << ": failure_rate=" << oatf::detail::format_double(s.failure_rate)
                  << " mean_usage=" << oatf::detail::format_double(s.mean_usage_rate)
                  << " mean_user_total=" << oatf::detail::format_double(s.mean_user_total_utility)
                  << " overbooking=" << oatf::detail::format_double(s.overbooking_rate) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"forward-market computing-resource trading simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string mode_name = "oatf";
    std::string out_path;
    std::int64_t mc_certify = 0;
    CLI::App* neg = app.add_subcommand("negotiate", "settle forward contracts for one mode");
    neg->add_option("--config", config_path, "config file (stock settings when omitted)");
    neg->add_option("--mode", mode_name, "oatf or cbooking")
        ->check(CLI::IsMember({"oatf", "cbooking"}));
    neg->add_option("--out", out_path, "write the settled contracts to this file");
    neg->add_option("--mc-certify", mc_certify, "re-certify risks with this many Monte Carlo samples");

    std::string run_config;
    std::string mechanisms_csv;
    int rounds = 5000;
    std::int64_t seed = -1;
    std::string out_dir = ".";
    std::string load_oatf, load_cbooking, save_dir;
    CLI::App* run = app.add_subcommand("run", "replay a trading campaign and write reports");
    run->add_option("--config", run_config, "config file (stock settings when omitted)");
    run->add_option("--mechanisms", mechanisms_csv,
                    "comma list of oatf,cbooking,spot_up,spot_dp (default: all)");
    run->add_option("--rounds", rounds, "trading rounds to replay")->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "override the config seed (non-negative)");
    run->add_option("--out", out_dir, "output directory for rounds.csv and summaries");
    run->add_option("--load-oatf", load_oatf, "reuse saved contracts instead of negotiating");
    run->add_option("--load-cbooking", load_cbooking, "reuse saved contracts instead of negotiating");
    run->add_option("--save-contracts", save_dir, "also save settled contracts into this directory");

    CLI::App* cfg_cmd = app.add_subcommand("config", "print the stock configuration");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cfg_cmd->parsed()) {
            std::cout << oatf::serialize_config(oatf::stock_config());
            return 0;
        }
        if (neg->parsed()) return run_negotiate(config_path, mode_name, out_path, mc_certify);
        return run_campaign_cmd(run_config, mechanisms_csv, rounds, seed, out_dir, load_oatf,
                                load_cbooking, save_dir);
    } catch (const oatf::NoFeasibleContract& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const oatf::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const oatf::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
