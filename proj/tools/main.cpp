// Command-line front end: params / run / sweep / verify.

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "magnomech/runner.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string scenario = "fig2d";
    std::string out_dir;
    bool rwa = false;
    std::vector<int> truncation;
    int threads = 0;
    long seed = 0;  // reserved; all scenarios are deterministic
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "TOML config file");
    cmd->add_option("--scenario", args.scenario, "scenario id (table1, fig2a..fig3c, figA1)");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_flag("--rwa", args.rwa, "drop fast-rotating Hamiltonian terms");
    cmd->add_option("--truncation", args.truncation, "phonon,magnon truncation")
        ->delimiter(',')
        ->expected(2);
    cmd->add_option("--threads", args.threads, "OpenMP threads (0 = default)");
    cmd->add_option("--seed", args.seed, "reserved for stochastic extensions");
}

magnomech::ScenarioConfig build_config(const CommonArgs& args, CLI::App* cmd) {
    using namespace magnomech;
    ScenarioConfig cfg = default_config(scenario_id_from_string(args.scenario));
    if (!args.config_path.empty()) {
        apply_config(cfg, ConfigFile::parse_file(args.config_path));
    }
    // Flags override both defaults and config-file values.
    if (cmd->count("--scenario")) {
        ScenarioConfig fresh = default_config(scenario_id_from_string(args.scenario));
        fresh.out_dir = cfg.out_dir;
        if (!args.config_path.empty()) {
            apply_config(fresh, ConfigFile::parse_file(args.config_path));
        }
        cfg = fresh;
        cfg.id = scenario_id_from_string(args.scenario);
    }
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (cmd->count("--rwa")) cfg.rwa = args.rwa;
    if (args.truncation.size() == 2) {
        if (args.truncation[0] < 2 || args.truncation[1] < 2) {
            throw ConfigError("--truncation: both dimensions must be >= 2");
        }
        cfg.n_phonon = args.truncation[0];
        cfg.n_magnon = args.truncation[1];
    }
    cfg.threads = args.threads;
    return cfg;
}

int dispatch(const magnomech::ScenarioConfig& cfg) {
    magnomech::ScenarioResult result = magnomech::run_scenario(cfg);
    for (const auto& f : result.files_written) std::cout << "wrote " << f << "\n";
    if (!result.summary.empty()) std::cout << result.summary;
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid magnon-phonon-spin simulator"};
    app.require_subcommand(1);

    CommonArgs params_args, run_args, sweep_args;
    CLI::App* params_cmd = app.add_subcommand("params", "derived-parameter report");
    add_common(params_cmd, params_args);
    CLI::App* run_cmd = app.add_subcommand("run", "run one scenario, write figure CSVs");
    add_common(run_cmd, run_args);
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "parameter sweep (fig3b/fig3c)");
    add_common(sweep_cmd, sweep_args);
    app.add_subcommand("verify", "built-in verification suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (params_cmd->parsed()) {
            magnomech::ScenarioConfig cfg = build_config(params_args, params_cmd);
            std::cout << params_report(cfg);
            return 0;
        }
        if (run_cmd->parsed()) {
            return dispatch(build_config(run_args, run_cmd));
        }
        if (sweep_cmd->parsed()) {
            magnomech::ScenarioConfig cfg = build_config(sweep_args, sweep_cmd);
            if (cfg.id != magnomech::ScenarioId::fig3b &&
                cfg.id != magnomech::ScenarioId::fig3c) {
                throw magnomech::ConfigError("sweep: scenario must be fig3b or fig3c");
            }
            return dispatch(cfg);
        }
        // verify
        return magnomech::run_verify(std::cout);
    } catch (const magnomech::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const magnomech::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
