#pragma once

// Scenario execution: figure-data regeneration, parameter tables, sweeps,
// and the verification suite behind the CLI.

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "magnomech/config.hpp"
#include "magnomech/engine.hpp"

namespace magnomech {

enum class ScenarioId {
    table1,
    fig2a,
    fig2b,
    fig2c,
    fig2d,
    fig2e,
    fig3a,
    fig3b,
    fig3c,
    figA1,
    verify
};

ScenarioId scenario_id_from_string(const std::string& s);
std::string scenario_id_to_string(ScenarioId id);

struct ScenarioConfig {
    ScenarioId id = ScenarioId::table1;
    std::string out_dir = "out";

    // Device / bath inputs (canonical defaults; all rad/s, K, dimensionless).
    double omega_x, omega_K, g, lambda;
    double temperature, Q_x, gamma_s, gamma_z;
    double r_p;

    // Dispersive-frame specification in units of g_r (tripartite scenarios).
    double ds_over_gr = 0.0, dK_over_gr = 0.0, dNV_over_gr = 0.0;

    int n_phonon = 6, n_magnon = 6;
    bool rwa = false;
    bool svr = false;
    double r_e = 0.0, theta_e = 0.0;
    bool strict_two_phonon = false;
    bool excite_magnon = false;  // put the seed excitation in the magnon instead

    double t_end = 0.0;  // s; 0 = scenario default
    int max_rows = 2000;
    bool convergence_gate = true;
    double gate_tol = 1e-3;
    double gate_horizon_frac = 1.0;

    std::vector<double> sweep_gamma_s;  // rad/s
    std::vector<double> sweep_Q_x;

    int threads = 0;  // 0 = leave OpenMP defaults
};

ScenarioConfig default_config(ScenarioId id);

// Applies a parsed config file on top of scenario defaults. Frequencies are
// given in Hz and multiplied by 2*pi unless `units.two_pi = false`.
void apply_config(ScenarioConfig& cfg, const ConfigFile& file);

struct ScenarioResult {
    int exit_code = 0;
    std::vector<std::string> files_written;
    std::map<std::string, double> metrics;
    std::map<std::string, TimeSeries> series;
    std::string summary;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg);

// Verification suite; prints one pass/fail line per check. Returns 0 on
// success, 3 on any failure.
int run_verify(std::ostream& out);

std::string params_report(const ScenarioConfig& cfg);

// Scientific notation with 9 significant digits (CSV cell format).
std::string format_sci(double v);

}  // namespace magnomech
