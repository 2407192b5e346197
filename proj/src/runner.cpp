#include "magnomech/runner.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace magnomech {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

// Canonical device values (Appendix C table); dynamics scenarios pin the
// couplings to these rather than the first-principles formulas.
struct Canonical {
    static constexpr double omega_x = kTwoPi * 3.8e6;
    static constexpr double omega_K = kTwoPi * 2.35e9;
    static constexpr double omega_p = kTwoPi * 2.382e9;
    static constexpr double Omega_p = kTwoPi * 2.378e9;
    static constexpr double g = kTwoPi * 0.69e6;
    static constexpr double lambda = kTwoPi * 0.69e6;
    static constexpr double gamma_s = kTwoPi * 1.0e6;
    static constexpr double gamma_z = kTwoPi * 1.0e3;
    static constexpr double temperature = 0.01;
    static constexpr double Q_x = 1e8;
    static constexpr double r_p = 2.5;
    static constexpr double B_z = 0.084;
    static constexpr double mu0_Ms = 0.74;
    static constexpr double radius = 100e-9;
    static constexpr double b0 = 1e7;
    static constexpr double b1 = 4.5e7;
    static constexpr double magnet_mass = 2.17e-18;
    static constexpr double tip_mass = 2.24e-18;
    static constexpr double x_zpf_table = 2.69e-13;
    static constexpr double mass_table = 7.0e-18;
};

CantileverParams canonical_cantilever(double Q_x) {
    return {4e-6, 0.1e-6, 0.02e-6, 1.22e12, 3.52e3, Q_x, Canonical::magnet_mass,
            Canonical::tip_mass};
}

struct StepPlan {
    long steps;
    int stride;
    double dt;
};

StepPlan plan_steps(double t_end, double dt_max, int rows) {
    if (rows < 1) rows = 1;
    long blocks = static_cast<long>(std::ceil(t_end / (dt_max * rows) - 1e-12));
    if (blocks < 1) blocks = 1;
    long steps = blocks * rows;
    return {steps, static_cast<int>(blocks), t_end / static_cast<double>(steps)};
}

Op number_op(const SpaceLayout& layout, int slot) {
    Op a = embed(boson_annihilation(layout.factor(slot).dim), layout, slot);
    return Op(layout, a.matrix.adjoint() * a.matrix, true);
}

Op spin_population_op(const SpaceLayout& layout, int slot) {
    TwoLevelOps tlo = two_level_ops();
    Op sp = embed(tlo.sigma_plus, layout, slot);
    Op sm = embed(tlo.sigma_minus, layout, slot);
    return Op(layout, sp.matrix * sm.matrix, true);
}

void write_csv(ScenarioResult& result, const std::string& dir, const std::string& name,
               const std::string& header, const std::vector<std::vector<std::string>>& rows) {
    std::filesystem::create_directories(dir);
    std::string path = dir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    out << header << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << ",";
            out << row[i];
        }
        out << "\n";
    }
    result.files_written.push_back(path);
}

double series_max_diff(const TimeSeries& a, size_t obs_a, const TimeSeries& b, size_t obs_b,
                       double t_max) {
    // Compare only samples the two grids share: with different strides the
    // nearest-neighbour time offset alone reads as a spurious shift on
    // fast-oscillating observables.
    double align_tol = 1e-6 * t_max;
    double d = 0.0;
    for (size_t i = 0; i < a.times.size(); ++i) {
        if (a.times[i] > t_max) break;
        int j = b.find_index(a.times[i]);
        if (std::abs(b.times[static_cast<size_t>(j)] - a.times[i]) > align_tol) continue;
        d = std::max(d, std::abs(a.values[obs_a][i] -
                                 b.values[obs_b][static_cast<size_t>(j)]));
    }
    return d;
}

FrameParams resonance_frame(const ScenarioConfig& cfg) {
    FrameInputs in{};
    in.omega_x = cfg.omega_x;
    in.omega_K = cfg.omega_K;
    in.g = cfg.g;
    in.lambda = cfg.lambda;
    in.temperature = cfg.temperature;
    in.Q_x = cfg.Q_x;
    in.gamma_s = cfg.gamma_s;
    in.resonance_r_p = cfg.r_p;
    return frame_params(in);
}

FrameParams dispersive_frame(const ScenarioConfig& cfg) {
    double g_r = cfg.g * std::cosh(cfg.r_p);
    DetuningFrameInputs in{};
    in.r_p = cfg.r_p;
    in.Delta_s = cfg.ds_over_gr * g_r;
    in.Delta_K = cfg.dK_over_gr * g_r;
    in.Delta_NV = cfg.dNV_over_gr * g_r;
    in.g = cfg.g;
    in.lambda = cfg.lambda;
    in.omega_x = cfg.omega_x;
    in.temperature = cfg.temperature;
    in.Q_x = cfg.Q_x;
    in.gamma_s = cfg.gamma_s;
    return frame_from_detunings(in);
}

struct GateOutcome {
    bool ran = false;
    double max_shift = 0.0;
};

void record_gate(ScenarioResult& result, const ScenarioConfig& cfg, const GateOutcome& gate,
                 std::ostringstream& summary) {
    if (!gate.ran) return;
    result.metrics["gate_max_shift"] = gate.max_shift;
    summary << "convergence gate (+2,+2): max observable shift " << format_sci(gate.max_shift)
            << (gate.max_shift < cfg.gate_tol ? " PASS" : " FAIL") << "\n";
    if (gate.max_shift >= cfg.gate_tol) result.exit_code = 4;
}

// ---------------------------------------------------------------- table1

void run_table1(const ScenarioConfig& cfg, ScenarioResult& result) {
    struct Row {
        std::string symbol;
        double derived;
        double paper;
        bool discrepancy;
    };
    std::vector<Row> rows;

    CantileverParams cant = canonical_cantilever(cfg.Q_x);
    double wx_derived = cantilever_frequency(cant);
    double beam_mass = cant.mass_density * cant.length * cant.width * cant.thickness / 4.0;
    double m_eff = effective_mass(cant);
    double x_zpf = zero_point_motion(m_eff, Canonical::omega_x);
    double volume = sphere_volume(Canonical::radius);
    double m_kittel =
        kittel_zero_point_magnetization(Canonical::mu0_Ms / Constants::mu_0, volume);
    PumpSolution pump = resonance_pump(Canonical::omega_x, Canonical::omega_K, Canonical::r_p);
    double r_p_check =
        squeezing_parameter(Canonical::Omega_p, Canonical::omega_x - Canonical::omega_p);
    double g_formula = magnon_mechanical_coupling(Canonical::b0, Canonical::x_zpf_table,
                                                  m_kittel, volume);
    double lambda_formula = spin_mechanical_coupling(Canonical::b1, Canonical::x_zpf_table);
    SpinParams spin{};
    double w_nv = nv_frequency(Canonical::B_z, spin.zfs);
    double w_kittel = Constants::gamma_gyro * Canonical::B_z;

    rows.push_back({"omega_x", wx_derived, Canonical::omega_x, false});
    rows.push_back({"Q_x", cfg.Q_x, Canonical::Q_x, false});
    rows.push_back({"gamma_x", Canonical::omega_x / cfg.Q_x, kTwoPi * 0.038, false});
    rows.push_back(
        {"nbar_x", thermal_occupation(Canonical::omega_x, cfg.temperature), 55.0, false});
    rows.push_back({"M", beam_mass, Canonical::mass_table, false});
    rows.push_back({"x_zpf", x_zpf, Canonical::x_zpf_table, true});
    rows.push_back({"omega_p", pump.omega_p, Canonical::omega_p, false});
    rows.push_back({"Omega_p", pump.Omega_p, Canonical::Omega_p, false});
    rows.push_back({"r_p", r_p_check, Canonical::r_p, false});
    rows.push_back({"omega_K", w_kittel, Canonical::omega_K, false});
    rows.push_back({"gamma_s", cfg.gamma_s, Canonical::gamma_s, false});
    rows.push_back(
        {"nbar_s", thermal_occupation(Canonical::omega_K, cfg.temperature), 1.3e-5, false});
    rows.push_back({"T", cfg.temperature, Canonical::temperature, false});
    rows.push_back({"R", Canonical::radius, 100e-9, false});
    rows.push_back({"V", volume, 4.2e-21, false});
    rows.push_back({"M_m", Canonical::magnet_mass, 2.17e-18, false});
    rows.push_back({"M_t", Canonical::tip_mass, 2.24e-18, false});
    rows.push_back({"omega_NV", w_nv, kTwoPi * 2.35e9, true});
    rows.push_back({"gamma_z", cfg.gamma_z, Canonical::gamma_z, false});
    rows.push_back({"b0", Canonical::b0, 1e7, false});
    rows.push_back({"b1", Canonical::b1, 4.5e7, false});
    rows.push_back({"B_z", Canonical::B_z, 0.084, false});
    rows.push_back({"g", g_formula, Canonical::g, true});
    rows.push_back({"lambda", lambda_formula, Canonical::lambda, true});

    std::vector<std::vector<std::string>> csv;
    std::ostringstream summary;
    for (const auto& r : rows) {
        double ratio = r.derived / r.paper;
        csv.push_back({r.symbol, format_sci(r.derived), format_sci(r.paper), format_sci(ratio)});
        result.metrics["table1." + r.symbol] = r.derived;
        result.metrics["table1." + r.symbol + "_ratio"] = ratio;
        if (r.discrepancy) {
            summary << r.symbol << ": formula/value ratio " << format_sci(ratio)
                    << " -- documented discrepancy (formula-vs-table convention gap; "
                       "dynamics use the table value)\n";
        }
    }
    write_csv(result, cfg.out_dir, "table1.csv", "symbol,derived_value,paper_value,ratio", csv);
    result.summary = summary.str();
}

// ---------------------------------------------------------------- fig2a-c, figA1

void run_fig2a(const ScenarioConfig& cfg, ScenarioResult& result) {
    std::vector<std::vector<std::string>> csv;
    double crossing = -1.0;
    for (int i = 0; i <= 500; ++i) {
        double r_p = 0.005 * i;
        double g_r = cfg.g * std::cosh(r_p);
        double ratio = g_r / cfg.gamma_s;
        std::string regime;
        if (r_p < 5e-4) {
            regime = ratio > 1.0 ? "SCR" : "WCR";
        } else {
            ScenarioConfig point = cfg;
            point.r_p = r_p;
            regime = regime_name(regime_classify(resonance_frame(point), cfg.gamma_s).regime);
        }
        if (crossing < 0.0 && ratio > 1.0) crossing = r_p;
        csv.push_back({format_sci(r_p), format_sci(ratio), regime});
    }
    write_csv(result, cfg.out_dir, "fig2a.csv", "r_p,g_r_over_gamma_s,regime", csv);
    result.metrics["scr_crossing_r_p"] = crossing;

    // UCR onset under resonance-constrained pumping.
    double ucr = -1.0;
    for (int i = 1; i <= 600; ++i) {
        double r_p = 0.005 * i;
        ScenarioConfig point = cfg;
        point.r_p = r_p;
        RegimeReport rep = regime_classify(resonance_frame(point), cfg.gamma_s);
        if (rep.g_over_Delta_s > 0.1) {
            ucr = r_p;
            break;
        }
    }
    result.metrics["ucr_crossing_r_p"] = ucr;
    std::ostringstream summary;
    summary << "SCR onset r_p = " << format_sci(crossing) << ", UCR onset r_p = "
            << format_sci(ucr) << "\n";
    result.summary = summary.str();
}

void run_fig2b(const ScenarioConfig& cfg, ScenarioResult& result) {
    std::vector<std::vector<std::string>> csv;
    double nbar_x = thermal_occupation(cfg.omega_x, cfg.temperature);
    double rp = cfg.r_p;
    double g_r = cfg.g * std::cosh(rp);
    double sh = std::sinh(rp);
    double nbar_amp = nbar_x * std::cosh(2.0 * rp) + sh * sh;
    for (int i = 0; i <= 60; ++i) {
        double q = 1e5 * std::pow(10.0, 3.0 * i / 60.0);
        double gamma_x = cfg.omega_x / q;
        double c0 = cooperativity(cfg.g, gamma_x, cfg.gamma_s, nbar_x);
        double cr = cooperativity(g_r, gamma_x, cfg.gamma_s, nbar_amp);
        csv.push_back({format_sci(q), format_sci(c0), format_sci(cr)});
    }
    write_csv(result, cfg.out_dir, "fig2b.csv", "Q_x,C_r_rp0,C_r_rp2.5", csv);
    double gx5 = cfg.omega_x / 1e5;
    result.metrics["C_rp0_Q1e5"] = cooperativity(cfg.g, gx5, cfg.gamma_s, nbar_x);
    result.metrics["C_ratio_rp_Q1e5"] =
        cooperativity(g_r, gx5, cfg.gamma_s, nbar_amp) /
        cooperativity(cfg.g, gx5, cfg.gamma_s, nbar_x);
}

void run_fig2c(const ScenarioConfig& cfg, ScenarioResult& result) {
    (void)cfg;
    std::vector<std::vector<std::string>> csv;
    for (int i = 0; i <= 300; ++i) {
        double r_p = 0.01 * i;
        double ch = std::cosh(r_p);
        csv.push_back({format_sci(r_p), format_sci(ch), format_sci(ch * ch)});
    }
    write_csv(result, cfg.out_dir, "fig2c.csv", "r_p,g_r_over_g,C_prime_over_C", csv);
}

void run_figA1(const ScenarioConfig& cfg, ScenarioResult& result) {
    std::vector<std::vector<std::string>> csv;
    double min_at_25 = 0.0, min_at_30 = 0.0, crossing = -1.0;
    double prev_min = 1e300;
    for (int i = 10; i <= 600; ++i) {
        double r_p = 0.005 * i;
        ScenarioConfig point = cfg;
        point.r_p = r_p;
        RwaRatios rr = rwa_ratios(resonance_frame(point));
        csv.push_back({format_sci(r_p), format_sci(rr.two_delta_s), format_sci(rr.pump_plus_ds),
                       format_sci(rr.two_pump)});
        double m = rr.min_ratio();
        if (std::abs(r_p - 2.5) < 1e-9) min_at_25 = m;
        if (std::abs(r_p - 3.0) < 1e-9) min_at_30 = m;
        if (crossing < 0.0 && prev_min >= 10.0 && m < 10.0) crossing = r_p;
        prev_min = m;
    }
    write_csv(result, cfg.out_dir, "figA1.csv", "r_p,ratio_2ds,ratio_wp_ds,ratio_2wp", csv);
    result.metrics["min_ratio_rp2.5"] = min_at_25;
    result.metrics["min_ratio_rp3.0"] = min_at_30;
    result.metrics["rwa_crossing_r_p"] = crossing;
}

// ---------------------------------------------------------------- fig2d/e

TimeSeries run_bipartite(const FrameParams& fp, int n_phonon, int n_magnon, bool jc,
                         const BathOptions& baths, double t_end, double dt_max, int rows,
                         bool excite_magnon) {
    SpaceLayout layout = SpaceLayout::phonon_magnon(n_phonon, n_magnon);
    TimeDependentHamiltonian h =
        jc ? build_mm_jc(fp, layout) : build_mm_squeezed(fp, layout);
    std::vector<DissipatorSpec> diss = build_dissipators(fp, layout, baths);
    State rho0 = State::fock(layout, excite_magnon ? std::vector<int>{0, 1}
                                                   : std::vector<int>{1, 0});
    StepPlan plan = plan_steps(t_end, dt_max, rows);
    IntegratorConfig ic;
    ic.dt = plan.dt;
    ic.t_end = t_end;
    ic.sample_stride = plan.stride;
    ic.eig_check_stride = std::max(1, rows / 8);
    std::vector<Op> obs = {number_op(layout, 0), number_op(layout, 1)};
    return evolve(rho0, h, diss, ic, obs, {"n_phonon", "n_magnon"});
}

void run_fig2d(const ScenarioConfig& cfg, ScenarioResult& result) {
    FrameParams fp = resonance_frame(cfg);
    double t_end = cfg.t_end > 0.0 ? cfg.t_end : 0.6e-6;
    double dt_fast = kTwoPi / (40.0 * 2.0 * fp.omega_p);
    double rabi = kTwoPi / (2.0 * fp.g_r);  // pi/g_r swap period
    BathOptions baths{};

    TimeSeries full = run_bipartite(fp, cfg.n_phonon, cfg.n_magnon, false, baths, t_end,
                                    dt_fast, cfg.max_rows, cfg.excite_magnon);
    TimeSeries eff = run_bipartite(fp, cfg.n_phonon, cfg.n_magnon, true, baths, t_end,
                                   rabi / 2000.0, cfg.max_rows, cfg.excite_magnon);

    GateOutcome gate;
    if (cfg.convergence_gate) {
        double tg = t_end * cfg.gate_horizon_frac;
        TimeSeries refined = run_bipartite(fp, cfg.n_phonon + 2, cfg.n_magnon + 2, false, baths,
                                           tg, dt_fast, cfg.max_rows, cfg.excite_magnon);
        gate.ran = true;
        for (size_t k = 0; k < 2; ++k) {
            gate.max_shift =
                std::max(gate.max_shift, series_max_diff(refined, k, full, k, tg));
        }
    }

    std::vector<std::vector<std::string>> csv;
    for (size_t i = 0; i < full.times.size(); ++i) {
        int j = eff.find_index(full.times[i]);
        csv.push_back({format_sci(full.times[i]), format_sci(full.values[0][i]),
                       format_sci(full.values[1][i]),
                       format_sci(eff.values[0][static_cast<size_t>(j)]),
                       format_sci(eff.values[1][static_cast<size_t>(j)])});
    }
    write_csv(result, cfg.out_dir, "fig2d.csv",
              "t_s,n_phonon,n_magnon,n_phonon_eff,n_magnon_eff", csv);

    double diff = std::max(series_max_diff(full, 0, eff, 0, 2.0 * rabi),
                           series_max_diff(full, 1, eff, 1, 2.0 * rabi));
    result.metrics["max_full_eff_diff"] = diff;

    // Deepest phonon minimum within the first swap period; immune to the
    // small counter-rotating ripple that confuses naive extremum detection.
    size_t arg_min = 0;
    for (size_t i = 1; i < full.times.size() && full.times[i] <= rabi; ++i) {
        if (full.values[0][i] < full.values[0][arg_min]) arg_min = i;
    }
    result.metrics["first_swap_time"] = full.times[arg_min];
    result.metrics["expected_swap_time"] = 0.5 * rabi;
    // Count completed swap cycles as prominent local maxima of n_magnon.
    // The magnon decay shrinks successive peaks, so an absolute-level
    // threshold undercounts; a light moving average removes the 2 omega_p
    // ripple before peak detection.
    const std::vector<double>& nm = full.values[1];
    size_t n = nm.size();
    std::vector<double> smooth(n, 0.0);
    const size_t half_w = 7;
    for (size_t i = 0; i < n; ++i) {
        size_t lo = i > half_w ? i - half_w : 0;
        size_t hi = std::min(n - 1, i + half_w);
        double acc = 0.0;
        for (size_t j = lo; j <= hi; ++j) acc += nm[j];
        smooth[i] = acc / static_cast<double>(hi - lo + 1);
    }
    int peaks = 0;
    const size_t guard = std::max<size_t>(2, n / 20);  // << swap period spacing
    for (size_t i = guard; i + guard < n; ++i) {
        if (smooth[i] < 0.02) continue;
        bool is_peak = true;
        for (size_t j = i - guard; j <= i + guard && is_peak; ++j) {
            if (smooth[j] > smooth[i]) is_peak = false;
        }
        if (is_peak) {
            ++peaks;
            i += guard;
        }
    }
    result.metrics["n_magnon_peaks"] = static_cast<double>(peaks);
    result.metrics["trace_drift"] = full.trace_drift;
    result.metrics["min_eigenvalue"] = full.min_eigenvalue;

    std::ostringstream summary;
    summary << "full-vs-effective max |diff| over two swap periods: " << format_sci(diff) << "\n"
            << "first phonon minimum at " << format_sci(result.metrics["first_swap_time"])
            << " s (pi/2g_r = " << format_sci(0.5 * rabi) << " s)\n"
            << "magnon swap peaks: " << result.metrics["n_magnon_peaks"] << "\n";
    record_gate(result, cfg, gate, summary);
    result.summary += summary.str();
    result.series["full"] = std::move(full);
    result.series["eff"] = std::move(eff);
}

void run_fig2e(const ScenarioConfig& cfg, ScenarioResult& result) {
    double t_end = cfg.t_end > 0.0 ? cfg.t_end : 0.15e-6;

    ScenarioConfig ref_cfg = cfg;
    ref_cfg.Q_x = 1e8;
    FrameParams fp_ref = resonance_frame(ref_cfg);
    ScenarioConfig low_cfg = cfg;
    low_cfg.Q_x = 1e3;
    FrameParams fp_low = resonance_frame(low_cfg);

    double dt_fast = kTwoPi / (40.0 * 2.0 * fp_ref.omega_p);
    double rabi = kTwoPi / (2.0 * fp_ref.g_r);

    BathOptions plain{};
    BathOptions matched{};
    matched.svr = {{fp_low.r_p, 3.14159265358979323846}};

    TimeSeries ref = run_bipartite(fp_ref, cfg.n_phonon, cfg.n_magnon, false, plain, t_end,
                                   dt_fast, cfg.max_rows, cfg.excite_magnon);
    TimeSeries svr = run_bipartite(fp_low, cfg.n_phonon, cfg.n_magnon, false, matched, t_end,
                                   dt_fast, cfg.max_rows, cfg.excite_magnon);
    // The unprotected low-Q branch heats toward the amplified occupation,
    // far beyond any reachable Fock basis (explicit integration of the
    // truncated density matrix is pseudospectrally unstable there). The
    // dynamics are bilinear, so the closed second-moment equations give the
    // occupations exactly with no truncation at all.
    StepPlan hot_plan = plan_steps(t_end, dt_fast, cfg.max_rows);
    TimeSeries nosvr = evolve_bipartite_moments(fp_low, plain, cfg.excite_magnon, t_end,
                                                hot_plan.dt, hot_plan.stride);

    GateOutcome gate;
    if (cfg.convergence_gate) {
        double tg = t_end * cfg.gate_horizon_frac;
        TimeSeries ref2 = run_bipartite(fp_ref, cfg.n_phonon + 2, cfg.n_magnon + 2, false,
                                        plain, tg, dt_fast, cfg.max_rows, cfg.excite_magnon);
        TimeSeries svr2 = run_bipartite(fp_low, cfg.n_phonon + 2, cfg.n_magnon + 2, false,
                                        matched, tg, dt_fast, cfg.max_rows, cfg.excite_magnon);
        TimeSeries nosvr2 = evolve_bipartite_moments(fp_low, plain, cfg.excite_magnon, t_end,
                                                     0.5 * hot_plan.dt, 2 * hot_plan.stride);
        gate.ran = true;
        for (size_t k = 0; k < 2; ++k) {
            gate.max_shift = std::max(gate.max_shift, series_max_diff(ref2, k, ref, k, tg));
            gate.max_shift = std::max(gate.max_shift, series_max_diff(svr2, k, svr, k, tg));
            gate.max_shift =
                std::max(gate.max_shift, series_max_diff(nosvr2, k, nosvr, k, tg));
        }
    }

    auto emit = [&](const std::string& name, const TimeSeries& ts) {
        std::vector<std::vector<std::string>> csv;
        for (size_t i = 0; i < ts.times.size(); ++i) {
            csv.push_back({format_sci(ts.times[i]), format_sci(ts.values[0][i]),
                           format_sci(ts.values[1][i])});
        }
        write_csv(result, cfg.out_dir, name, "t_s,n_phonon,n_magnon", csv);
    };
    emit("fig2e_ref.csv", ref);
    emit("fig2e_svr.csv", svr);
    emit("fig2e_nosvr.csv", nosvr);

    double svr_diff = std::max(series_max_diff(svr, 0, ref, 0, 2.0 * rabi),
                               series_max_diff(svr, 1, ref, 1, 2.0 * rabi));
    double nosvr_peak = 0.0, ref_peak = 0.0, svr_peak = 0.0;
    for (size_t i = 0; i < nosvr.times.size() && nosvr.times[i] <= 2.0 * rabi; ++i) {
        nosvr_peak = std::max(nosvr_peak, nosvr.values[1][i]);
    }
    for (size_t i = 0; i < ref.times.size() && ref.times[i] <= 2.0 * rabi; ++i) {
        ref_peak = std::max(ref_peak, ref.values[1][i]);
        svr_peak = std::max(svr_peak, svr.values[1][i]);
    }
    result.metrics["svr_vs_ref_max_diff"] = svr_diff;
    result.metrics["nosvr_first_magnon_peak"] = nosvr_peak;
    result.metrics["ref_first_magnon_peak"] = ref_peak;
    result.metrics["svr_first_magnon_peak"] = svr_peak;

    std::ostringstream summary;
    summary << "SVR-vs-reference max |diff| over one Rabi period: " << format_sci(svr_diff)
            << "\n"
            << "first magnon peak: no-SVR " << format_sci(nosvr_peak) << ", SVR "
            << format_sci(svr_peak) << ", reference " << format_sci(ref_peak) << "\n";
    record_gate(result, cfg, gate, summary);
    result.summary += summary.str();
    result.series["ref"] = std::move(ref);
    result.series["svr"] = std::move(svr);
    result.series["nosvr"] = std::move(nosvr);
}

// ---------------------------------------------------------------- fig3

TimeSeries run_tripartite(const FrameParams& fp, const ScenarioConfig& cfg, int n_phonon,
                          int n_magnon, double t_end, int rows) {
    SpaceLayout layout = SpaceLayout::spin_phonon_magnon(n_phonon, n_magnon);
    TimeDependentHamiltonian h = build_hybrid_squeezed(fp, layout, cfg.rwa);
    BathOptions baths{};
    baths.dephasing = cfg.gamma_z;
    if (cfg.svr) baths.svr = {{cfg.r_e, cfg.theta_e}};
    std::vector<DissipatorSpec> diss = build_dissipators(fp, layout, baths);
    State rho0 = State::fock(layout, {1, 0, 0});
    std::vector<Op> obs = {number_op(layout, 1), number_op(layout, 2),
                           spin_population_op(layout, 0)};

    IntegratorConfig ic;
    ic.t_end = t_end;
    if (cfg.rwa) {
        ic.method = IntegratorConfig::Method::RK45;
        ic.tolerance = 1e-7;
    } else {
        StepPlan plan = plan_steps(t_end, kTwoPi / (40.0 * 2.0 * fp.omega_p), rows);
        ic.dt = plan.dt;
        ic.sample_stride = plan.stride;
    }
    ic.eig_check_stride = std::max(1, rows / 4);
    return evolve(rho0, h, diss, ic, obs, {"n_phonon", "n_magnon", "p_spin"});
}

TimeSeries run_ms_effective_series(const FrameParams& fp, const ScenarioConfig& cfg,
                                   double t_end, int rows) {
    SpaceLayout layout = SpaceLayout::spin_magnon(cfg.n_magnon);
    EffectiveMSParams ep = effective_ms_params(fp);
    TimeDependentHamiltonian h = build_ms_effective(ep, layout);
    BathOptions baths{};
    baths.dephasing = cfg.gamma_z;
    std::vector<DissipatorSpec> diss = build_dissipators(fp, layout, baths);
    State rho0 = State::fock(layout, {1, 0});
    std::vector<Op> obs = {number_op(layout, 1), spin_population_op(layout, 0)};

    StepPlan plan = plan_steps(t_end, t_end / (2.0 * rows), rows);
    IntegratorConfig ic;
    ic.dt = plan.dt;
    ic.t_end = t_end;
    ic.sample_stride = plan.stride;
    ic.eig_check_stride = std::max(1, rows / 8);
    return evolve(rho0, h, diss, ic, obs, {"n_magnon", "p_spin"});
}

void run_fig3a(const ScenarioConfig& cfg, ScenarioResult& result) {
    FrameParams fp = dispersive_frame(cfg);
    EffectiveMSParams ep = effective_ms_params(fp);
    // Default horizon: two full population periods.
    double t_end = cfg.t_end > 0.0 ? cfg.t_end : kTwoPi / ep.g_ms;

    TimeSeries full = run_tripartite(fp, cfg, cfg.n_phonon, cfg.n_magnon, t_end, cfg.max_rows);
    TimeSeries eff = run_ms_effective_series(fp, cfg, t_end, cfg.max_rows);

    GateOutcome gate;
    if (cfg.convergence_gate) {
        double tg = t_end * cfg.gate_horizon_frac;
        TimeSeries refined =
            run_tripartite(fp, cfg, cfg.n_phonon + 2, cfg.n_magnon + 2, tg, cfg.max_rows);
        gate.ran = true;
        for (size_t k = 0; k < 3; ++k) {
            gate.max_shift =
                std::max(gate.max_shift, series_max_diff(refined, k, full, k, tg));
        }
    }

    std::vector<std::vector<std::string>> csv;
    for (size_t i = 0; i < full.times.size(); ++i) {
        int j = eff.find_index(full.times[i]);
        csv.push_back({format_sci(full.times[i]), format_sci(full.values[0][i]),
                       format_sci(full.values[1][i]), format_sci(full.values[2][i]),
                       format_sci(eff.values[1][static_cast<size_t>(j)])});
    }
    write_csv(result, cfg.out_dir, "fig3a.csv", "t_s,n_phonon,n_magnon,p_spin,p_spin_eff", csv);

    double period_expected = kTwoPi / (2.0 * ep.g_ms);  // pi/g_ms
    // Revival time: argmax of p_spin in a window around the expected period.
    size_t arg_max = 0;
    for (size_t i = 0; i < full.times.size(); ++i) {
        if (full.times[i] < 0.5 * period_expected || full.times[i] > 1.5 * period_expected) {
            continue;
        }
        if (arg_max == 0 || full.values[2][i] > full.values[2][arg_max]) arg_max = i;
    }
    double period = arg_max == 0 ? -1.0 : full.times[arg_max];
    double max_phonon = *std::max_element(full.values[0].begin(), full.values[0].end());
    double eff_diff = 0.0;
    for (size_t i = 0; i < full.times.size() && full.times[i] <= period_expected; ++i) {
        int j = eff.find_index(full.times[i]);
        eff_diff = std::max(eff_diff, std::abs(full.values[2][i] -
                                               eff.values[1][static_cast<size_t>(j)]));
    }
    result.metrics["rabi_period"] = period;
    result.metrics["expected_period"] = period_expected;
    result.metrics["max_n_phonon"] = max_phonon;
    result.metrics["full_eff_p_spin_diff"] = eff_diff;
    result.metrics["g_ms"] = ep.g_ms;

    std::ostringstream summary;
    summary << "spin revival at " << format_sci(period) << " s (pi/g_ms = "
            << format_sci(period_expected) << " s)\n"
            << "max phonon occupation " << format_sci(max_phonon) << "\n"
            << "full-vs-effective p_spin max |diff| over one period: " << format_sci(eff_diff)
            << "\n";
    record_gate(result, cfg, gate, summary);
    result.summary += summary.str();
    result.series["full"] = std::move(full);
    result.series["eff"] = std::move(eff);
}

// Contrast between the first revival peak and the first transfer minimum.
double spin_contrast(const TimeSeries& ts, double period) {
    double tmin_lo = 0.3 * period, tmin_hi = 0.7 * period;
    double tmax_lo = 0.8 * period, tmax_hi = 1.2 * period;
    double vmin = 1.0, vmax = 0.0;
    for (size_t i = 0; i < ts.times.size(); ++i) {
        double t = ts.times[i];
        double v = ts.values[2][i];
        if (t >= tmin_lo && t <= tmin_hi) vmin = std::min(vmin, v);
        if (t >= tmax_lo && t <= tmax_hi) vmax = std::max(vmax, v);
    }
    return vmax - vmin;
}

void run_fig3bc(const ScenarioConfig& cfg, ScenarioResult& result) {
    bool axis_gs = !cfg.sweep_gamma_s.empty();
    bool axis_q = !cfg.sweep_Q_x.empty();
    if (!axis_gs && !axis_q) throw ConfigError("sweep: no ranged axis given (sweep.*)");

    std::vector<double> gs_axis = axis_gs ? cfg.sweep_gamma_s : std::vector<double>{cfg.gamma_s};
    std::vector<double> q_axis = axis_q ? cfg.sweep_Q_x : std::vector<double>{cfg.Q_x};

    struct Point {
        double gamma_s, Q_x;
        TimeSeries ts;
        double contrast = 0.0;
    };
    std::vector<Point> points;
    for (double gs : gs_axis) {
        for (double q : q_axis) points.push_back({gs, q, {}, 0.0});
    }

    ScenarioConfig base = cfg;
    FrameParams fp0 = dispersive_frame(base);
    EffectiveMSParams ep = effective_ms_params(fp0);
    double t_end = cfg.t_end > 0.0 ? cfg.t_end : kTwoPi / ep.g_ms;
    double period = kTwoPi / (2.0 * ep.g_ms);

    auto run_point = [&](Point& p) {
        ScenarioConfig pc = cfg;
        pc.gamma_s = p.gamma_s;
        pc.Q_x = p.Q_x;
        FrameParams fp = dispersive_frame(pc);
        // Enough phonon levels to absorb thermal heating over the horizon.
        // With the matched reservoir the bath acts at the bare occupation.
        double occ = pc.svr ? fp.nbar_x : fp.nbar_x_s;
        double heat = occ * fp.gamma_x * t_end;
        int n_phonon = heat > 0.2 ? std::max(cfg.n_phonon, 12) : cfg.n_phonon;
        p.ts = run_tripartite(fp, pc, n_phonon, cfg.n_magnon, t_end, cfg.max_rows);
        p.contrast = spin_contrast(p.ts, period);
    };

    int workers = std::max(1, cfg.threads);
    if (workers <= 1 || points.size() <= 1) {
        for (auto& p : points) run_point(p);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        size_t pool_size = std::min(static_cast<size_t>(workers), points.size());
        for (size_t w = 0; w < pool_size; ++w) {
            pool.emplace_back([&]() {
                omp_set_num_threads(1);
                for (size_t i = next.fetch_add(1); i < points.size(); i = next.fetch_add(1)) {
                    run_point(points[i]);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    // Long-format CSV, axis-major, decimated to a uniform grid.
    const int grid = 400;
    std::vector<std::vector<std::string>> csv;
    std::string header;
    bool two_axes = axis_gs && axis_q;
    if (two_axes) {
        header = "gamma_s,Q_x,t_s,p_spin";
    } else if (axis_gs) {
        header = "gamma_s,t_s,p_spin";
    } else {
        header = "Q_x,t_s,p_spin";
    }
    for (auto& p : points) {
        for (int k = 0; k <= grid; ++k) {
            double t = t_end * k / grid;
            int j = p.ts.find_index(t);
            std::vector<std::string> row;
            if (two_axes) {
                row = {format_sci(p.gamma_s), format_sci(p.Q_x)};
            } else if (axis_gs) {
                row = {format_sci(p.gamma_s)};
            } else {
                row = {format_sci(p.Q_x)};
            }
            row.push_back(format_sci(p.ts.times[static_cast<size_t>(j)]));
            row.push_back(format_sci(p.ts.values[2][static_cast<size_t>(j)]));
            csv.push_back(std::move(row));
        }
    }
    std::string name = cfg.id == ScenarioId::fig3b ? "fig3b.csv"
                       : cfg.id == ScenarioId::fig3c ? "fig3c.csv"
                                                     : "sweep.csv";
    write_csv(result, cfg.out_dir, name, header, csv);

    std::ostringstream summary;
    if (cfg.svr) {
        summary << "phonon bath: engineered squeezed reservoir (r_e=" << format_sci(cfg.r_e)
                << ", theta_e=" << format_sci(cfg.theta_e) << ")\n";
    }
    for (size_t i = 0; i < points.size(); ++i) {
        std::string key = "contrast_" + std::to_string(i);
        result.metrics[key] = points[i].contrast;
        summary << "point gamma_s=" << format_sci(points[i].gamma_s)
                << " Q_x=" << format_sci(points[i].Q_x) << ": spin contrast "
                << format_sci(points[i].contrast) << "\n";
        result.series["point" + std::to_string(i)] = std::move(points[i].ts);
    }

    // Max pairwise p_spin difference across points on the uniform grid.
    // The robustness figure of merit covers the state-transfer window (one
    // full population period); the whole-horizon value is reported too.
    double pair_diff = 0.0, pair_diff_full = 0.0;
    for (size_t a = 0; a + 1 < points.size(); ++a) {
        for (size_t b = a + 1; b < points.size(); ++b) {
            const TimeSeries& ta = result.series["point" + std::to_string(a)];
            const TimeSeries& tb = result.series["point" + std::to_string(b)];
            for (int k = 0; k <= grid; ++k) {
                double t = t_end * k / grid;
                double va = ta.values[2][static_cast<size_t>(ta.find_index(t))];
                double vb = tb.values[2][static_cast<size_t>(tb.find_index(t))];
                double d = std::abs(va - vb);
                pair_diff_full = std::max(pair_diff_full, d);
                if (t <= period) pair_diff = std::max(pair_diff, d);
            }
        }
    }
    result.metrics["max_pairwise_p_spin_diff"] = pair_diff;
    result.metrics["max_pairwise_p_spin_diff_full"] = pair_diff_full;
    summary << "max pairwise p_spin difference: " << format_sci(pair_diff)
            << " over one period, " << format_sci(pair_diff_full) << " over the horizon\n";
    result.summary += summary.str();
}

}  // namespace

std::string format_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.8e", v);
    return buf;
}

ScenarioId scenario_id_from_string(const std::string& s) {
    static const std::map<std::string, ScenarioId> table = {
        {"table1", ScenarioId::table1}, {"fig2a", ScenarioId::fig2a},
        {"fig2b", ScenarioId::fig2b},   {"fig2c", ScenarioId::fig2c},
        {"fig2d", ScenarioId::fig2d},   {"fig2e", ScenarioId::fig2e},
        {"fig3a", ScenarioId::fig3a},   {"fig3b", ScenarioId::fig3b},
        {"fig3c", ScenarioId::fig3c},   {"figA1", ScenarioId::figA1},
        {"verify", ScenarioId::verify}};
    auto it = table.find(s);
    if (it == table.end()) throw ConfigError("unknown scenario id '" + s + "'");
    return it->second;
}

std::string scenario_id_to_string(ScenarioId id) {
    switch (id) {
        case ScenarioId::table1: return "table1";
        case ScenarioId::fig2a: return "fig2a";
        case ScenarioId::fig2b: return "fig2b";
        case ScenarioId::fig2c: return "fig2c";
        case ScenarioId::fig2d: return "fig2d";
        case ScenarioId::fig2e: return "fig2e";
        case ScenarioId::fig3a: return "fig3a";
        case ScenarioId::fig3b: return "fig3b";
        case ScenarioId::fig3c: return "fig3c";
        case ScenarioId::figA1: return "figA1";
        case ScenarioId::verify: return "verify";
    }
    return "?";
}

ScenarioConfig default_config(ScenarioId id) {
    ScenarioConfig cfg;
    cfg.id = id;
    cfg.omega_x = Canonical::omega_x;
    cfg.omega_K = Canonical::omega_K;
    cfg.g = Canonical::g;
    cfg.lambda = Canonical::lambda;
    cfg.temperature = Canonical::temperature;
    cfg.Q_x = Canonical::Q_x;
    cfg.gamma_s = Canonical::gamma_s;
    cfg.gamma_z = Canonical::gamma_z;
    cfg.r_p = Canonical::r_p;
    cfg.convergence_gate = false;

    switch (id) {
        case ScenarioId::fig2d:
            cfg.n_phonon = cfg.n_magnon = 6;
            cfg.convergence_gate = true;
            break;
        case ScenarioId::fig2e:
            cfg.n_phonon = cfg.n_magnon = 6;
            cfg.t_end = 0.15e-6;
            cfg.convergence_gate = true;
            break;
        case ScenarioId::fig3a:
        case ScenarioId::fig3b:
        case ScenarioId::fig3c:
            cfg.r_p = 1.54;
            cfg.ds_over_gr = -55.0;
            cfg.dK_over_gr = -45.0;
            cfg.dNV_over_gr = -45.0;
            cfg.gamma_s = kTwoPi * 0.1e6;
            // The mediator stays below 0.05 occupation, so small bases
            // suffice; the +2 convergence gate checks this.
            cfg.n_phonon = cfg.n_magnon = 4;
            if (id == ScenarioId::fig3a) {
                cfg.convergence_gate = true;
                cfg.gate_horizon_frac = 0.25;
            } else {
                // Sweeps run the RWA-dropped Hamiltonian (dispersive ratios
                // far beyond the validity factors) to keep runtimes at desk
                // scale; fig3a keeps the full time-dependent model.
                cfg.rwa = true;
                if (id == ScenarioId::fig3b) {
                    cfg.sweep_gamma_s = {kTwoPi * 0.1e6, kTwoPi * 0.3e6, kTwoPi * 1.0e6};
                } else {
                    cfg.sweep_Q_x = {1e4, 1e6, 1e8};
                    // At low Q the pump-amplified thermal noise (occupation
                    // ~600 in this frame) heats the mediator past any
                    // tractable basis and detunes the exchange within a
                    // fraction of a period; the low-Q robustness statement
                    // is only well-posed under the matched engineered
                    // reservoir, which restores the bare occupation.
                    cfg.svr = true;
                    cfg.r_e = cfg.r_p;
                    cfg.theta_e = 3.14159265358979323846;
                }
            }
            break;
        default:
            break;
    }
    return cfg;
}

void apply_config(ScenarioConfig& cfg, const ConfigFile& file) {
    double unit = file.boolean("units.two_pi").value_or(true) ? kTwoPi : 1.0;
    auto freq = [&](const char* key, double& target) {
        if (auto v = file.number(key)) target = *v * unit;
    };
    auto plain = [&](const char* key, double& target) {
        if (auto v = file.number(key)) target = *v;
    };
    auto flag = [&](const char* key, bool& target) {
        if (auto v = file.boolean(key)) target = *v;
    };

    if (auto s = file.string("scenario.id")) cfg.id = scenario_id_from_string(*s);
    if (auto s = file.string("scenario.out")) cfg.out_dir = *s;

    freq("device.omega_x_hz", cfg.omega_x);
    freq("device.omega_K_hz", cfg.omega_K);
    freq("device.g_hz", cfg.g);
    freq("device.lambda_hz", cfg.lambda);
    freq("device.gamma_s_hz", cfg.gamma_s);
    freq("device.gamma_z_hz", cfg.gamma_z);
    plain("device.Q_x", cfg.Q_x);
    plain("device.temperature_K", cfg.temperature);
    plain("device.r_p", cfg.r_p);

    plain("frame.ds_over_gr", cfg.ds_over_gr);
    plain("frame.dK_over_gr", cfg.dK_over_gr);
    plain("frame.dNV_over_gr", cfg.dNV_over_gr);

    if (auto v = file.number("truncation.n_phonon")) {
        if (*v < 2) throw ConfigError("truncation.n_phonon: must be >= 2");
        cfg.n_phonon = static_cast<int>(*v);
    }
    if (auto v = file.number("truncation.n_magnon")) {
        if (*v < 2) throw ConfigError("truncation.n_magnon: must be >= 2");
        cfg.n_magnon = static_cast<int>(*v);
    }

    if (auto v = file.number("run.t_end_s")) {
        if (*v <= 0) throw ConfigError("run.t_end_s: must be positive");
        cfg.t_end = *v;
    }
    if (auto v = file.number("run.max_rows")) cfg.max_rows = static_cast<int>(*v);
    flag("run.convergence_gate", cfg.convergence_gate);
    flag("run.rwa", cfg.rwa);
    flag("run.excite_magnon", cfg.excite_magnon);
    flag("run.strict_two_phonon", cfg.strict_two_phonon);

    flag("svr.enabled", cfg.svr);
    plain("svr.r_e", cfg.r_e);
    plain("svr.theta_e", cfg.theta_e);

    int axes = 0;
    for (const auto& [key, value] : file.entries()) {
        if (key.rfind("sweep.", 0) != 0) continue;
        if (key == "sweep.gamma_s_hz") {
            auto arr = value.as_array(key);
            if (arr.empty()) throw ConfigError("sweep.gamma_s_hz: empty range");
            cfg.sweep_gamma_s.clear();
            for (double v : arr) cfg.sweep_gamma_s.push_back(v * unit);
            ++axes;
        } else if (key == "sweep.Q_x") {
            auto arr = value.as_array(key);
            if (arr.empty()) throw ConfigError("sweep.Q_x: empty range");
            cfg.sweep_Q_x = arr;
            ++axes;
        } else {
            throw ConfigError("sweep: unknown axis '" + key + "' (supported: gamma_s_hz, Q_x)");
        }
    }
    if (axes > 2) throw ConfigError("sweep: more than two ranged axes");
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
    ScenarioResult result;
    switch (cfg.id) {
        case ScenarioId::table1: run_table1(cfg, result); break;
        case ScenarioId::fig2a: run_fig2a(cfg, result); break;
        case ScenarioId::fig2b: run_fig2b(cfg, result); break;
        case ScenarioId::fig2c: run_fig2c(cfg, result); break;
        case ScenarioId::fig2d: run_fig2d(cfg, result); break;
        case ScenarioId::fig2e: run_fig2e(cfg, result); break;
        case ScenarioId::fig3a: run_fig3a(cfg, result); break;
        case ScenarioId::fig3b:
        case ScenarioId::fig3c: run_fig3bc(cfg, result); break;
        case ScenarioId::figA1: run_figA1(cfg, result); break;
        case ScenarioId::verify:
            throw ConfigError("use the verify subcommand for the verification suite");
    }
    return result;
}

int run_verify(std::ostream& out) {
    int failures = 0;
    auto check = [&](const std::string& name, bool ok, const std::string& detail) {
        out << (ok ? "[PASS] " : "[FAIL] ") << name;
        if (!detail.empty()) out << " (" << detail << ")";
        out << "\n";
        if (!ok) ++failures;
    };

    // Derived device parameters against the canonical table values.
    {
        double wx = cantilever_frequency(canonical_cantilever(1e8));
        check("cantilever frequency near 2pi*3.8 MHz",
              std::abs(wx / Canonical::omega_x - 1.0) < 0.02,
              "derived " + format_sci(wx / kTwoPi) + " Hz");
        double nb = thermal_occupation(Canonical::omega_x, Canonical::temperature);
        check("phonon thermal occupation near 55", nb > 53.0 && nb < 56.0,
              "derived " + format_sci(nb));
        PumpSolution pump =
            resonance_pump(Canonical::omega_x, Canonical::omega_K, Canonical::r_p);
        check("resonance pump frequency",
              std::abs(pump.omega_p / Canonical::omega_p - 1.0) < 3e-3,
              "derived " + format_sci(pump.omega_p / kTwoPi) + " Hz");
        check("resonance pump amplitude",
              std::abs(pump.Omega_p / Canonical::Omega_p - 1.0) < 3e-3,
              "derived " + format_sci(pump.Omega_p / kTwoPi) + " Hz");
    }

    // Squeezed-frame identities.
    {
        ScenarioConfig cfg = default_config(ScenarioId::fig2d);
        FrameParams fp = resonance_frame(cfg);
        bool ok = std::abs(fp.g_r - fp.g * std::cosh(fp.r_p)) < 1e-6 * fp.g_r &&
                  std::abs(fp.g_c - fp.g * std::sinh(fp.r_p)) < 1e-6 * fp.g_r &&
                  std::abs(fp.Delta_s - fp.Delta_x / std::cosh(2.0 * fp.r_p)) <
                      1e-6 * std::abs(fp.Delta_s);
        check("squeezed-frame coupling/detuning identities", ok, "");
        // Moderate squeezing: S(r) only acts unitarily well inside the
        // truncated basis, so the conjugation oracle is checked at r_p = 0.5
        // with a deep phonon space.
        ScenarioConfig ocfg = cfg;
        ocfg.r_p = 0.5;
        FrameOracleReport rep = frame_oracle(resonance_frame(ocfg), 60, 6);
        check("squeeze-conjugation oracle matches squeezed-frame Hamiltonian",
              rep.max_deviation < 1e-6 * rep.scale,
              "relative deviation " + format_sci(rep.max_deviation / rep.scale));
    }

    // Parallel kernel against the serial dense reference.
    {
        ScenarioConfig cfg = default_config(ScenarioId::fig2e);
        cfg.Q_x = 1e3;
        FrameParams fp = resonance_frame(cfg);
        SpaceLayout layout = SpaceLayout::phonon_magnon(4, 4);
        TimeDependentHamiltonian h = build_mm_squeezed(fp, layout);
        BathOptions baths{};
        baths.svr = {{0.7, 1.1}};
        std::vector<DissipatorSpec> diss = build_dissipators(fp, layout, baths);
        LindbladSystem sys(h, diss);
        LindbladSystem::Workspace ws(sys);
        int n = layout.total_dim();
        Matrix a = Matrix::Random(n, n);
        Matrix rho = a * a.adjoint();
        rho /= rho.trace();
        Matrix rho_rm = rho;  // Eigen default col-major; transpose for row-major view
        rho_rm.transposeInPlace();
        std::vector<Complex> out_rm(static_cast<size_t>(n) * n);
        double t = 1.3e-10;
        sys.rhs(rho_rm.data(), t, out_rm.data(), ws);
        Matrix ref(n, n);
        sys.rhs_reference(rho, t, ref);
        double diff = 0.0, scale = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                diff = std::max(diff,
                                std::abs(out_rm[static_cast<size_t>(i) * n + j] - ref(i, j)));
                scale = std::max(scale, std::abs(ref(i, j)));
            }
        }
        check("row-parallel kernel matches serial dense reference",
              diff < 1e-12 * std::max(1.0, scale), "max diff " + format_sci(diff));
    }

    // Thermal fixed point of a plain thermal bath.
    {
        int trunc = 30;
        double nbar = 0.5, gamma = 1.0;
        SpaceLayout layout = SpaceLayout::boson(trunc);
        Op b = boson_annihilation(trunc);
        TimeDependentHamiltonian h{layout, {}, false};
        std::vector<DissipatorSpec> diss = {DissipatorSpec::thermal(b, gamma, nbar)};
        State th = State::thermal_boson(trunc, nbar);
        double resid = steady_check(th, h, diss);
        check("thermal state stationary under thermal bath", resid < 1e-10 * gamma,
              "residual " + format_sci(resid));
    }

    // Squeezed thermal state stationary under the two-phonon-correlated bath.
    {
        int trunc = 80;
        double nbar = 0.3, r = 0.5, gamma = 1.0;
        SpaceLayout layout = SpaceLayout::boson(trunc);
        Op b = boson_annihilation(trunc);
        TimeDependentHamiltonian h{layout, {}, false};
        BathCoefficients bc = squeezed_bath_coefficients(nbar, r, 0.0, 0.0);
        std::vector<DissipatorSpec> diss = {
            DissipatorSpec::squeezed_reservoir(b, gamma, bc.N_s, bc.M_s)};
        // Stationary state: the frame transform rho_s = U^dag rho U with
        // U = S(r) maps the lab thermal state to S(-r) rho_th S(-r)^dag.
        Op s = squeeze_operator(trunc, -r);
        Matrix rho = s.matrix * State::thermal_boson(trunc, nbar).rho() * s.matrix.adjoint();
        double resid = steady_check(State(layout, rho), h, diss);
        check("squeezed thermal state stationary under correlated bath",
              resid < 1e-8 * gamma, "residual " + format_sci(resid));
    }

    // Short closed-system evolution: trace and positivity preserved.
    {
        ScenarioConfig cfg = default_config(ScenarioId::fig2d);
        cfg.Q_x = 1e12;   // effectively closed
        cfg.gamma_s = 1.0;  // rad/s; keep the magnon bath negligible too
        FrameParams fp = resonance_frame(cfg);
        TimeSeries ts = run_bipartite(fp, 4, 4, true, BathOptions{}, 5e-8,
                                      kTwoPi / (400.0 * fp.g_r), 50, false);
        check("trace preserved over JC evolution", ts.trace_drift < 1e-8,
              "drift " + format_sci(ts.trace_drift));
        check("positivity preserved over JC evolution", ts.min_eigenvalue > -1e-8,
              "min eigenvalue " + format_sci(ts.min_eigenvalue));
        // Excitation-number conservation in the resonant exchange model.
        double worst = 0.0;
        for (size_t i = 0; i < ts.times.size(); ++i) {
            worst = std::max(worst, std::abs(ts.values[0][i] + ts.values[1][i] - 1.0));
        }
        check("excitation number conserved in resonant exchange", worst < 1e-6,
              "max deviation " + format_sci(worst));
    }

    // Byte-identical CSV output across reruns.
    {
        auto render = [&](const std::string& dir) {
            ScenarioConfig cfg = default_config(ScenarioId::fig2c);
            cfg.out_dir = dir;
            ScenarioResult r = run_scenario(cfg);
            std::ifstream in(r.files_written.front(), std::ios::binary);
            std::ostringstream ss;
            ss << in.rdbuf();
            return ss.str();
        };
        std::string base =
            (std::filesystem::temp_directory_path() / "magnomech_verify").string();
        std::string a = render(base + "_a");
        std::string b = render(base + "_b");
        check("CSV output byte-identical across reruns", !a.empty() && a == b, "");
        std::filesystem::remove_all(base + "_a");
        std::filesystem::remove_all(base + "_b");
    }

    out << (failures == 0 ? "verification passed" : "verification FAILED") << " ("
        << failures << " failing checks)\n";
    return failures == 0 ? 0 : 3;
}

std::string params_report(const ScenarioConfig& cfg) {
    std::ostringstream out;
    bool dispersive = cfg.ds_over_gr != 0.0;
    FrameParams fp = dispersive ? dispersive_frame(cfg) : resonance_frame(cfg);
    auto hz = [](double w) { return format_sci(w / kTwoPi); };
    out << "frame parameters (values in Hz unless noted):\n"
        << "  omega_x   " << hz(fp.omega_x) << "\n"
        << "  omega_K   " << hz(fp.omega_K) << "\n"
        << "  omega_NV  " << hz(fp.omega_NV) << "\n"
        << "  omega_p   " << hz(fp.omega_p) << "\n"
        << "  Omega_p   " << hz(fp.Omega_p) << "\n"
        << "  Delta_x   " << hz(fp.Delta_x) << "\n"
        << "  Delta_K   " << hz(fp.Delta_K) << "\n"
        << "  Delta_NV  " << hz(fp.Delta_NV) << "\n"
        << "  Delta_s   " << hz(fp.Delta_s) << "\n"
        << "  r_p       " << format_sci(fp.r_p) << " (dimensionless)\n"
        << "  g         " << hz(fp.g) << "\n"
        << "  g_r       " << hz(fp.g_r) << "\n"
        << "  g_c       " << hz(fp.g_c) << "\n"
        << "  lambda_r  " << hz(fp.lambda_r) << "\n"
        << "  gamma_x   " << hz(fp.gamma_x) << "\n"
        << "  gamma_s   " << hz(fp.gamma_s) << "\n"
        << "  nbar_x    " << format_sci(fp.nbar_x) << " (dimensionless)\n"
        << "  nbar_s    " << format_sci(fp.nbar_s) << " (dimensionless)\n"
        << "  nbar_x^s  " << format_sci(fp.nbar_x_s) << " (dimensionless)\n";
    RegimeReport rep = regime_classify(fp, cfg.gamma_s);
    out << "regime: " << regime_name(rep.regime) << " (g_r/gamma_s = "
        << format_sci(rep.g_over_gamma_s) << ", g_r/|Delta_s| = "
        << format_sci(rep.g_over_Delta_s) << ")\n"
        << "cooperativity C_r = " << format_sci(rep.C_r) << ", C_r' = "
        << format_sci(rep.C_r_prime) << "\n";
    RwaRatios rr = rwa_ratios(fp);
    out << "RWA ratios: 2|Delta_s|/g = " << format_sci(rr.two_delta_s)
        << ", 2(omega_p+Delta_s)/g = " << format_sci(rr.pump_plus_ds)
        << ", 2omega_p/g = " << format_sci(rr.two_pump) << "\n";
    if (dispersive) {
        DispersiveReport dr = dispersive_validity(fp);
        out << "dispersive validity: " << (dr.pass ? "pass" : "FAIL") << "\n";
        for (const auto& e : dr.entries) {
            out << "  " << e.name << " = " << format_sci(e.ratio) << " (required >= "
                << format_sci(e.required) << ") " << (e.pass ? "ok" : "FAIL") << "\n";
        }
        EffectiveMSParams ep = effective_ms_params(fp);
        out << "effective model: Delta_k = " << hz(ep.Delta_k) << ", Delta_n = "
            << hz(ep.Delta_n) << ", g_ms = " << hz(ep.g_ms) << "\n";
    }
    return out.str();
}

}  // namespace magnomech
