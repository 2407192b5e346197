#include "magnomech/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace magnomech {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(what) + " must be positive and finite");
    }
}

}  // namespace

double FrameParams::signed_pump() const { return -Delta_x * std::tanh(2.0 * r_p); }

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::WCR: return "WCR";
        case Regime::SCR: return "SCR";
        case Regime::UCR: return "UCR";
    }
    return "?";
}

double RwaRatios::min_ratio() const {
    return std::min({two_delta_s, pump_plus_ds, two_pump});
}

double cantilever_frequency(const CantileverParams& c) {
    require_positive(c.length, "cantilever length");
    require_positive(c.width, "cantilever width");
    require_positive(c.thickness, "cantilever thickness");
    require_positive(c.young_modulus, "Young modulus");
    require_positive(c.mass_density, "mass density");
    return 3.516 * (c.thickness / (c.length * c.length)) *
           std::sqrt(c.young_modulus / (12.0 * c.mass_density));
}

double effective_mass(const CantileverParams& c) {
    double beam = c.mass_density * c.length * c.width * c.thickness / 4.0;
    return beam + c.magnet_mass + c.tip_mass;
}

double zero_point_motion(double m_eff, double omega_x) {
    require_positive(m_eff, "effective mass");
    require_positive(omega_x, "mechanical frequency");
    return std::sqrt(Constants::hbar / (2.0 * m_eff * omega_x));
}

double sphere_volume(double radius) {
    require_positive(radius, "radius");
    return 4.0 / 3.0 * kPi * radius * radius * radius;
}

double kittel_zero_point_magnetization(double Ms, double volume) {
    require_positive(Ms, "saturation magnetization");
    require_positive(volume, "volume");
    return std::sqrt(Constants::hbar * Constants::gamma_gyro * Ms / (2.0 * volume));
}

double magnon_mechanical_coupling(double b0, double x_zpf, double M_K, double volume,
                                  std::optional<double> canonical_override) {
    if (b0 < 0) throw DomainError("field gradient b0 must be nonnegative");
    require_positive(x_zpf, "x_zpf");
    require_positive(M_K, "zero-point magnetization");
    require_positive(volume, "volume");
    if (canonical_override) return *canonical_override;
    return b0 * x_zpf * M_K * volume / (2.0 * Constants::hbar);
}

double spin_mechanical_coupling(double b1, double x_zpf,
                                std::optional<double> canonical_override) {
    if (b1 < 0) throw DomainError("field gradient b1 must be nonnegative");
    require_positive(x_zpf, "x_zpf");
    if (canonical_override) return *canonical_override;
    return Constants::mu_B * Constants::g_e * b1 * x_zpf / Constants::hbar;
}

double nv_frequency(double B_z, double D) {
    if (B_z < 0) throw DomainError("B_z must be nonnegative");
    double w = D - Constants::g_e * Constants::mu_B * B_z / Constants::hbar;
    if (w <= 0.0) {
        throw DomainError("nv_frequency: level crossing (result <= 0)");
    }
    return w;
}

double thermal_occupation(double omega, double temperature) {
    if (!(omega > 0.0)) throw DomainError("thermal_occupation: omega must be positive");
    if (temperature < 0.0) throw DomainError("thermal_occupation: negative temperature");
    if (temperature == 0.0) return 0.0;
    return 1.0 / std::expm1(Constants::hbar * omega / (Constants::k_B * temperature));
}

double squeezing_parameter(double Omega_p, double Delta_x) {
    if (Delta_x == 0.0) throw DomainError("squeezing_parameter: Delta_x is zero");
    double ratio = std::abs(Omega_p / Delta_x);
    if (ratio >= 1.0) {
        throw InstabilityError("squeezing_parameter: |Omega_p/Delta_x| >= 1 (parametric threshold)");
    }
    return 0.5 * std::atanh(ratio);
}

PumpSolution resonance_pump(double omega_x, double omega_K, double r_p) {
    require_positive(omega_x, "omega_x");
    if (!(omega_K > omega_x)) throw DomainError("resonance_pump: omega_K must exceed omega_x");
    if (!(r_p > 0.0)) throw DomainError("resonance_pump: degenerate at r_p = 0");
    double c2 = std::cosh(2.0 * r_p);
    double omega_p = (c2 * omega_K - omega_x) / (c2 - 1.0);
    double Delta_x = omega_x - omega_p;
    return {omega_p, std::abs(Delta_x) * std::tanh(2.0 * r_p)};
}

FrameParams frame_params(const FrameInputs& in) {
    require_positive(in.omega_x, "omega_x");
    require_positive(in.omega_K, "omega_K");
    require_positive(in.Q_x, "Q_x");
    if (in.g < 0 || in.lambda < 0) throw DomainError("couplings must be nonnegative");

    FrameParams fp{};
    fp.omega_x = in.omega_x;
    fp.omega_K = in.omega_K;
    fp.omega_NV = in.omega_NV;
    fp.g = in.g;
    fp.lambda = in.lambda;
    fp.temperature = in.temperature;
    fp.gamma_x = in.omega_x / in.Q_x;
    fp.gamma_s = in.gamma_s;

    if (in.resonance_r_p) {
        PumpSolution p = resonance_pump(in.omega_x, in.omega_K, *in.resonance_r_p);
        fp.omega_p = p.omega_p;
        fp.Omega_p = p.Omega_p;
        fp.Delta_x = in.omega_x - p.omega_p;
        fp.r_p = squeezing_parameter(p.Omega_p, fp.Delta_x);
    } else if (in.pump) {
        fp.omega_p = in.pump->omega_p;
        fp.Omega_p = std::abs(in.pump->Omega_p);
        fp.Delta_x = in.omega_x - fp.omega_p;
        fp.r_p = (fp.Omega_p == 0.0) ? 0.0 : squeezing_parameter(fp.Omega_p, fp.Delta_x);
    } else {
        throw DomainError("frame_params: no pump specification");
    }

    fp.Delta_K = in.omega_K - fp.omega_p;
    fp.Delta_NV = (in.omega_NV > 0.0) ? in.omega_NV - fp.omega_p : 0.0;
    fp.Delta_s = fp.Delta_x / std::cosh(2.0 * fp.r_p);

    double ch = std::cosh(fp.r_p), sh = std::sinh(fp.r_p);
    fp.g_r = in.g * ch;
    fp.g_c = in.g * sh;
    fp.lambda_r = in.lambda * ch;
    fp.lambda_c = in.lambda * sh;

    fp.nbar_x = thermal_occupation(in.omega_x, in.temperature);
    fp.nbar_s = thermal_occupation(in.omega_K, in.temperature);
    fp.nbar_x_s = fp.nbar_x * std::cosh(2.0 * fp.r_p) + sh * sh;
    return fp;
}

FrameParams frame_from_detunings(const DetuningFrameInputs& in) {
    require_positive(in.omega_x, "omega_x");
    if (!(in.r_p >= 0.0)) throw DomainError("r_p must be nonnegative");

    FrameParams fp{};
    fp.r_p = in.r_p;
    fp.Delta_s = in.Delta_s;
    fp.Delta_K = in.Delta_K;
    fp.Delta_NV = in.Delta_NV;
    fp.Delta_x = in.Delta_s * std::cosh(2.0 * in.r_p);
    fp.omega_x = in.omega_x;
    fp.omega_p = in.omega_x - fp.Delta_x;
    fp.Omega_p = std::abs(fp.Delta_x) * std::tanh(2.0 * in.r_p);
    fp.omega_K = fp.omega_p + in.Delta_K;
    fp.omega_NV = fp.omega_p + in.Delta_NV;
    fp.g = in.g;
    fp.lambda = in.lambda;
    double ch = std::cosh(in.r_p), sh = std::sinh(in.r_p);
    fp.g_r = in.g * ch;
    fp.g_c = in.g * sh;
    fp.lambda_r = in.lambda * ch;
    fp.lambda_c = in.lambda * sh;
    fp.temperature = in.temperature;
    fp.gamma_x = in.omega_x / in.Q_x;
    fp.gamma_s = in.gamma_s;
    fp.nbar_x = thermal_occupation(in.omega_x, in.temperature);
    fp.nbar_s = thermal_occupation(fp.omega_K, in.temperature);
    fp.nbar_x_s = fp.nbar_x * std::cosh(2.0 * in.r_p) + sh * sh;
    return fp;
}

double cooperativity(double g_r, double gamma_x, double gamma_s, double occupation) {
    require_positive(gamma_x, "gamma_x");
    require_positive(gamma_s, "gamma_s");
    if (occupation < 0) throw DomainError("occupation must be nonnegative");
    return 4.0 * g_r * g_r / (gamma_x * gamma_s * (1.0 + occupation));
}

RegimeReport regime_classify(const FrameParams& fp, double gamma_s) {
    require_positive(gamma_s, "gamma_s");
    RegimeReport rep{};
    rep.g_over_gamma_s = fp.g_r / gamma_s;
    rep.g_over_Delta_s = (fp.Delta_s == 0.0) ? 0.0 : fp.g_r / std::abs(fp.Delta_s);
    if (rep.g_over_gamma_s > 1.0) {
        rep.regime = (rep.g_over_Delta_s > 0.1) ? Regime::UCR : Regime::SCR;
    } else {
        rep.regime = Regime::WCR;
    }
    rep.C_r = cooperativity(fp.g_r, fp.gamma_x, gamma_s, fp.nbar_x_s);
    rep.C_r_prime = cooperativity(fp.g_r, fp.gamma_x, gamma_s, fp.nbar_x);
    return rep;
}

RwaRatios rwa_ratios(const FrameParams& fp) {
    double g_max = std::max(fp.g_r, fp.g_c);
    if (g_max <= 0.0) throw DomainError("rwa_ratios: zero coupling");
    RwaRatios r{};
    r.two_delta_s = 2.0 * std::abs(fp.Delta_s) / g_max;
    r.pump_plus_ds = 2.0 * (fp.omega_p + fp.Delta_s) / g_max;
    r.two_pump = 2.0 * fp.omega_p / g_max;
    return r;
}

DispersiveReport dispersive_validity(const FrameParams& fp, double slow_factor,
                                     double pump_factor) {
    DispersiveReport rep{};
    auto add = [&rep](std::string name, double ratio, double required) {
        rep.entries.push_back({std::move(name), ratio, required, ratio >= required});
    };
    double wp2 = 2.0 * fp.omega_p;

    auto chain = [&](const char* tag, double delta, double coupling) {
        double slow = std::abs(fp.Delta_s - delta);
        add(std::string("abs(Ds-") + tag + ")/coupling",
            coupling > 0 ? slow / coupling : std::numeric_limits<double>::infinity(),
            slow_factor);
        double fast = std::min({std::abs(fp.Delta_s + delta),
                                std::abs(fp.Delta_s + delta + wp2),
                                std::abs(fp.Delta_s - delta - wp2)});
        add(std::string("fast(") + tag + ")/abs(Ds-" + tag + ")",
            slow > 0 ? fast / slow : 0.0, pump_factor);
    };
    chain("DK", fp.Delta_K, fp.g_r);
    chain("DNV", fp.Delta_NV, fp.lambda_r);

    rep.pass = std::all_of(rep.entries.begin(), rep.entries.end(),
                           [](const DispersiveReport::Entry& e) { return e.pass; });
    return rep;
}

EffectiveMSParams effective_ms_params(const FrameParams& fp) {
    double dk = fp.Delta_K - fp.Delta_s;
    double dn = fp.Delta_NV - fp.Delta_s;
    if (dk == 0.0 || dn == 0.0) {
        throw DomainError("effective_ms_params: degenerate detuning");
    }
    EffectiveMSParams ep{};
    ep.Delta_k = fp.g_r * fp.g_r / dk;
    ep.Delta_n = fp.lambda_r * fp.lambda_r / dn;
    ep.g_ms = 0.5 * fp.g_r * fp.lambda_r * (1.0 / dk + 1.0 / dn);
    return ep;
}

BathCoefficients squeezed_bath_coefficients(double nbar_x, double r_p, double r_e,
                                            double theta_e) {
    if (r_e < 0.0) throw DomainError("squeezed_bath_coefficients: r_e must be nonnegative");
    if (nbar_x < 0.0) throw DomainError("squeezed_bath_coefficients: negative occupation");
    using std::cosh;
    using std::sinh;
    double c2e = cosh(2.0 * r_e), s2e = sinh(2.0 * r_e);
    double c2p = cosh(2.0 * r_p), s2p = sinh(2.0 * r_p);
    double shp = sinh(r_p), chp = cosh(r_p);
    double she = sinh(r_e);

    BathCoefficients bc{};
    bc.N_s = (nbar_x * c2e + she * she) * c2p + shp * shp +
             (nbar_x + 0.5) * s2e * s2p * std::cos(theta_e);
    std::complex<double> eip(std::cos(theta_e), std::sin(theta_e));
    bc.M_s = -(2.0 * nbar_x + 1.0) *
             (0.5 * s2p * c2e +
              0.5 * s2e * (eip * (chp * chp) + std::conj(eip) * (shp * shp)));
    return bc;
}

}  // namespace magnomech
