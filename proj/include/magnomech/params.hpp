#pragma once

// Device-parameter derivation for the hybrid magnon-phonon-spin system:
// mode frequencies, couplings, pump/squeezing frame quantities, thermal
// occupations, coupling-regime diagnostics, and engineered-bath coefficients.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "magnomech/errors.hpp"

namespace magnomech {

struct Constants {
    static constexpr double hbar = 1.054571817e-34;          // J s
    static constexpr double k_B = 1.380649e-23;              // J/K
    static constexpr double mu_B = 9.2740100783e-24;         // J/T
    static constexpr double g_e = 2.0;
    static constexpr double mu_0 = 1.25663706212e-6;         // T m/A
    static constexpr double gamma_gyro = g_e * mu_B / hbar;  // rad/s/T
};

struct CantileverParams {
    double length;        // m
    double width;         // m
    double thickness;     // m
    double young_modulus; // Pa
    double mass_density;  // kg/m^3
    double Q_x;
    double magnet_mass;   // kg
    double tip_mass;      // kg
};

struct MagnonParams {
    double radius;        // m
    double mu0_Ms;        // T (saturation magnetization times mu_0)
    double B_z;           // T
    double B_z_local;     // T, local field offset at the magnet
    double gradient_b0;   // T/m
    double gamma_s;       // rad/s, magnon linewidth
};

struct SpinParams {
    double zfs = 2.0 * 3.14159265358979323846 * 2.87e9;  // rad/s
    double gradient_b1;                                  // T/m
    double gamma_z;                                      // rad/s, dephasing
    std::optional<double> omega_nv_override;             // rad/s
};

struct FrameParams {
    double omega_x, omega_K, omega_NV;   // rad/s
    double omega_p, Omega_p;             // rad/s; Omega_p stored as magnitude
    double Delta_x, Delta_K, Delta_NV, Delta_s;  // rad/s
    double r_p;
    double g, lambda, g_r, g_c, lambda_r, lambda_c;  // rad/s
    double nbar_x, nbar_s, nbar_x_s;
    double temperature;                  // K
    double gamma_x, gamma_s;             // rad/s

    // Pump amplitude with the sign of Delta_x, as used by the Hamiltonians.
    double signed_pump() const;
};

struct EffectiveMSParams {
    double Delta_k, Delta_n, g_ms;  // rad/s
};

enum class Regime { WCR, SCR, UCR };

std::string regime_name(Regime r);

struct RegimeReport {
    double g_over_gamma_s;
    double g_over_Delta_s;
    Regime regime;
    double C_r;        // cooperativity with the amplified occupation
    double C_r_prime;  // cooperativity with the bare occupation
};

struct RwaRatios {
    double two_delta_s;    // 2|Delta_s| / g_max
    double pump_plus_ds;   // 2(omega_p + Delta_s) / g_max
    double two_pump;       // 2 omega_p / g_max
    double min_ratio() const;
};

struct DispersiveReport {
    struct Entry {
        std::string name;
        double ratio;
        double required;
        bool pass;
    };
    std::vector<Entry> entries;
    bool pass;
};

struct BathCoefficients {
    double N_s;
    std::complex<double> M_s;
};

double cantilever_frequency(const CantileverParams& c);
double effective_mass(const CantileverParams& c);
double zero_point_motion(double m_eff, double omega_x);
double kittel_zero_point_magnetization(double Ms, double volume);
double sphere_volume(double radius);
double magnon_mechanical_coupling(double b0, double x_zpf, double M_K, double volume,
                                  std::optional<double> canonical_override = std::nullopt);
double spin_mechanical_coupling(double b1, double x_zpf,
                                std::optional<double> canonical_override = std::nullopt);
double nv_frequency(double B_z, double D);
double thermal_occupation(double omega, double temperature);
double squeezing_parameter(double Omega_p, double Delta_x);

struct PumpSolution {
    double omega_p;
    double Omega_p;  // magnitude
};
// Pump frequency/amplitude putting the squeezed phonon on resonance with the
// magnon (Delta_s = Delta_K) at the requested squeezing parameter.
PumpSolution resonance_pump(double omega_x, double omega_K, double r_p);

struct FrameInputs {
    double omega_x;    // rad/s
    double omega_K;    // rad/s
    double omega_NV = 0.0;  // rad/s; 0 when no spin is present
    double g;          // rad/s
    double lambda = 0.0;    // rad/s
    double temperature;     // K
    double Q_x;
    double gamma_s;    // rad/s

    // Pump specification: either explicit (omega_p, Omega_p) or a squeezing
    // parameter to be met with the resonance condition.
    struct ExplicitPump {
        double omega_p, Omega_p;
    };
    std::optional<ExplicitPump> pump;
    std::optional<double> resonance_r_p;
};

FrameParams frame_params(const FrameInputs& in);

struct DetuningFrameInputs {
    double r_p;
    double Delta_s;    // rad/s, signed
    double Delta_K;    // rad/s, signed
    double Delta_NV;   // rad/s, signed
    double g;          // rad/s
    double lambda;     // rad/s
    double omega_x;    // rad/s
    double temperature;
    double Q_x;
    double gamma_s;    // rad/s
};

// Frame specified directly through detunings (in rad/s), bypassing the
// resonance solve; used for the dispersive tripartite scenarios.
FrameParams frame_from_detunings(const DetuningFrameInputs& in);

double cooperativity(double g_r, double gamma_x, double gamma_s, double occupation);
RegimeReport regime_classify(const FrameParams& fp, double gamma_s);
RwaRatios rwa_ratios(const FrameParams& fp);
DispersiveReport dispersive_validity(const FrameParams& fp, double slow_factor = 5.0,
                                     double pump_factor = 5.0);
EffectiveMSParams effective_ms_params(const FrameParams& fp);
BathCoefficients squeezed_bath_coefficients(double nbar_x, double r_p, double r_e, double theta_e);

}  // namespace magnomech
