#include <doctest.h>

#include <cmath>

#include "magnomech/params.hpp"

using namespace magnomech;

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

CantileverParams cantilever() {
    return {4e-6, 0.1e-6, 0.02e-6, 1.22e12, 3.52e3, 1e8, 2.17e-18, 2.24e-18};
}

FrameInputs canonical_inputs(double r_p) {
    FrameInputs in{};
    in.omega_x = kTwoPi * 3.8e6;
    in.omega_K = kTwoPi * 2.35e9;
    in.g = kTwoPi * 0.69e6;
    in.lambda = kTwoPi * 0.69e6;
    in.temperature = 0.01;
    in.Q_x = 1e8;
    in.gamma_s = kTwoPi * 1e6;
    in.resonance_r_p = r_p;
    return in;
}

}  // namespace

TEST_CASE("cantilever fundamental frequency") {
    // frozen: diamond beam 4 x 0.1 x 0.02 um -> 3.7592 MHz
    double wx = cantilever_frequency(cantilever());
    CHECK(wx / kTwoPi == doctest::Approx(3.75921333e6).epsilon(1e-6));
    CantileverParams bad = cantilever();
    bad.length = 0.0;
    CHECK_THROWS_AS(cantilever_frequency(bad), DomainError);
}

TEST_CASE("effective mass and zero-point motion") {
    double m = effective_mass(cantilever());
    // beam contribution rho*l*w*t/4 = 7.04e-18 kg plus magnet and tip masses
    CHECK(m == doctest::Approx(7.04e-18 + 2.17e-18 + 2.24e-18).epsilon(1e-9));
    double x = zero_point_motion(m, kTwoPi * 3.8e6);
    CHECK(x == doctest::Approx(4.392e-13).epsilon(1e-3));
}

TEST_CASE("kittel zero-point magnetization and couplings") {
    double v = sphere_volume(100e-9);
    CHECK(v == doctest::Approx(4.18879e-21).epsilon(1e-5));
    double mk = kittel_zero_point_magnetization(0.74 / Constants::mu_0, v);
    CHECK(mk == doctest::Approx(36.06).epsilon(1e-2));

    double g = magnon_mechanical_coupling(1e7, 2.69e-13, mk, v);
    CHECK(g / kTwoPi == doctest::Approx(3.07e8).epsilon(1e-2));
    CHECK(magnon_mechanical_coupling(1e7, 2.69e-13, mk, v, 42.0) == 42.0);

    double lam = spin_mechanical_coupling(4.5e7, 2.69e-13);
    CHECK(lam / kTwoPi == doctest::Approx(3.39e5).epsilon(1e-2));
}

TEST_CASE("nv frequency and level crossing") {
    double w = nv_frequency(0.084, kTwoPi * 2.87e9);
    CHECK(w / kTwoPi == doctest::Approx(5.19e8).epsilon(1e-2));
    CHECK_THROWS_AS(nv_frequency(0.2, kTwoPi * 2.87e9), DomainError);
}

TEST_CASE("thermal occupation") {
    CHECK(thermal_occupation(kTwoPi * 3.8e6, 0.01) == doctest::Approx(54.3347).epsilon(1e-4));
    CHECK(thermal_occupation(kTwoPi * 2.35e9, 0.01) == doctest::Approx(1.27e-5).epsilon(2e-2));
    CHECK(thermal_occupation(kTwoPi * 1e9, 0.0) == 0.0);
    CHECK_THROWS_AS(thermal_occupation(kTwoPi * 1e9, -1.0), DomainError);
}

TEST_CASE("squeezing parameter and parametric threshold") {
    double r = squeezing_parameter(0.9, 1.0);
    CHECK(std::tanh(2.0 * r) == doctest::Approx(0.9));
    CHECK_THROWS_AS(squeezing_parameter(1.0, 1.0), InstabilityError);
    CHECK_THROWS_AS(squeezing_parameter(1.0, 0.0), DomainError);
}

TEST_CASE("resonance pump reproduces canonical operating point") {
    PumpSolution p = resonance_pump(kTwoPi * 3.8e6, kTwoPi * 2.35e9, 2.5);
    // frozen: pump at 2.38205 GHz with amplitude 2.37803 GHz
    CHECK(p.omega_p / kTwoPi == doctest::Approx(2.38204756e9).epsilon(1e-6));
    CHECK(p.Omega_p / kTwoPi == doctest::Approx(2.37803162e9).epsilon(1e-6));
    // round trip through the squeezing-parameter solve
    double r = squeezing_parameter(p.Omega_p, kTwoPi * 3.8e6 - p.omega_p);
    CHECK(r == doctest::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("frame parameters at the resonance-constrained operating point") {
    FrameParams fp = frame_params(canonical_inputs(2.5));
    CHECK(fp.g_r == doctest::Approx(fp.g * std::cosh(2.5)));
    CHECK(fp.g_c == doctest::Approx(fp.g * std::sinh(2.5)));
    CHECK(fp.Delta_s == doctest::Approx(fp.Delta_x / std::cosh(5.0)));
    CHECK(fp.Delta_s == doctest::Approx(fp.Delta_K).epsilon(1e-9));  // resonance
    CHECK(fp.Delta_x < 0.0);
    CHECK(fp.nbar_x_s == doctest::Approx(4068.8).epsilon(1e-3));
    // pump amplitude used in Hamiltonians equals |Delta_x| tanh(2 r_p) > 0
    CHECK(fp.signed_pump() == doctest::Approx(fp.Omega_p).epsilon(1e-12));
    CHECK(fp.signed_pump() > 0.0);
    CHECK(fp.gamma_x == doctest::Approx(kTwoPi * 0.038).epsilon(1e-6));
}

TEST_CASE("frame from detunings is self-consistent") {
    DetuningFrameInputs in{};
    in.r_p = 1.54;
    double g_r = kTwoPi * 0.69e6 * std::cosh(1.54);
    in.Delta_s = -55.0 * g_r;
    in.Delta_K = -45.0 * g_r;
    in.Delta_NV = -45.0 * g_r;
    in.g = kTwoPi * 0.69e6;
    in.lambda = kTwoPi * 0.69e6;
    in.omega_x = kTwoPi * 3.8e6;
    in.temperature = 0.01;
    in.Q_x = 1e8;
    in.gamma_s = kTwoPi * 0.1e6;
    FrameParams fp = frame_from_detunings(in);

    CHECK(fp.Delta_x == doctest::Approx(in.Delta_s * std::cosh(2.0 * 1.54)));
    CHECK(fp.omega_p == doctest::Approx(fp.omega_x - fp.Delta_x));
    CHECK(fp.omega_K == doctest::Approx(fp.omega_p + in.Delta_K));
    CHECK(fp.omega_NV == doctest::Approx(fp.omega_p + in.Delta_NV));
    CHECK(fp.g_r / kTwoPi == doctest::Approx(1.683e6).epsilon(1e-3));

    // dispersive chain ratios are exactly 10 at this operating point
    DispersiveReport dr = dispersive_validity(fp);
    CHECK(dr.pass);
    for (const auto& e : dr.entries) {
        CHECK(e.ratio == doctest::Approx(10.0).epsilon(1e-9));
    }

    EffectiveMSParams ep = effective_ms_params(fp);
    CHECK(ep.Delta_k == doctest::Approx(fp.g_r / 10.0));
    CHECK(ep.Delta_n == doctest::Approx(fp.g_r / 10.0));
    CHECK(ep.g_ms == doctest::Approx(fp.g_r / 10.0));
}

TEST_CASE("regime classification") {
    FrameParams fp25 = frame_params(canonical_inputs(2.5));
    RegimeReport rep25 = regime_classify(fp25, kTwoPi * 1e6);
    CHECK(rep25.g_over_gamma_s == doctest::Approx(0.69 * std::cosh(2.5)).epsilon(1e-6));
    CHECK(rep25.regime == Regime::UCR);  // g_r/|Delta_s| = 0.132 > 0.1

    FrameParams fp1 = frame_params(canonical_inputs(1.0));
    CHECK(regime_classify(fp1, kTwoPi * 1e6).regime == Regime::SCR);

    FrameParams fp05 = frame_params(canonical_inputs(0.5));
    CHECK(regime_classify(fp05, kTwoPi * 1e6).regime == Regime::WCR);
}

TEST_CASE("cooperativity values") {
    double gx = kTwoPi * 3.8e6 / 1e5;  // Q = 1e5
    double c0 = cooperativity(kTwoPi * 0.69e6, gx, kTwoPi * 1e6, 54.3347);
    CHECK(c0 == doctest::Approx(905.7).epsilon(1e-2));
    FrameParams fp = frame_params(canonical_inputs(2.5));
    double cr = cooperativity(fp.g_r, gx, kTwoPi * 1e6, fp.nbar_x_s);
    CHECK(cr / c0 == doctest::Approx(0.511).epsilon(2e-2));
    CHECK_THROWS_AS(cooperativity(1.0, 0.0, 1.0, 0.0), DomainError);
}

TEST_CASE("rwa ratios") {
    FrameParams fp = frame_params(canonical_inputs(2.5));
    RwaRatios rr = rwa_ratios(fp);
    CHECK(rr.two_delta_s == doctest::Approx(15.15).epsilon(1e-2));
    CHECK(rr.two_pump > 1000.0);
    CHECK(rr.min_ratio() == rr.two_delta_s);
}

TEST_CASE("squeezed reservoir coefficients") {
    double nbar = 55.0, r_p = 2.5;
    BathCoefficients plain = squeezed_bath_coefficients(nbar, r_p, 0.0, 0.0);
    CHECK(plain.N_s ==
          doctest::Approx(nbar * std::cosh(5.0) + std::sinh(2.5) * std::sinh(2.5)));
    CHECK(plain.M_s.real() ==
          doctest::Approx(-(2.0 * nbar + 1.0) * 0.5 * std::sinh(5.0)));
    CHECK(plain.M_s.imag() == doctest::Approx(0.0));
    // physicality bound
    CHECK(std::abs(plain.M_s) <= std::sqrt(plain.N_s * (plain.N_s + 1.0)));

    // matched engineered reservoir cancels the amplified noise exactly
    BathCoefficients matched =
        squeezed_bath_coefficients(nbar, r_p, r_p, 3.14159265358979323846);
    // the cancellation runs through terms of order nbar*cosh^2(2 r_p), so
    // roundoff leaves a relative residual of a few 1e-13
    CHECK(matched.N_s == doctest::Approx(nbar).epsilon(1e-10));
    CHECK(std::abs(matched.M_s) < 1e-9 * (2.0 * nbar + 1.0));

    CHECK_THROWS_AS(squeezed_bath_coefficients(-1.0, 1.0, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(squeezed_bath_coefficients(1.0, 1.0, -0.5, 0.0), DomainError);
}
