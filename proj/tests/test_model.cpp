#include <doctest.h>

#include <cmath>

#include "magnomech/model.hpp"

using namespace magnomech;

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
constexpr double kPi = 3.14159265358979323846;

FrameParams resonance_frame(double r_p, double Q_x = 1e8) {
    FrameInputs in{};
    in.omega_x = kTwoPi * 3.8e6;
    in.omega_K = kTwoPi * 2.35e9;
    in.g = kTwoPi * 0.69e6;
    in.lambda = kTwoPi * 0.69e6;
    in.temperature = 0.01;
    in.Q_x = Q_x;
    in.gamma_s = kTwoPi * 1e6;
    in.resonance_r_p = r_p;
    return frame_params(in);
}

FrameParams dispersive_frame() {
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
    return frame_from_detunings(in);
}

double herm_dev(const Matrix& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("rotating-frame Hamiltonian structure") {
    FrameParams fp = resonance_frame(2.5);
    SpaceLayout layout = SpaceLayout::phonon_magnon(4, 4);
    TimeDependentHamiltonian h = build_mm_rotating(fp, layout);
    CHECK(h.terms.size() == 5);
    CHECK(h.nu_max() == doctest::Approx(2.0 * fp.omega_p));
    for (double t : {0.0, 1.3e-10, 7.7e-9}) {
        CHECK(herm_dev(h.at(t)) < 1e-6 * std::abs(fp.Delta_x));
    }
    CHECK_THROWS_AS(build_mm_rotating(fp, SpaceLayout::spin_phonon_magnon(3, 3)), LayoutError);
}

TEST_CASE("squeezed-frame Hamiltonian structure and r_p = 0 limit") {
    FrameParams fp = resonance_frame(2.5);
    SpaceLayout layout = SpaceLayout::phonon_magnon(4, 4);
    TimeDependentHamiltonian h = build_mm_squeezed(fp, layout);
    CHECK(h.terms.size() == 6);
    for (double t : {0.0, 1.3e-10, 7.7e-9}) {
        CHECK(herm_dev(h.at(t)) < 1e-6 * std::abs(fp.Delta_x));
    }

    // at r_p = 0 the squeezed frame reduces to the rotating frame
    DetuningFrameInputs in{};
    in.r_p = 0.0;
    in.Delta_s = -kTwoPi * 3e7;
    in.Delta_K = -kTwoPi * 3e7;
    in.Delta_NV = 0.0;
    in.g = kTwoPi * 0.69e6;
    in.lambda = 0.0;
    in.omega_x = kTwoPi * 3.8e6;
    in.temperature = 0.01;
    in.Q_x = 1e8;
    in.gamma_s = kTwoPi * 1e6;
    FrameParams flat = frame_from_detunings(in);
    TimeDependentHamiltonian hs = build_mm_squeezed(flat, layout);
    TimeDependentHamiltonian hr = build_mm_rotating(flat, layout);
    for (double t : {0.0, 3.1e-10, 5.9e-9}) {
        CHECK((hs.at(t) - hr.at(t)).cwiseAbs().maxCoeff() < 1e-9 * std::abs(flat.Delta_s));
    }
}

TEST_CASE("jc reduction requires resonance") {
    FrameParams fp = resonance_frame(2.5);
    SpaceLayout layout = SpaceLayout::phonon_magnon(3, 3);
    TimeDependentHamiltonian h = build_mm_jc(fp, layout);
    CHECK(h.terms.size() == 3);
    CHECK(h.nu_max() == 0.0);

    FrameParams off = dispersive_frame();  // Delta_s != Delta_K
    CHECK_THROWS_AS(build_mm_jc(off, layout), DomainError);
}

TEST_CASE("tripartite Hamiltonian and rwa flag") {
    FrameParams fp = dispersive_frame();
    SpaceLayout layout = SpaceLayout::spin_phonon_magnon(3, 3);
    TimeDependentHamiltonian full = build_hybrid_squeezed(fp, layout, false);
    CHECK(full.terms.size() == 11);
    CHECK_FALSE(full.rwa_dropped);
    for (double t : {0.0, 1.3e-10}) {
        CHECK(herm_dev(full.at(t)) < 1e-6 * std::abs(fp.Delta_x));
    }

    TimeDependentHamiltonian rwa = build_hybrid_squeezed(fp, layout, true);
    CHECK(rwa.rwa_dropped);
    CHECK(rwa.nu_max() == 0.0);
    CHECK(rwa.terms.size() == 7);
    // static parts agree
    CHECK((rwa.static_part() - full.static_part()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("effective magnon-spin model") {
    FrameParams fp = dispersive_frame();
    EffectiveMSParams ep = effective_ms_params(fp);
    SpaceLayout layout = SpaceLayout::spin_magnon(4);
    TimeDependentHamiltonian h = build_ms_effective(ep, layout);
    CHECK(h.terms.size() == 3);
    CHECK(h.nu_max() == 0.0);
    CHECK(herm_dev(h.at(0.0)) < 1e-9 * ep.g_ms);
    CHECK_THROWS_AS(build_ms_effective(ep, SpaceLayout::phonon_magnon(3, 3)), LayoutError);
}

TEST_CASE("dissipator spec validation") {
    Op a = boson_annihilation(4);
    CHECK_THROWS_AS(DissipatorSpec::thermal(a, -1.0, 0.0), BathError);
    CHECK_THROWS_AS(DissipatorSpec::thermal(a, 1.0, -0.1), BathError);
    // |M| bound: N = 1 allows |M| up to sqrt(2)
    CHECK_THROWS_AS(DissipatorSpec::squeezed_reservoir(a, 1.0, 1.0, Complex(1.5, 0.0)),
                    BathError);
    CHECK_NOTHROW(DissipatorSpec::squeezed_reservoir(a, 1.0, 1.0, Complex(1.41, 0.0)));
}

TEST_CASE("bath assembly: default amplified thermal phonon bath") {
    FrameParams fp = resonance_frame(2.5, 1e3);
    SpaceLayout layout = SpaceLayout::phonon_magnon(4, 4);
    std::vector<DissipatorSpec> diss = build_dissipators(fp, layout, {});
    REQUIRE(diss.size() == 2);
    CHECK(diss[0].kind == DissipatorSpec::Kind::Thermal);
    CHECK(diss[0].occupation == doctest::Approx(fp.nbar_x_s));
    CHECK(diss[0].rate == doctest::Approx(fp.gamma_x));
    CHECK(diss[1].kind == DissipatorSpec::Kind::Thermal);
    CHECK(diss[1].occupation == doctest::Approx(fp.nbar_s));
    CHECK(diss[1].rate == doctest::Approx(fp.gamma_s));
}

TEST_CASE("bath assembly: matched engineered reservoir snaps to bare thermal") {
    FrameParams fp = resonance_frame(2.5, 1e3);
    SpaceLayout layout = SpaceLayout::phonon_magnon(4, 4);
    BathOptions opt{};
    opt.svr = {{fp.r_p, kPi}};
    std::vector<DissipatorSpec> diss = build_dissipators(fp, layout, opt);
    CHECK(diss[0].kind == DissipatorSpec::Kind::Thermal);
    CHECK(diss[0].occupation == fp.nbar_x);  // bit-exact snap

    // detuned reservoir phase keeps the correlated form
    opt.svr = {{fp.r_p, 0.5 * kPi}};
    std::vector<DissipatorSpec> off = build_dissipators(fp, layout, opt);
    CHECK(off[0].kind == DissipatorSpec::Kind::SqueezedReservoir);
    CHECK(std::abs(off[0].correlation) > 0.0);
}

TEST_CASE("bath assembly: strict two-phonon form and dephasing") {
    FrameParams fp = resonance_frame(2.5, 1e3);
    SpaceLayout pm = SpaceLayout::phonon_magnon(4, 4);
    BathOptions strict{};
    strict.strict_two_phonon = true;
    std::vector<DissipatorSpec> diss = build_dissipators(fp, pm, strict);
    CHECK(diss[0].kind == DissipatorSpec::Kind::SqueezedReservoir);
    CHECK(diss[0].occupation == doctest::Approx(fp.nbar_x_s));
    CHECK(diss[0].correlation.real() < 0.0);

    BathOptions deph{};
    deph.dephasing = kTwoPi * 1e3;
    CHECK_THROWS_AS(build_dissipators(fp, pm, deph), LayoutError);
    SpaceLayout spm = SpaceLayout::spin_phonon_magnon(3, 3);
    std::vector<DissipatorSpec> with_spin = build_dissipators(fp, spm, deph);
    REQUIRE(with_spin.size() == 3);
    CHECK(with_spin[2].kind == DissipatorSpec::Kind::Dephasing);
}

TEST_CASE("squeeze-conjugation oracle converges with truncation") {
    FrameParams fp = resonance_frame(0.5);
    double d30 = frame_oracle(fp, 30, 5).max_deviation;
    double d45 = frame_oracle(fp, 45, 5).max_deviation;
    double d60 = frame_oracle(fp, 60, 5).max_deviation;
    CHECK(d45 < d30);
    CHECK(d60 <= d45 * 1.001);
    CHECK(d60 < 1e-6 * std::abs(fp.Delta_x));
}
