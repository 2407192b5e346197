#include "magnomech/model.hpp"

#include <algorithm>
#include <cmath>

namespace magnomech {

namespace {

struct Slots {
    int spin = -1;
    int phonon = -1;
    int magnon = -1;
};

// Factor roles by position: a leading two-level factor is the spin; the
// first boson is the phonon and the second the magnon, except in the
// spin+boson reduced layout where the single boson is the magnon.
Slots find_slots(const SpaceLayout& layout) {
    Slots s;
    std::vector<int> bosons;
    for (int i = 0; i < layout.num_factors(); ++i) {
        if (layout.factor(i).kind == Factor::Kind::TwoLevel) {
            if (s.spin >= 0) throw LayoutError("layout has more than one two-level factor");
            s.spin = i;
        } else {
            bosons.push_back(i);
        }
    }
    if (bosons.size() == 2) {
        s.phonon = bosons[0];
        s.magnon = bosons[1];
    } else if (bosons.size() == 1 && s.spin >= 0) {
        s.magnon = bosons[0];
    } else {
        throw LayoutError("layout must have two bosons or one spin and one boson");
    }
    return s;
}

Op embedded_annihilation(const SpaceLayout& layout, int slot) {
    return embed(boson_annihilation(layout.factor(slot).dim), layout, slot);
}

void add_number_term(TimeDependentHamiltonian& h, const Op& mode, double coeff) {
    h.terms.push_back({Op(mode.layout, mode.matrix.adjoint() * mode.matrix, true),
                       Complex(coeff, 0.0), 0.0, false});
}

}  // namespace

Matrix TimeDependentHamiltonian::at(double t) const {
    Matrix h = Matrix::Zero(layout.total_dim(), layout.total_dim());
    for (const auto& term : terms) {
        Complex phase = std::exp(Complex(0.0, term.nu * t)) * term.amplitude;
        h += phase * term.op.matrix;
        if (term.plus_hc) {
            h += (std::conj(phase) * term.op.matrix.adjoint()).eval();
        }
    }
    return h;
}

Matrix TimeDependentHamiltonian::static_part() const {
    Matrix h = Matrix::Zero(layout.total_dim(), layout.total_dim());
    for (const auto& term : terms) {
        if (term.nu != 0.0) continue;
        h += term.amplitude * term.op.matrix;
        if (term.plus_hc) {
            h += (std::conj(term.amplitude) * term.op.matrix.adjoint()).eval();
        }
    }
    return h;
}

double TimeDependentHamiltonian::nu_max() const {
    double m = 0.0;
    for (const auto& term : terms) m = std::max(m, std::abs(term.nu));
    return m;
}

TimeDependentHamiltonian TimeDependentHamiltonian::with_rwa() const {
    TimeDependentHamiltonian out{layout, {}, true};
    for (const auto& term : terms) {
        if (term.nu == 0.0) out.terms.push_back(term);
    }
    return out;
}

DissipatorSpec DissipatorSpec::thermal(Op jump, double rate, double occupation) {
    if (rate < 0.0) throw BathError("dissipator rate must be nonnegative");
    if (occupation < 0.0) throw BathError("thermal occupation must be nonnegative");
    return {Kind::Thermal, std::move(jump), rate, occupation, 0.0};
}

DissipatorSpec DissipatorSpec::dephasing(Op sigma_z, double rate) {
    if (rate < 0.0) throw BathError("dephasing rate must be nonnegative");
    return {Kind::Dephasing, std::move(sigma_z), rate, 0.0, 0.0};
}

DissipatorSpec DissipatorSpec::squeezed_reservoir(Op jump, double rate, double N, Complex M) {
    if (rate < 0.0) throw BathError("dissipator rate must be nonnegative");
    if (N < 0.0) throw BathError("reservoir occupation must be nonnegative");
    if (std::abs(M) > std::sqrt(N * (N + 1.0)) + 1e-9) {
        throw BathError("unphysical squeezed reservoir: |M| exceeds sqrt(N(N+1))");
    }
    return {Kind::SqueezedReservoir, std::move(jump), rate, N, M};
}

TimeDependentHamiltonian build_mm_rotating(const FrameParams& fp, const SpaceLayout& layout) {
    Slots sl = find_slots(layout);
    if (sl.spin >= 0 || sl.phonon < 0) throw LayoutError("build_mm_rotating: bipartite layout required");
    Op b = embedded_annihilation(layout, sl.phonon);
    Op s = embedded_annihilation(layout, sl.magnon);

    TimeDependentHamiltonian h{layout, {}, false};
    add_number_term(h, b, fp.Delta_x);
    add_number_term(h, s, fp.Delta_K);
    h.terms.push_back({b * b, Complex(-0.5 * fp.signed_pump(), 0.0), 0.0, true});
    Op bsd = Op(layout, b.matrix * s.matrix.adjoint());
    Op bdsd = Op(layout, b.matrix.adjoint() * s.matrix.adjoint());
    h.terms.push_back({bsd, Complex(fp.g, 0.0), 0.0, true});
    h.terms.push_back({bdsd, Complex(fp.g, 0.0), 2.0 * fp.omega_p, true});
    return h;
}

TimeDependentHamiltonian build_mm_squeezed(const FrameParams& fp, const SpaceLayout& layout) {
    Slots sl = find_slots(layout);
    if (sl.spin >= 0 || sl.phonon < 0) throw LayoutError("build_mm_squeezed: bipartite layout required");
    Op b = embedded_annihilation(layout, sl.phonon);
    Op s = embedded_annihilation(layout, sl.magnon);

    TimeDependentHamiltonian h{layout, {}, false};
    add_number_term(h, b, fp.Delta_s);
    add_number_term(h, s, fp.Delta_K);
    Op bsd = Op(layout, b.matrix * s.matrix.adjoint());
    Op bdsd = Op(layout, b.matrix.adjoint() * s.matrix.adjoint());
    double nu = 2.0 * fp.omega_p;
    h.terms.push_back({bsd, Complex(fp.g_r, 0.0), 0.0, true});
    h.terms.push_back({bdsd, Complex(fp.g_r, 0.0), nu, true});
    h.terms.push_back({bdsd, Complex(-fp.g_c, 0.0), 0.0, true});
    h.terms.push_back({bsd, Complex(-fp.g_c, 0.0), nu, true});
    return h;
}

TimeDependentHamiltonian build_mm_jc(const FrameParams& fp, const SpaceLayout& layout,
                                     double resonance_tol) {
    Slots sl = find_slots(layout);
    if (sl.spin >= 0 || sl.phonon < 0) throw LayoutError("build_mm_jc: bipartite layout required");
    double scale = std::max(std::abs(fp.Delta_s), std::abs(fp.Delta_K));
    if (std::abs(fp.Delta_s - fp.Delta_K) > resonance_tol * scale) {
        throw DomainError("build_mm_jc: squeezed phonon and magnon are off resonance");
    }
    Op b = embedded_annihilation(layout, sl.phonon);
    Op s = embedded_annihilation(layout, sl.magnon);

    TimeDependentHamiltonian h{layout, {}, false};
    add_number_term(h, b, fp.Delta_s);
    add_number_term(h, s, fp.Delta_K);
    h.terms.push_back({Op(layout, b.matrix * s.matrix.adjoint()), Complex(fp.g_r, 0.0), 0.0, true});
    return h;
}

TimeDependentHamiltonian build_hybrid_squeezed(const FrameParams& fp, const SpaceLayout& layout,
                                               bool rwa) {
    Slots sl = find_slots(layout);
    if (sl.spin < 0 || sl.phonon < 0) throw LayoutError("build_hybrid_squeezed: tripartite layout required");
    Op b = embedded_annihilation(layout, sl.phonon);
    Op s = embedded_annihilation(layout, sl.magnon);
    Op sz = embed(two_level_ops().sigma_z, layout, sl.spin);
    Op sp = embed(two_level_ops().sigma_plus, layout, sl.spin);

    TimeDependentHamiltonian h{layout, {}, false};
    add_number_term(h, b, fp.Delta_s);
    add_number_term(h, s, fp.Delta_K);
    h.terms.push_back({sz, Complex(0.5 * fp.Delta_NV, 0.0), 0.0, false});

    double nu = 2.0 * fp.omega_p;
    Op bsd = Op(layout, b.matrix * s.matrix.adjoint());
    Op bdsd = Op(layout, b.matrix.adjoint() * s.matrix.adjoint());
    h.terms.push_back({bsd, Complex(fp.g_r, 0.0), 0.0, true});
    h.terms.push_back({bdsd, Complex(fp.g_r, 0.0), nu, true});
    h.terms.push_back({bdsd, Complex(-fp.g_c, 0.0), 0.0, true});
    h.terms.push_back({bsd, Complex(-fp.g_c, 0.0), nu, true});

    Op bsp = Op(layout, b.matrix * sp.matrix);
    Op bdsp = Op(layout, b.matrix.adjoint() * sp.matrix);
    h.terms.push_back({bsp, Complex(fp.lambda_r, 0.0), 0.0, true});
    h.terms.push_back({bdsp, Complex(fp.lambda_r, 0.0), nu, true});
    h.terms.push_back({bdsp, Complex(-fp.lambda_c, 0.0), 0.0, true});
    h.terms.push_back({bsp, Complex(-fp.lambda_c, 0.0), nu, true});
    return rwa ? h.with_rwa() : h;
}

TimeDependentHamiltonian build_ms_effective(const EffectiveMSParams& ep,
                                            const SpaceLayout& layout) {
    Slots sl = find_slots(layout);
    if (sl.spin < 0 || sl.magnon < 0 || sl.phonon >= 0) {
        throw LayoutError("build_ms_effective: spin+magnon layout required");
    }
    Op s = embedded_annihilation(layout, sl.magnon);
    TwoLevelOps tlo = two_level_ops();
    Op sp = embed(tlo.sigma_plus, layout, sl.spin);
    Op sm = embed(tlo.sigma_minus, layout, sl.spin);

    TimeDependentHamiltonian h{layout, {}, false};
    add_number_term(h, s, ep.Delta_k);
    h.terms.push_back({Op(layout, sp.matrix * sm.matrix, true), Complex(ep.Delta_n, 0.0), 0.0, false});
    h.terms.push_back({Op(layout, s.matrix.adjoint() * sm.matrix), Complex(ep.g_ms, 0.0), 0.0, true});
    return h;
}

std::vector<DissipatorSpec> build_dissipators(const FrameParams& fp, const SpaceLayout& layout,
                                              const BathOptions& options) {
    Slots sl = find_slots(layout);
    std::vector<DissipatorSpec> out;

    if (sl.phonon >= 0) {
        Op b = embedded_annihilation(layout, sl.phonon);
        if (options.svr) {
            auto [r_e, theta_e] = *options.svr;
            BathCoefficients bc = squeezed_bath_coefficients(fp.nbar_x, fp.r_p, r_e, theta_e);
            double tol = 1e-9 * (2.0 * fp.nbar_x + 1.0);
            if (std::abs(bc.M_s) <= tol && std::abs(bc.N_s - fp.nbar_x) <= tol) {
                // Matched reservoir: the amplified noise cancels exactly and
                // the bath is thermal at the bare occupation.
                out.push_back(DissipatorSpec::thermal(b, fp.gamma_x, fp.nbar_x));
            } else {
                out.push_back(DissipatorSpec::squeezed_reservoir(b, fp.gamma_x, bc.N_s, bc.M_s));
            }
        } else if (options.strict_two_phonon) {
            BathCoefficients bc = squeezed_bath_coefficients(fp.nbar_x, fp.r_p, 0.0, 0.0);
            out.push_back(DissipatorSpec::squeezed_reservoir(b, fp.gamma_x, bc.N_s, bc.M_s));
        } else {
            out.push_back(DissipatorSpec::thermal(b, fp.gamma_x, fp.nbar_x_s));
        }
    }

    out.push_back(DissipatorSpec::thermal(embedded_annihilation(layout, sl.magnon), fp.gamma_s,
                                          fp.nbar_s));

    if (options.dephasing) {
        if (sl.spin < 0) throw LayoutError("build_dissipators: dephasing requires a spin factor");
        out.push_back(DissipatorSpec::dephasing(embed(two_level_ops().sigma_z, layout, sl.spin),
                                                *options.dephasing));
    }
    return out;
}

FrameOracleReport frame_oracle(const FrameParams& fp, int phonon_truncation, int interior,
                               int magnon_truncation) {
    SpaceLayout layout = SpaceLayout::phonon_magnon(phonon_truncation, magnon_truncation);
    Matrix h_rot = build_mm_rotating(fp, layout).static_part();
    Matrix h_sq = build_mm_squeezed(fp, layout).static_part();
    Op u = embed(squeeze_operator(phonon_truncation, fp.r_p), layout, 0);
    Matrix conj = u.matrix.adjoint() * h_rot * u.matrix;

    Matrix diff = conj - h_sq;
    Complex shift = diff(0, 0);  // squeeze conjugation produces a c-number offset
    int d = interior * magnon_truncation;
    double dev = (diff.topLeftCorner(d, d) - shift * Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
    return {dev, std::abs(fp.Delta_x)};
}

}  // namespace magnomech
