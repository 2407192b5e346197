#pragma once

// Hamiltonian and dissipator construction for the hybrid system: rotating
// frame, squeezed frame, Jaynes-Cummings reduction, tripartite model,
// effective magnon-spin model, thermal/dephasing/engineered-reservoir baths,
// and the squeeze-conjugation oracle.

#include <optional>
#include <utility>
#include <vector>

#include "magnomech/operators.hpp"
#include "magnomech/params.hpp"

namespace magnomech {

// One term amplitude * e^{i nu t} * op, optionally plus its conjugate
// transpose counterpart amplitude^* e^{-i nu t} op^dag.
struct HTerm {
    Op op;
    Complex amplitude;  // rad/s
    double nu = 0.0;    // rad/s
    bool plus_hc = false;
};

struct TimeDependentHamiltonian {
    SpaceLayout layout;
    std::vector<HTerm> terms;
    bool rwa_dropped = false;

    Matrix at(double t) const;
    Matrix static_part() const;  // nu = 0 terms only
    double nu_max() const;
    TimeDependentHamiltonian with_rwa() const;  // drop all nu != 0 terms
};

struct DissipatorSpec {
    enum class Kind { Thermal, Dephasing, SqueezedReservoir };
    Kind kind;
    Op jump;            // mode operator (b_s, s) or sigma_z for dephasing
    double rate;        // rad/s
    double occupation;  // N for Thermal / SqueezedReservoir, unused for Dephasing
    Complex correlation;  // M for SqueezedReservoir, 0 otherwise

    static DissipatorSpec thermal(Op jump, double rate, double occupation);
    static DissipatorSpec dephasing(Op sigma_z, double rate);
    static DissipatorSpec squeezed_reservoir(Op jump, double rate, double N, Complex M);
};

struct BathOptions {
    // Engineered squeezed-vacuum reservoir (r_e, theta_e); absent = plain
    // thermal bath with the amplified occupation.
    std::optional<std::pair<double, double>> svr;
    std::optional<double> dephasing;  // gamma_z
    // Keep the two-phonon correlation terms that the weak-dissipation RWA
    // normally discards when no SVR is present.
    bool strict_two_phonon = false;
};

TimeDependentHamiltonian build_mm_rotating(const FrameParams& fp, const SpaceLayout& layout);
TimeDependentHamiltonian build_mm_squeezed(const FrameParams& fp, const SpaceLayout& layout);
TimeDependentHamiltonian build_mm_jc(const FrameParams& fp, const SpaceLayout& layout,
                                     double resonance_tol = 1e-9);
TimeDependentHamiltonian build_hybrid_squeezed(const FrameParams& fp, const SpaceLayout& layout,
                                               bool rwa = false);
TimeDependentHamiltonian build_ms_effective(const EffectiveMSParams& ep,
                                            const SpaceLayout& layout);

std::vector<DissipatorSpec> build_dissipators(const FrameParams& fp, const SpaceLayout& layout,
                                              const BathOptions& options = {});

struct FrameOracleReport {
    double max_deviation;  // rad/s, on the interior block, identity shift removed
    double scale;          // |Delta_x| reference scale
};

// Conjugates the static rotating-frame Hamiltonian by the squeeze operator
// and compares against the static squeezed-frame Hamiltonian on the interior
// phonon block.
FrameOracleReport frame_oracle(const FrameParams& fp, int phonon_truncation, int interior,
                               int magnon_truncation = 2);

}  // namespace magnomech
