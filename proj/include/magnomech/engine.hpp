#pragma once

// Lindblad master-equation integration. A LindbladSystem compiles the
// Hamiltonian term list and dissipator specs into sparse row-parallel form;
// evolve() drives fixed-step RK4 (default) or adaptive RK45 and samples
// observables with trace/Hermiticity/positivity diagnostics.

#include <string>
#include <vector>

#include "magnomech/model.hpp"
#include "magnomech/operators.hpp"

namespace magnomech {

struct IntegratorConfig {
    enum class Method { RK4, RK45 };
    Method method = Method::RK4;
    double dt = 0.0;        // s, fixed-step; clamped to 2*pi/(40*nu_max)
    double tolerance = 1e-8;  // RK45 local error control
    double t_end = 0.0;     // s
    int sample_stride = 1;  // RK4: record every k-th step
    long max_steps = 50'000'000;
    int eig_check_stride = 16;   // positivity check every k-th sample
    double trace_abort = 1e-6;
    bool reference_rhs = false;  // use the serial dense reference path
};

struct TimeSeries {
    std::vector<double> times;  // s, strictly increasing
    std::vector<std::string> labels;
    std::vector<std::vector<double>> values;  // one array per observable
    double trace_drift = 0.0;        // max |tr rho - 1| seen
    double min_eigenvalue = 1.0;     // min eigenvalue seen at checked samples
    double hermiticity_drift = 0.0;  // max |rho - rho^dag| seen

    int find_index(double t) const;  // nearest sample index
};

// Compressed-sparse-row complex matrix (row-parallel kernels).
struct Csr {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<Complex> val;

    static Csr from_dense(const Matrix& m);
};

class LindbladSystem {
  public:
    LindbladSystem(const TimeDependentHamiltonian& h, const std::vector<DissipatorSpec>& diss);

    int dim() const { return n_; }
    double nu_max() const { return nu_max_; }

    struct Workspace {
        std::vector<Complex> vals;  // phase-assembled coefficient values
        std::vector<Complex> y;     // C(t) * rho scratch
        explicit Workspace(const LindbladSystem& sys);
    };

    // drho/dt into `out`; row-major n x n arrays. OpenMP row-parallel,
    // deterministic independent of thread count.
    void rhs(const Complex* rho, double t, Complex* out, Workspace& ws) const;

    // Serial dense reference implementation (independent code path).
    void rhs_reference(const Matrix& rho, double t, Matrix& out) const;

  private:
    int n_;
    double nu_max_;

    // C(t) = -i H(t) - K with K the accumulated anticommutator part; the
    // unitary+anticommutator contribution to the rhs is C rho + (C rho)^dag.
    std::vector<int> c_row_ptr_, c_col_;
    std::vector<Complex> c_static_;
    struct PhaseGroup {
        double nu;
        std::vector<Complex> plus;   // coefficient of e^{+i nu t}
        std::vector<Complex> minus;  // coefficient of e^{-i nu t}
    };
    std::vector<PhaseGroup> groups_;

    // Jump channels w * L rho R.
    struct Channel {
        Complex weight;
        Csr left;
        Csr right;
    };
    std::vector<Channel> channels_;

    // Dense copies for the reference path.
    TimeDependentHamiltonian ham_;
    Matrix k_dense_;
    struct DenseChannel {
        Complex weight;
        Matrix left, right;
    };
    std::vector<DenseChannel> dense_channels_;

    friend struct Workspace;
};

Matrix lindblad_rhs(const State& rho, double t, const TimeDependentHamiltonian& h,
                    const std::vector<DissipatorSpec>& diss);

TimeSeries evolve(const State& rho0, const TimeDependentHamiltonian& h,
                  const std::vector<DissipatorSpec>& diss, const IntegratorConfig& cfg,
                  const std::vector<Op>& observables,
                  const std::vector<std::string>& labels = {});

// Max-norm of the rhs at the given state (fixed-point diagnostic), at t = 0.
double steady_check(const State& rho, const TimeDependentHamiltonian& h,
                    const std::vector<DissipatorSpec>& diss);

// Exact second-moment evolution of the squeezed-frame phonon-magnon model.
// The Hamiltonian is bilinear and the baths couple linearly, so the
// covariances <a_i^dag a_j> and <a_i a_j> close on themselves and no Fock
// truncation enters; this stays exact for bath occupations far beyond what a
// density-matrix basis can represent. Records n_phonon and n_magnon from the
// initial single excitation; `dt` must resolve the 2*omega_p phase.
TimeSeries evolve_bipartite_moments(const FrameParams& fp, const BathOptions& options,
                                    bool excite_magnon, double t_end, double dt,
                                    int sample_stride);

}  // namespace magnomech
