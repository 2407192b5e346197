// Benchmark: OpenMP row-parallel rhs kernel vs the serial dense reference.

#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <iostream>

#include "magnomech/engine.hpp"
#include "magnomech/runner.hpp"

using namespace magnomech;

int main(int argc, char** argv) {
    int n_phonon = argc > 1 ? std::atoi(argv[1]) : 8;
    int n_magnon = argc > 2 ? std::atoi(argv[2]) : 8;
    int reps = argc > 3 ? std::atoi(argv[3]) : 50;

    ScenarioConfig cfg = default_config(ScenarioId::fig2e);
    cfg.Q_x = 1e3;
    FrameInputs in{};
    in.omega_x = cfg.omega_x;
    in.omega_K = cfg.omega_K;
    in.g = cfg.g;
    in.temperature = cfg.temperature;
    in.Q_x = cfg.Q_x;
    in.gamma_s = cfg.gamma_s;
    in.resonance_r_p = cfg.r_p;
    FrameParams fp = frame_params(in);

    SpaceLayout layout = SpaceLayout::phonon_magnon(n_phonon, n_magnon);
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
    Matrix rho_t = rho.transpose();  // row-major view of rho
    std::vector<Complex> out(static_cast<size_t>(n) * n);

    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    for (int r = 0; r < reps; ++r) sys.rhs(rho_t.data(), 1e-10 * r, out.data(), ws);
    double parallel_s = std::chrono::duration<double>(clock::now() - t0).count() / reps;

    Matrix ref(n, n);
    t0 = clock::now();
    for (int r = 0; r < reps; ++r) sys.rhs_reference(rho, 1e-10 * r, ref);
    double serial_s = std::chrono::duration<double>(clock::now() - t0).count() / reps;

    double diff = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            diff = std::max(diff, std::abs(out[static_cast<size_t>(i) * n + j] - ref(i, j)));
        }
    }

    std::cout << "dim " << n << " (" << n_phonon << "x" << n_magnon << "), threads "
              << omp_get_max_threads() << "\n"
              << "parallel kernel  " << parallel_s * 1e6 << " us/call\n"
              << "serial reference " << serial_s * 1e6 << " us/call\n"
              << "speedup " << serial_s / parallel_s << "x, max diff " << diff << "\n";
    return 0;
}
