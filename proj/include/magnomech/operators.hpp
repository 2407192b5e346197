#pragma once

// Operator algebra on truncated tensor-product Hilbert spaces: mode operators,
// embeddings, expectation values, and a dense matrix exponential.

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magnomech/errors.hpp"

namespace magnomech {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

struct Factor {
    enum class Kind { Boson, TwoLevel };
    Kind kind;
    int dim;  // truncation for bosons, 2 for two-level systems
    std::string label;
};

class SpaceLayout {
  public:
    explicit SpaceLayout(std::vector<Factor> factors);

    static SpaceLayout boson(int truncation, std::string label = "mode");
    // Canonical layouts used throughout the model builders.
    static SpaceLayout phonon_magnon(int n_phonon, int n_magnon);
    static SpaceLayout spin_phonon_magnon(int n_phonon, int n_magnon);
    static SpaceLayout spin_magnon(int n_magnon);

    const std::vector<Factor>& factors() const { return factors_; }
    int total_dim() const { return total_dim_; }
    int num_factors() const { return static_cast<int>(factors_.size()); }
    const Factor& factor(int slot) const;

    bool operator==(const SpaceLayout& other) const;
    bool operator!=(const SpaceLayout& other) const { return !(*this == other); }

  private:
    std::vector<Factor> factors_;
    int total_dim_ = 0;
};

struct Op {
    SpaceLayout layout;
    Matrix matrix;
    bool hermitian = false;

    Op(SpaceLayout l, Matrix m, bool herm = false);

    Op dagger() const;
    Op operator*(const Op& rhs) const;
    Op operator+(const Op& rhs) const;
    Op operator-(const Op& rhs) const;
};

Op operator*(Complex scale, const Op& op);

class State {
  public:
    State(SpaceLayout layout, Matrix rho);

    static State vacuum(const SpaceLayout& layout);
    // One occupation number (0-based level) per factor.
    static State fock(const SpaceLayout& layout, const std::vector<int>& levels);
    static State thermal_boson(int truncation, double nbar);
    // Tensor product of per-factor density matrices, in layout order.
    static State product(const SpaceLayout& layout, const std::vector<Matrix>& factor_rhos);

    const SpaceLayout& layout() const { return layout_; }
    const Matrix& rho() const { return rho_; }

  private:
    SpaceLayout layout_;
    Matrix rho_;
};

// Single-factor builders (trivial layout of one factor).
Op boson_annihilation(int truncation);

struct TwoLevelOps {
    Op sigma_plus;   // |-1><0|, excited state at index 1
    Op sigma_minus;  // adjoint of sigma_plus
    Op sigma_z;      // |-1><-1| - |0><0|
};
TwoLevelOps two_level_ops();

Op identity(const SpaceLayout& layout);

// identity x ... x op x ... x identity with `op` placed at factor `slot`.
Op embed(const Op& op, const SpaceLayout& layout, int slot);

// Dense exp(A) via Pade scaling-and-squaring.
Matrix matrix_exponential(const Matrix& a);
Op matrix_exponential(const Op& a);

// exp(r (a^2 - a^dag^2)/2) on a single boson factor.
Op squeeze_operator(int truncation, double r);

Complex expectation(const State& state, const Op& op);

Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace magnomech
