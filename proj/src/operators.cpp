#include "magnomech/operators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <utility>

namespace magnomech {

namespace {

constexpr double kHermTol = 1e-12;

void check_hermitian(const Matrix& m, double tol, const char* what) {
    double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (dev >= tol) {
        throw NumericError(std::string(what) + ": Hermiticity deviation " + std::to_string(dev));
    }
}

}  // namespace

SpaceLayout::SpaceLayout(std::vector<Factor> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) {
        throw LayoutError("SpaceLayout: no factors");
    }
    total_dim_ = 1;
    for (const auto& f : factors_) {
        if (f.kind == Factor::Kind::Boson && f.dim < 2) {
            throw LayoutError("SpaceLayout: boson truncation must be >= 2");
        }
        if (f.kind == Factor::Kind::TwoLevel && f.dim != 2) {
            throw LayoutError("SpaceLayout: two-level factor must have dim 2");
        }
        total_dim_ *= f.dim;
    }
}

SpaceLayout SpaceLayout::boson(int truncation, std::string label) {
    return SpaceLayout({{Factor::Kind::Boson, truncation, std::move(label)}});
}

SpaceLayout SpaceLayout::phonon_magnon(int n_phonon, int n_magnon) {
    return SpaceLayout({{Factor::Kind::Boson, n_phonon, "phonon"},
                        {Factor::Kind::Boson, n_magnon, "magnon"}});
}

SpaceLayout SpaceLayout::spin_phonon_magnon(int n_phonon, int n_magnon) {
    return SpaceLayout({{Factor::Kind::TwoLevel, 2, "spin"},
                        {Factor::Kind::Boson, n_phonon, "phonon"},
                        {Factor::Kind::Boson, n_magnon, "magnon"}});
}

SpaceLayout SpaceLayout::spin_magnon(int n_magnon) {
    return SpaceLayout({{Factor::Kind::TwoLevel, 2, "spin"},
                        {Factor::Kind::Boson, n_magnon, "magnon"}});
}

const Factor& SpaceLayout::factor(int slot) const {
    if (slot < 0 || slot >= num_factors()) {
        throw LayoutError("SpaceLayout: factor index out of range");
    }
    return factors_[static_cast<size_t>(slot)];
}

bool SpaceLayout::operator==(const SpaceLayout& other) const {
    if (factors_.size() != other.factors_.size()) return false;
    for (size_t i = 0; i < factors_.size(); ++i) {
        if (factors_[i].kind != other.factors_[i].kind) return false;
        if (factors_[i].dim != other.factors_[i].dim) return false;
    }
    return true;
}

Op::Op(SpaceLayout l, Matrix m, bool herm) : layout(std::move(l)), matrix(std::move(m)), hermitian(herm) {
    if (matrix.rows() != matrix.cols() || matrix.rows() != layout.total_dim()) {
        throw LayoutError("Op: matrix dimension does not match layout");
    }
    if (hermitian) {
        check_hermitian(matrix, kHermTol, "Op tagged hermitian");
    }
}

Op Op::dagger() const { return Op(layout, matrix.adjoint(), hermitian); }

Op Op::operator*(const Op& rhs) const {
    if (layout != rhs.layout) throw LayoutError("Op product: layout mismatch");
    return Op(layout, matrix * rhs.matrix);
}

Op Op::operator+(const Op& rhs) const {
    if (layout != rhs.layout) throw LayoutError("Op sum: layout mismatch");
    return Op(layout, matrix + rhs.matrix, hermitian && rhs.hermitian);
}

Op Op::operator-(const Op& rhs) const {
    if (layout != rhs.layout) throw LayoutError("Op difference: layout mismatch");
    return Op(layout, matrix - rhs.matrix, hermitian && rhs.hermitian);
}

Op operator*(Complex scale, const Op& op) {
    bool herm = op.hermitian && scale.imag() == 0.0;
    return Op(op.layout, scale * op.matrix, herm);
}

State::State(SpaceLayout layout, Matrix rho) : layout_(std::move(layout)), rho_(std::move(rho)) {
    if (rho_.rows() != rho_.cols() || rho_.rows() != layout_.total_dim()) {
        throw LayoutError("State: density matrix dimension does not match layout");
    }
    double trace_dev = std::abs(rho_.trace() - 1.0);
    if (trace_dev >= 1e-9) {
        throw NumericError("State: trace deviates from 1 by " + std::to_string(trace_dev));
    }
    check_hermitian(rho_, kHermTol, "State");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho_, Eigen::EigenvaluesOnly);
    double min_eig = es.eigenvalues().minCoeff();
    if (min_eig <= -1e-9) {
        throw NumericError("State: negative eigenvalue " + std::to_string(min_eig));
    }
}

State State::vacuum(const SpaceLayout& layout) {
    return fock(layout, std::vector<int>(static_cast<size_t>(layout.num_factors()), 0));
}

State State::fock(const SpaceLayout& layout, const std::vector<int>& levels) {
    if (static_cast<int>(levels.size()) != layout.num_factors()) {
        throw LayoutError("State::fock: one level per factor required");
    }
    int index = 0;
    for (int i = 0; i < layout.num_factors(); ++i) {
        const Factor& f = layout.factor(i);
        int n = levels[static_cast<size_t>(i)];
        if (n < 0 || n >= f.dim) {
            throw LayoutError("State::fock: level out of range for factor " + f.label);
        }
        index = index * f.dim + n;
    }
    Matrix rho = Matrix::Zero(layout.total_dim(), layout.total_dim());
    rho(index, index) = 1.0;
    return State(layout, rho);
}

State State::thermal_boson(int truncation, double nbar) {
    if (nbar < 0) throw DomainError("thermal_boson: negative occupation");
    SpaceLayout layout = SpaceLayout::boson(truncation);
    Matrix rho = Matrix::Zero(truncation, truncation);
    if (nbar == 0.0) {
        rho(0, 0) = 1.0;
    } else {
        double q = nbar / (nbar + 1.0);
        double w = 1.0;
        double norm = 0.0;
        for (int n = 0; n < truncation; ++n, w *= q) {
            rho(n, n) = w;
            norm += w;
        }
        rho /= norm;
    }
    return State(layout, rho);
}

State State::product(const SpaceLayout& layout, const std::vector<Matrix>& factor_rhos) {
    if (static_cast<int>(factor_rhos.size()) != layout.num_factors()) {
        throw LayoutError("State::product: one density matrix per factor required");
    }
    Matrix rho = Matrix::Ones(1, 1);
    for (int i = 0; i < layout.num_factors(); ++i) {
        const Matrix& fr = factor_rhos[static_cast<size_t>(i)];
        if (fr.rows() != layout.factor(i).dim || fr.cols() != layout.factor(i).dim) {
            throw LayoutError("State::product: factor dimension mismatch");
        }
        rho = kron(rho, fr);
    }
    return State(layout, rho);
}

Op boson_annihilation(int truncation) {
    if (truncation < 2) throw DomainError("boson_annihilation: truncation must be >= 2");
    Matrix a = Matrix::Zero(truncation, truncation);
    for (int n = 1; n < truncation; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return Op(SpaceLayout::boson(truncation), a);
}

TwoLevelOps two_level_ops() {
    SpaceLayout layout({{Factor::Kind::TwoLevel, 2, "spin"}});
    Matrix sp = Matrix::Zero(2, 2);
    sp(1, 0) = 1.0;  // basis index 0 = |0>, index 1 = |-1> (excited)
    Matrix sz = Matrix::Zero(2, 2);
    sz(0, 0) = -1.0;
    sz(1, 1) = 1.0;
    return {Op(layout, sp), Op(layout, sp.adjoint()), Op(layout, sz, true)};
}

Op identity(const SpaceLayout& layout) {
    return Op(layout, Matrix::Identity(layout.total_dim(), layout.total_dim()), true);
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Op embed(const Op& op, const SpaceLayout& layout, int slot) {
    const Factor& f = layout.factor(slot);
    if (op.layout.total_dim() != f.dim) {
        throw LayoutError("embed: operator dimension does not match slot " + f.label);
    }
    Matrix m = Matrix::Ones(1, 1);
    for (int i = 0; i < layout.num_factors(); ++i) {
        if (i == slot) {
            m = kron(m, op.matrix);
        } else {
            int d = layout.factor(i).dim;
            m = kron(m, Matrix::Identity(d, d));
        }
    }
    return Op(layout, std::move(m), op.hermitian);
}

Matrix matrix_exponential(const Matrix& a) {
    if (a.rows() != a.cols()) throw LayoutError("matrix_exponential: non-square input");
    if (!a.allFinite()) throw NumericError("matrix_exponential: non-finite entries");
    const Eigen::Index n = a.rows();
    const Matrix id = Matrix::Identity(n, n);

    // Pade(13) with scaling and squaring (Higham 2005 coefficients).
    static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
    double norm = a.cwiseAbs().rowwise().sum().maxCoeff();  // infinity norm
    int squarings = 0;
    const double theta13 = 5.371920351148152;
    if (norm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    }
    Matrix as = a / std::pow(2.0, squarings);
    Matrix a2 = as * as;
    Matrix a4 = a2 * a2;
    Matrix a6 = a4 * a2;
    Matrix u = as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                     b[3] * a2 + b[1] * id);
    Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 +
               b[0] * id;
    Matrix r = (v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < squarings; ++i) {
        r = r * r;
    }
    return r;
}

Op matrix_exponential(const Op& a) {
    return Op(a.layout, matrix_exponential(a.matrix));
}

Op squeeze_operator(int truncation, double r) {
    Op a = boson_annihilation(truncation);
    Matrix gen = 0.5 * r * (a.matrix * a.matrix - a.matrix.adjoint() * a.matrix.adjoint());
    return Op(a.layout, matrix_exponential(gen));
}

Complex expectation(const State& state, const Op& op) {
    if (state.layout() != op.layout) throw LayoutError("expectation: layout mismatch");
    Complex val = (state.rho() * op.matrix).trace();
    if (op.hermitian && std::abs(val.imag()) >= 1e-9) {
        throw NumericError("expectation: imaginary part " + std::to_string(val.imag()) +
                           " for Hermitian observable");
    }
    return val;
}

}  // namespace magnomech
