#include "qrc/quantum_core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <unsupported/Eigen/KroneckerProduct>

namespace qrc {

Operator::Operator(ComplexMatrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) {
        throw std::invalid_argument("Operator: matrix must be square");
    }
}

Operator Operator::adjoint() const { return Operator(entries_.adjoint()); }

double Operator::hermiticity_error() const {
    if (entries_.size() == 0) return 0.0;
    return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

Operator operator*(const Operator& a, const Operator& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("Operator: dimension mismatch");
    return Operator(a.entries_ * b.entries_);
}

Operator operator+(const Operator& a, const Operator& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("Operator: dimension mismatch");
    return Operator(a.entries_ + b.entries_);
}

Operator operator-(const Operator& a, const Operator& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("Operator: dimension mismatch");
    return Operator(a.entries_ - b.entries_);
}

Operator operator*(Complex s, const Operator& a) { return Operator(s * a.entries_); }

void ReservoirParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string("ReservoirParams: ") + name +
                                        " must be finite and > 0");
        }
    };
    positive(omega1, "omega1");
    positive(omega2, "omega2");
    positive(g12, "g12");
    positive(u, "u");
    positive(kappa1, "kappa1");
    positive(kappa2, "kappa2");
    positive(eps0, "eps0");
    positive(tau, "tau");
    positive(input_clip, "input_clip");
    if (n_cutoff < 1) throw std::invalid_argument("ReservoirParams: n_cutoff must be >= 1");
    if (m_measure < 0 || m_measure > n_cutoff) {
        throw std::invalid_argument("ReservoirParams: need n_cutoff >= m_measure >= 0");
    }
}

Operator annihilation(int n_cutoff) {
    if (n_cutoff < 1) throw std::invalid_argument("annihilation: n_cutoff must be >= 1");
    const Eigen::Index d = n_cutoff + 1;
    ComplexMatrix a = ComplexMatrix::Zero(d, d);
    for (Eigen::Index k = 1; k < d; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return Operator(std::move(a));
}

Operator creation(int n_cutoff) { return annihilation(n_cutoff).adjoint(); }

Operator number(int n_cutoff) {
    if (n_cutoff < 1) throw std::invalid_argument("number: n_cutoff must be >= 1");
    const Eigen::Index d = n_cutoff + 1;
    ComplexMatrix n = ComplexMatrix::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
    return Operator(std::move(n));
}

Operator identity(Eigen::Index dim) { return Operator(ComplexMatrix::Identity(dim, dim)); }

Operator two_mode_embed(const Operator& op, Mode mode, int n_cutoff) {
    const Eigen::Index d = n_cutoff + 1;
    if (n_cutoff < 1 || op.dim() != d) {
        throw std::invalid_argument("two_mode_embed: operator dimension must be n_cutoff+1");
    }
    const ComplexMatrix id = ComplexMatrix::Identity(d, d);
    if (mode == Mode::first) return Operator(Eigen::kroneckerProduct(op.matrix(), id).eval());
    return Operator(Eigen::kroneckerProduct(id, op.matrix()).eval());
}

Operator build_hamiltonian(const ReservoirParams& params, double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("build_hamiltonian: non-finite input");
    const int nc = params.n_cutoff;
    const Operator a = annihilation(nc);
    const Operator n = number(nc);
    const Operator a1 = two_mode_embed(a, Mode::first, nc);
    const Operator a2 = two_mode_embed(a, Mode::second, nc);
    const Operator n1 = two_mode_embed(n, Mode::first, nc);
    const Operator n2 = two_mode_embed(n, Mode::second, nc);
    const ComplexMatrix id = ComplexMatrix::Identity(a1.dim(), a1.dim());

    const Complex drive(0.0, params.eps0 * x);
    ComplexMatrix h = params.omega1 * n1.matrix() + params.omega2 * n2.matrix();
    h -= 0.5 * params.u * (n1.matrix() * (n1.matrix() + id));
    h -= 0.5 * params.u * (n2.matrix() * (n2.matrix() + id));
    h += drive * (a1.matrix() - a1.matrix().adjoint());
    h += drive * (a2.matrix() - a2.matrix().adjoint());
    h += params.g12 * (a1.matrix().adjoint() * a2.matrix() + a1.matrix() * a2.matrix().adjoint());
    return Operator(std::move(h));
}

std::vector<Operator> collapse_operators(const ReservoirParams& params) {
    const Operator a = annihilation(params.n_cutoff);
    return {
        Complex(std::sqrt(params.kappa1)) * two_mode_embed(a, Mode::first, params.n_cutoff),
        Complex(std::sqrt(params.kappa2)) * two_mode_embed(a, Mode::second, params.n_cutoff),
    };
}

}  // namespace qrc
