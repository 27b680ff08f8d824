#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace qrc {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Dense complex operator on a truncated Fock space.
class Operator {
public:
    Operator() = default;
    explicit Operator(ComplexMatrix entries);

    [[nodiscard]] Eigen::Index dim() const { return entries_.rows(); }
    [[nodiscard]] const ComplexMatrix& matrix() const { return entries_; }

    [[nodiscard]] Operator adjoint() const;
    /// Max entrywise |A - A^dagger|.
    [[nodiscard]] double hermiticity_error() const;

    friend Operator operator*(const Operator& a, const Operator& b);
    friend Operator operator+(const Operator& a, const Operator& b);
    friend Operator operator-(const Operator& a, const Operator& b);
    friend Operator operator*(Complex s, const Operator& a);

private:
    ComplexMatrix entries_;
};

/// Physical and algorithmic reservoir settings. Units: hbar = 1, energies in
/// rad/ns, time in ns.
struct ReservoirParams {
    double omega1 = 10.0;
    double omega2 = 9.0;
    double g12 = 0.4;
    double u = 0.6;
    double kappa1 = 0.5;
    double kappa2 = 0.5;
    double eps0 = 3.8;
    int n_cutoff = 5;
    int m_measure = 2;
    double tau = 1.0;
    /// Inputs are clipped to |x| <= input_clip before encoding.
    double input_clip = 20.0;

    /// Throws std::invalid_argument when an invariant is broken.
    void validate() const;

    [[nodiscard]] Eigen::Index two_mode_dim() const {
        return static_cast<Eigen::Index>(n_cutoff + 1) * (n_cutoff + 1);
    }
};

enum class Mode { first = 1, second = 2 };

/// Truncated ladder operator with entries (k-1, k) = sqrt(k).
Operator annihilation(int n_cutoff);
Operator creation(int n_cutoff);
Operator number(int n_cutoff);
Operator identity(Eigen::Index dim);

/// op (x) I for mode 1, I (x) op for mode 2. Basis index of |i,j> is i*(n_cutoff+1)+j.
Operator two_mode_embed(const Operator& op, Mode mode, int n_cutoff);

inline Eigen::Index fock_index(int i, int j, int n_cutoff) {
    return static_cast<Eigen::Index>(i) * (n_cutoff + 1) + j;
}

/// Driven Bose-Hubbard Hamiltonian with drive amplitude eps0 * x.
Operator build_hamiltonian(const ReservoirParams& params, double x);

/// [sqrt(kappa1) a1, sqrt(kappa2) a2].
std::vector<Operator> collapse_operators(const ReservoirParams& params);

}  // namespace qrc
