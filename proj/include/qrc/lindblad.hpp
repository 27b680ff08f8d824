#pragma once

#include "qrc/quantum_core.hpp"

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace qrc {

/// Mixed state on the truncated two-mode (or single-mode) Fock space.
class DensityMatrix {
public:
    DensityMatrix() = default;
    explicit DensityMatrix(ComplexMatrix entries);

    static DensityMatrix basis_state(Eigen::Index dim, Eigen::Index index);
    static DensityMatrix maximally_mixed(Eigen::Index dim);

    [[nodiscard]] Eigen::Index dim() const { return entries_.rows(); }
    [[nodiscard]] const ComplexMatrix& matrix() const { return entries_; }

    [[nodiscard]] Complex trace() const { return entries_.trace(); }
    [[nodiscard]] double hermiticity_error() const;
    /// Smallest eigenvalue of the Hermitian part.
    [[nodiscard]] double min_eigenvalue() const;

private:
    ComplexMatrix entries_;
};

struct IntegratorConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step = 0.25;  // ns
    double initial_step = 5e-3;  // ns
    int hermitize_every = 1;
    long max_steps = 5'000'000;

    void validate() const;
};

/// Integration failed to meet tolerance or broke a state invariant.
class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EvolveStats {
    long accepted = 0;
    long rejected = 0;
    double last_step = 0.0;
};

/// -i[H,rho] + sum_j (C rho C^+ - 1/2 {C^+ C, rho}), evaluated densely.
ComplexMatrix lindblad_rhs(const Operator& h, std::span<const Operator> collapse,
                           const DensityMatrix& rho);

/// Propagates rho0 for a duration tau under a constant H with an adaptive
/// Dormand-Prince 5(4) integrator.
DensityMatrix evolve(const DensityMatrix& rho0, const Operator& h, std::span<const Operator> collapse,
                     double tau, const IntegratorConfig& cfg, EvolveStats* stats = nullptr);

/// Real part of <i,j|rho|i,j>, clamped to [0, 1].
double fock_population(const DensityMatrix& rho, int i, int j);

/// Summed population of basis states with either occupation at the cutoff.
double edge_population(const DensityMatrix& rho);

/// Cutoff implied by a two-mode density matrix of dimension (n_c+1)^2.
int cutoff_from_dim(Eigen::Index dim);

/// Writes rows (t, p00, p01, ..., pmm) for a sampled trajectory.
void write_population_csv(std::ostream& out, std::span<const double> times,
                          std::span<const DensityMatrix> states, int m_measure);

}  // namespace qrc
