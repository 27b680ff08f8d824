#include "qrc/validation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

namespace qrc {

bool PhysicsReport::passed() const {
    return damping_error < 1e-6 && hopping_error < 1e-6 && max_trace_deviation < 1e-9 && min_eigenvalue >= -1e-8 &&
           vacuum_monotonicity_violation <= 1e-8;
}

namespace {

void track(PhysicsReport& r, const DensityMatrix& rho) {
    r.max_trace_deviation = std::max(r.max_trace_deviation, std::abs(rho.trace() - 1.0));
    r.min_eigenvalue = std::min(r.min_eigenvalue, rho.min_eigenvalue());
}

}  // namespace

PhysicsReport validate_physics(const IntegratorConfig& cfg) {
    PhysicsReport r;
    constexpr int nc = 5;
    constexpr double dt = 0.1;

    // Single damped mode from |1>.
    {
        const double kappa = 0.5;
        const Operator a = annihilation(nc);
        const Operator h = Complex(2.0) * number(nc);
        const std::vector<Operator> collapse{Complex(std::sqrt(kappa)) * a};
        DensityMatrix rho = DensityMatrix::basis_state(nc + 1, 1);
        for (int s = 1; s <= 40; ++s) {
            rho = evolve(rho, h, collapse, dt, cfg);
            const double p1 = rho.matrix()(1, 1).real();
            r.damping_error = std::max(r.damping_error, std::abs(p1 - std::exp(-kappa * s * dt)));
            track(r, rho);
        }
    }

    // Lossless hopping from |1,0>.
    {
        const double g = 0.4;
        const Operator a = annihilation(nc);
        const Operator a1 = two_mode_embed(a, Mode::first, nc);
        const Operator a2 = two_mode_embed(a, Mode::second, nc);
        const Operator h = Complex(g) * (a1.adjoint() * a2 + a1 * a2.adjoint());
        DensityMatrix rho = DensityMatrix::basis_state(h.dim(), fock_index(1, 0, nc));
        for (int s = 1; s <= 80; ++s) {
            rho = evolve(rho, h, {}, dt, cfg);
            const double c = std::cos(g * s * dt);
            r.hopping_error = std::max(r.hopping_error, std::abs(fock_population(rho, 1, 0) - c * c));
            track(r, rho);
        }
    }

    // Undriven reservoir relaxing from the maximally mixed state.
    {
        ReservoirParams params;
        const Operator h = build_hamiltonian(params, 0.0);
        const std::vector<Operator> collapse = collapse_operators(params);
        DensityMatrix rho = DensityMatrix::maximally_mixed(params.two_mode_dim());
        double last = fock_population(rho, 0, 0);
        for (int s = 1; s <= 40; ++s) {
            rho = evolve(rho, h, collapse, dt, cfg);
            const double p = fock_population(rho, 0, 0);
            r.vacuum_monotonicity_violation = std::max(r.vacuum_monotonicity_violation, last - p);
            last = p;
            track(r, rho);
        }
    }
    return r;
}

void print_physics_report(std::ostream& out, const PhysicsReport& r) {
    out << "amplitude damping max |P1 - exp(-kappa t)|: " << r.damping_error << '\n'
        << "lossless hopping max |P10 - cos^2(g t)|:  " << r.hopping_error << '\n'
        << "max trace deviation:                       " << r.max_trace_deviation << '\n'
        << "min eigenvalue:                            " << r.min_eigenvalue << '\n'
        << "vacuum population max decrease:            " << r.vacuum_monotonicity_violation << '\n'
        << (r.passed() ? "validate: PASS" : "validate: FAIL") << '\n';
}

}  // namespace qrc
