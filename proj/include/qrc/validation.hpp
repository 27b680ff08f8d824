#pragma once

#include "qrc/lindblad.hpp"

#include <iosfwd>
#include <limits>

namespace qrc {

struct PhysicsReport {
    /// max |P1(t) - exp(-kappa t)| for a single damped mode started in |1>.
    double damping_error = 0.0;
    /// max |P10(t) - cos^2(g t)| for lossless hopping started in |1,0>.
    double hopping_error = 0.0;
    double max_trace_deviation = 0.0;
    double min_eigenvalue = std::numeric_limits<double>::infinity();
    /// Largest drop of the vacuum population under decay-only dynamics.
    double vacuum_monotonicity_violation = 0.0;

    [[nodiscard]] bool passed() const;
};

/// Runs the reference trajectories: damping (kappa = 0.5/ns, t <= 4 ns),
/// hopping (g = 0.4 rad/ns) and decay from a mixed two-mode state.
PhysicsReport validate_physics(const IntegratorConfig& cfg = {});
void print_physics_report(std::ostream& out, const PhysicsReport& r);

}  // namespace qrc
