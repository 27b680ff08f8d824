#pragma once

#include <cstdint>
#include <span>

namespace qrc {

double mean(std::span<const double> x);
/// Population standard deviation (divisor n).
double population_std(std::span<const double> x);
/// Sample standard deviation (divisor n - 1); 0 for a single value.
double sample_std(std::span<const double> x);
/// Lag-1 autocovariance over (n - 1) pairs divided by the population variance.
/// Returns 0 when the population variance is below 1e-14.
double lag1_autocorrelation(std::span<const double> x);
double median(std::span<const double> x);
double sample_kurtosis(std::span<const double> x);

/// Deterministic 64-bit seed derived from a master seed and two stream indices.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

}  // namespace qrc
