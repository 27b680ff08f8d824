#pragma once

#include "qrc/lindblad.hpp"
#include "qrc/quantum_core.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace qrc {

/// T x K neuron populations, K = (m_measure+1)^2, columns ordered n00, n01, ..., nmm.
using NeuronTrajectory = Eigen::MatrixXd;
/// Rows are pooled feature vectors, one per dataset.
using FeatureMatrix = Eigen::MatrixXd;

inline constexpr int kPooledStats = 3;

/// Encodes each symbol as drive eps0 * x, evolves for tau from the vacuum and
/// records the low Fock populations after every symbol. Inputs beyond
/// params.input_clip are clipped; the number of clipped symbols is added to
/// *clipped when given.
NeuronTrajectory run_reservoir(const ReservoirParams& params, std::span<const double> sequence,
                               const IntegratorConfig& cfg, long* clipped = nullptr);

/// Per neuron: mean, population std, lag-1 autocorrelation; then a bias of 1.
Eigen::VectorXd pool_features(const NeuronTrajectory& traj);

FeatureMatrix featurize_datasets(const ReservoirParams& params,
                                 const std::vector<std::vector<double>>& sequences,
                                 const IntegratorConfig& cfg, int workers = 1, long* clipped = nullptr);

/// n00_mean, n00_std, n00_ac1, ..., bias
std::vector<std::string> feature_names(int m_measure);

void write_feature_csv(std::ostream& out, const std::vector<std::string>& names, const FeatureMatrix& f);

}  // namespace qrc
