#pragma once

#include "qrc/tasks.hpp"

#include <Eigen/Dense>

#include <span>

namespace qrc {

struct MleResult {
    double estimate = 0.0;
    double log_likelihood = 0.0;
    bool converged = false;
};

struct GlrtScores {
    double normal = 0.0;
    double laplace = 0.0;
};

/// Maximized log-likelihoods of the Normal and Laplace fits.
GlrtScores glrt_log_likelihoods(std::span<const double> x);
/// 0 = Normal, 1 = Laplace; ties within 1e-12 go to Normal.
int glrt_classify(std::span<const double> x);

/// Log-likelihood of a standard (mu = 0, sigma = 1) Student-t sample.
double student_t_log_likelihood(std::span<const double> x, double nu);
/// Golden-section search in ln(nu) over nu in [1, 1000]; estimate is 1/nu_hat.
MleResult mle_student_inv_nu(std::span<const double> x);

/// mean, std, lag-1 autocorrelation of x, optionally lag-1 autocorrelation of
/// x^2, and a bias of 1.
Eigen::VectorXd raw_garch_features(std::span<const double> x, bool squared_ac1 = true);

struct ClassifierScore {
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
};

/// Pseudoinverse readout on raw-data features. strict_parity drops the
/// squared-series autocorrelation so the features match the reservoir pooling.
ClassifierScore classical_garch_scores(const TaskSplit& split, bool strict_parity = false);
double classical_garch_classify(const TaskSplit& split, bool strict_parity = false);

}  // namespace qrc
