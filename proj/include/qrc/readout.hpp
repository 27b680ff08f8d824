#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace qrc {

/// Moore-Penrose pseudoinverse via SVD; singular values below
/// rel_cutoff * sigma_max are discarded.
Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& a, double rel_cutoff = 1e-10);

/// W = pinv(F) * targets.
Eigen::VectorXd train_readout(const Eigen::MatrixXd& f, const Eigen::VectorXd& targets);
Eigen::VectorXd predict(const Eigen::MatrixXd& f, const Eigen::VectorXd& w);

/// Number of thresholds strictly below y.
int classify(double y, std::span<const double> thresholds);
std::vector<int> classify_all(const Eigen::VectorXd& y, std::span<const double> thresholds);

double accuracy(std::span<const int> predicted, std::span<const int> truth);
double rmse(std::span<const double> predicted, std::span<const double> target);

/// Two rows: the feature header and the weights.
void write_weights_csv(std::ostream& out, const std::vector<std::string>& names, const Eigen::VectorXd& w);

}  // namespace qrc
