#include "qrc/baselines.hpp"

#include "qrc/readout.hpp"
#include "qrc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace qrc {

GlrtScores glrt_log_likelihoods(std::span<const double> x) {
    if (x.size() < 2) throw std::invalid_argument("glrt: need at least 2 samples");
    for (double v : x) {
        if (!std::isfinite(v)) throw std::invalid_argument("glrt: non-finite sample");
    }
    const auto n = static_cast<double>(x.size());
    const double sigma = population_std(x);
    const double med = median(x);
    double b = 0.0;
    for (double v : x) b += std::abs(v - med);
    b /= n;
    if (!(sigma > 0.0) || !(b > 0.0)) throw std::domain_error("glrt: constant sequence");
    GlrtScores s;
    s.normal = -0.5 * n * std::log(2.0 * std::numbers::pi * sigma * sigma) - 0.5 * n;
    s.laplace = -n * std::log(2.0 * b) - n;
    return s;
}

int glrt_classify(std::span<const double> x) {
    const GlrtScores s = glrt_log_likelihoods(x);
    return s.laplace - s.normal > 1e-12 ? 1 : 0;
}

double student_t_log_likelihood(std::span<const double> x, double nu) {
    if (!(nu > 0.0)) throw std::invalid_argument("student_t_log_likelihood: nu must be > 0");
    const auto n = static_cast<double>(x.size());
    double tail = 0.0;
    for (double v : x) tail += std::log1p(v * v / nu);
    const double norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi);
    return n * norm - 0.5 * (nu + 1.0) * tail;
}

MleResult mle_student_inv_nu(std::span<const double> x) {
    if (x.size() < 2) throw std::invalid_argument("mle_student_inv_nu: need at least 2 samples");
    for (double v : x) {
        if (!std::isfinite(v)) throw std::invalid_argument("mle_student_inv_nu: non-finite sample");
    }
    auto objective = [&](double log_nu) { return student_t_log_likelihood(x, std::exp(log_nu)); };
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0;
    double b = std::log(1000.0);
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = objective(c);
    double fd = objective(d);
    while (b - a > 1e-4) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    const double log_nu = 0.5 * (a + b);
    MleResult r;
    r.log_likelihood = objective(log_nu);
    r.estimate = std::clamp(std::exp(-log_nu), 0.001, 1.0);
    r.converged = std::isfinite(r.log_likelihood);
    if (!r.converged) throw std::domain_error("mle_student_inv_nu: non-finite likelihood");
    return r;
}

Eigen::VectorXd raw_garch_features(std::span<const double> x, bool squared_ac1) {
    if (x.size() < 2) throw std::invalid_argument("raw_garch_features: need at least 2 samples");
    Eigen::VectorXd f(squared_ac1 ? 5 : 4);
    f(0) = mean(x);
    f(1) = population_std(x);
    f(2) = lag1_autocorrelation(x);
    if (squared_ac1) {
        std::vector<double> sq(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) sq[i] = x[i] * x[i];
        f(3) = lag1_autocorrelation(sq);
    }
    f(f.size() - 1) = 1.0;
    return f;
}

namespace {

Eigen::MatrixXd raw_feature_matrix(const std::vector<LabeledDataset>& sets, bool squared_ac1) {
    Eigen::MatrixXd f(static_cast<Eigen::Index>(sets.size()), squared_ac1 ? 5 : 4);
    for (std::size_t i = 0; i < sets.size(); ++i) {
        f.row(static_cast<Eigen::Index>(i)) = raw_garch_features(sets[i].sequence, squared_ac1).transpose();
    }
    return f;
}

}  // namespace

ClassifierScore classical_garch_scores(const TaskSplit& split, bool strict_parity) {
    if (split.train.empty() || split.test.empty()) throw std::invalid_argument("classical_garch: empty split");
    const bool squared = !strict_parity;
    const Eigen::MatrixXd f_train = raw_feature_matrix(split.train, squared);
    const Eigen::MatrixXd f_test = raw_feature_matrix(split.test, squared);
    const std::vector<double> y = labels(split.train);
    const Eigen::VectorXd w = train_readout(f_train, Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())));
    const std::vector<double> th = task_thresholds(Task::garch_bands);
    ClassifierScore s;
    s.train_accuracy = accuracy(classify_all(predict(f_train, w), th), class_labels(split.train));
    s.test_accuracy = accuracy(classify_all(predict(f_test, w), th), class_labels(split.test));
    return s;
}

double classical_garch_classify(const TaskSplit& split, bool strict_parity) {
    return classical_garch_scores(split, strict_parity).test_accuracy;
}

}  // namespace qrc
