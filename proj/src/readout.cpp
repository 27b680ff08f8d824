#include "qrc/readout.hpp"

#include "qrc/csv.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace qrc {

Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& a, double rel_cutoff) {
    if (a.size() == 0) throw std::invalid_argument("pseudoinverse: empty matrix");
    if (!a.allFinite()) throw std::invalid_argument("pseudoinverse: non-finite entries");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    const double cutoff = rel_cutoff * (s.size() ? s(0) : 0.0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > cutoff && s(i) > 0.0) inv(i) = 1.0 / s(i);
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Eigen::VectorXd train_readout(const Eigen::MatrixXd& f, const Eigen::VectorXd& targets) {
    if (f.rows() != targets.size()) throw std::invalid_argument("train_readout: row count mismatch");
    if (!targets.allFinite()) throw std::invalid_argument("train_readout: non-finite targets");
    return pseudoinverse(f) * targets;
}

Eigen::VectorXd predict(const Eigen::MatrixXd& f, const Eigen::VectorXd& w) {
    if (f.cols() != w.size()) throw std::invalid_argument("predict: dimension mismatch");
    return f * w;
}

int classify(double y, std::span<const double> thresholds) {
    for (std::size_t i = 1; i < thresholds.size(); ++i) {
        if (!(thresholds[i - 1] < thresholds[i])) {
            throw std::invalid_argument("classify: thresholds must be strictly increasing");
        }
    }
    int cls = 0;
    for (double th : thresholds) {
        if (th < y) ++cls;
    }
    return cls;
}

std::vector<int> classify_all(const Eigen::VectorXd& y, std::span<const double> thresholds) {
    std::vector<int> out(static_cast<std::size_t>(y.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) out[static_cast<std::size_t>(i)] = classify(y(i), thresholds);
    return out;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) throw std::invalid_argument("accuracy: length mismatch");
    if (predicted.empty()) throw std::invalid_argument("accuracy: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double rmse(std::span<const double> predicted, std::span<const double> target) {
    if (predicted.size() != target.size()) throw std::invalid_argument("rmse: length mismatch");
    if (predicted.empty()) throw std::invalid_argument("rmse: empty input");
    double ss = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = predicted[i] - target[i];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(predicted.size()));
}

void write_weights_csv(std::ostream& out, const std::vector<std::string>& names, const Eigen::VectorXd& w) {
    if (static_cast<Eigen::Index>(names.size()) != w.size()) {
        throw std::invalid_argument("write_weights_csv: header does not match weight count");
    }
    write_csv_row(out, names);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (i) out << ',';
        out << format_double(w(i));
    }
    out << '\n';
}

}  // namespace qrc
