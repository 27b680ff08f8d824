#include "qrc/reservoir.hpp"

#include "qrc/csv.hpp"
#include "qrc/parallel.hpp"
#include "qrc/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace qrc {

NeuronTrajectory run_reservoir(const ReservoirParams& params, std::span<const double> sequence,
                               const IntegratorConfig& cfg, long* clipped) {
    params.validate();
    if (sequence.empty()) throw std::invalid_argument("run_reservoir: empty sequence");
    const int m = params.m_measure;
    const int k = (m + 1) * (m + 1);
    const std::vector<Operator> collapse = collapse_operators(params);

    NeuronTrajectory traj(static_cast<Eigen::Index>(sequence.size()), k);
    DensityMatrix rho = DensityMatrix::basis_state(params.two_mode_dim(), 0);
    long n_clipped = 0;
    for (std::size_t t = 0; t < sequence.size(); ++t) {
        double x = sequence[t];
        if (!std::isfinite(x)) throw std::invalid_argument("run_reservoir: non-finite input");
        if (std::abs(x) > params.input_clip) {
            x = std::copysign(params.input_clip, x);
            ++n_clipped;
        }
        rho = evolve(rho, build_hamiltonian(params, x), collapse, params.tau, cfg);
        for (int i = 0; i <= m; ++i) {
            for (int j = 0; j <= m; ++j) {
                traj(static_cast<Eigen::Index>(t), i * (m + 1) + j) = fock_population(rho, i, j);
            }
        }
    }
    if (clipped) *clipped += n_clipped;
    return traj;
}

Eigen::VectorXd pool_features(const NeuronTrajectory& traj) {
    if (traj.rows() < 2) throw std::invalid_argument("pool_features: need at least 2 time steps");
    const Eigen::Index k = traj.cols();
    Eigen::VectorXd out(kPooledStats * k + 1);
    std::vector<double> column(static_cast<std::size_t>(traj.rows()));
    for (Eigen::Index n = 0; n < k; ++n) {
        for (Eigen::Index t = 0; t < traj.rows(); ++t) column[static_cast<std::size_t>(t)] = traj(t, n);
        out(kPooledStats * n) = mean(column);
        out(kPooledStats * n + 1) = population_std(column);
        out(kPooledStats * n + 2) = lag1_autocorrelation(column);
    }
    out(kPooledStats * k) = 1.0;
    if (!out.allFinite()) throw std::domain_error("pool_features: non-finite feature");
    return out;
}

FeatureMatrix featurize_datasets(const ReservoirParams& params,
                                 const std::vector<std::vector<double>>& sequences,
                                 const IntegratorConfig& cfg, int workers, long* clipped) {
    if (sequences.empty()) throw std::invalid_argument("featurize_datasets: no sequences");
    const std::size_t t_len = sequences.front().size();
    for (const auto& s : sequences) {
        if (s.size() != t_len) throw std::invalid_argument("featurize_datasets: sequences differ in length");
    }
    const int k = (params.m_measure + 1) * (params.m_measure + 1);
    FeatureMatrix f(static_cast<Eigen::Index>(sequences.size()), kPooledStats * k + 1);
    std::atomic<long> total_clipped{0};
    parallel_for(sequences.size(), workers, [&](std::size_t n) {
        long local = 0;
        const Eigen::VectorXd row = pool_features(run_reservoir(params, sequences[n], cfg, &local));
        f.row(static_cast<Eigen::Index>(n)) = row.transpose();
        total_clipped += local;
    });
    if (clipped) *clipped += total_clipped;
    return f;
}

std::vector<std::string> feature_names(int m_measure) {
    std::vector<std::string> names;
    for (int i = 0; i <= m_measure; ++i) {
        for (int j = 0; j <= m_measure; ++j) {
            const std::string base = "n" + std::to_string(i) + std::to_string(j);
            names.push_back(base + "_mean");
            names.push_back(base + "_std");
            names.push_back(base + "_ac1");
        }
    }
    names.emplace_back("bias");
    return names;
}

void write_feature_csv(std::ostream& out, const std::vector<std::string>& names, const FeatureMatrix& f) {
    if (static_cast<Eigen::Index>(names.size()) != f.cols()) {
        throw std::invalid_argument("write_feature_csv: header does not match column count");
    }
    write_csv_row(out, names);
    for (Eigen::Index r = 0; r < f.rows(); ++r) {
        for (Eigen::Index c = 0; c < f.cols(); ++c) {
            if (c) out << ',';
            out << format_double(f(r, c));
        }
        out << '\n';
    }
}

}  // namespace qrc
