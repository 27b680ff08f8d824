#pragma once

#include "qrc/lindblad.hpp"
#include "qrc/quantum_core.hpp"
#include "qrc/scaling_fit.hpp"
#include "qrc/tasks.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace qrc {

const char* code_version();

struct ExperimentConfig {
    Task task = Task::normal_vs_laplace;
    std::vector<int> t_grid{10, 20, 40, 80, 160, 320};
    int n_train = 200;
    int n_test = 200;
    int n_repetitions = 10;
    bool run_qrc = true;
    bool run_classical = true;
    std::uint64_t seed = 20240601;
    std::string out_dir = "out";
    ReservoirParams reservoir;
    IntegratorConfig integrator;
    /// GARCH baseline without the squared-series feature.
    bool strict_parity = false;
    bool constrain_accuracy = false;

    void validate() const;
};

/// Drive scale per task: 3.8, 1.0 and 1.9 rad/ns.
double default_eps0(Task task);
/// Defaults for a task, including its drive scale.
ExperimentConfig default_config(Task task);

/// INI text with sections [experiment], [reservoir], [integrator], [baseline], [fit].
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Every setting that affects results, one key=value per line in a fixed order.
std::string canonical_config(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

/// Seed of the split used for (T, repetition).
std::uint64_t split_seed(std::uint64_t master, int t_len, int repetition);

struct ResultRow {
    std::string task;
    std::string method;
    int t = 0;
    int repetition = 0;
    std::string metric;
    double value = 0.0;
};

struct SplitRecord {
    int t = 0;
    int repetition = 0;
    std::uint64_t seed = 0;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::vector<SplitRecord> splits;
    long clipped_inputs = 0;
};

std::string metric_for(Task task);

/// Test accuracy (classification) or test RMSE (Student-t) of the reservoir pipeline.
double evaluate_qrc(const TaskSplit& split, const ExperimentConfig& cfg, int workers, long* clipped = nullptr);
/// GLRT accuracy, Student-t MLE RMSE, or raw-feature GARCH accuracy.
double evaluate_classical(const TaskSplit& split, const ExperimentConfig& cfg);
/// RMSE on the test labels of predicting the mean training label.
double mean_predictor_rmse(const TaskSplit& split);

ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers = 1, std::ostream* log = nullptr);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, const std::string& hash,
                       std::uint64_t seed);
std::vector<ResultRow> read_results_csv(std::istream& in);

struct CurvePoint {
    std::string task;
    std::string method;
    std::string metric;
    int t = 0;
    double mean = 0.0;
    double std = 0.0;
    int count = 0;
};

/// Mean and sample standard deviation across repetitions per (task, method, T).
std::vector<CurvePoint> aggregate(const std::vector<ResultRow>& rows);

/// Fit uncertainty for a curve point; a zero spread is floored at 1e-3
/// (accuracy) or 1e-3 * mean (RMSE).
double fit_sigma(const CurvePoint& p);

struct FitOutput {
    std::vector<FitReportRow> report;
    std::vector<std::filesystem::path> plots;
};

/// select_law on every (task, method) curve; writes fit_report.csv and, unless
/// csv_only, SVG plots into out_dir.
FitOutput fit_and_report(const std::vector<ResultRow>& rows, const std::filesystem::path& out_dir, bool csv_only,
                         const std::string& hash = "", std::uint64_t seed = 0, bool constrain_accuracy = false);

/// Re-renders plots from stored results and fits.
std::vector<std::filesystem::path> render_plots(const std::vector<ResultRow>& rows,
                                                const std::vector<FitReportRow>& fits,
                                                const std::filesystem::path& out_dir, const std::string& hash = "",
                                                std::uint64_t seed = 0);

}  // namespace qrc
