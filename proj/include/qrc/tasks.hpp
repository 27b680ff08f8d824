#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace qrc {

using Rng = std::mt19937_64;

enum class Task { normal_vs_laplace, student_t, garch_bands };

std::string task_name(Task task);
Task parse_task(std::string_view name);
/// 2 for the binary task, 3 for GARCH bands, 0 for regression.
int task_classes(Task task);
/// Readout thresholds mapping a real output to a class.
std::vector<double> task_thresholds(Task task);

std::vector<double> sample_normal(double mu, double sigma, int t_len, Rng& rng);
std::vector<double> sample_laplace(double mu, double b, int t_len, Rng& rng);
/// Inverse CDF with u on (-1/2, 1/2).
double laplace_quantile(double mu, double b, double u);
std::vector<double> sample_student_t(double nu, int t_len, Rng& rng);
std::vector<double> simulate_garch(double omega_g, double alpha, double beta, int t_len, Rng& rng);

inline constexpr int kGarchBurnIn = 200;
inline constexpr double kGarchMinAlpha = 0.01;
inline constexpr double kNuInvLo = 1.0 / 30.0;
inline constexpr double kNuInvHi = 1.0;

struct LabeledDataset {
    std::vector<double> sequence;
    double label = 0.0;
    std::string family;
    std::map<std::string, double> params;
    std::uint64_t seed = 0;
};

struct TaskSplit {
    Task task = Task::normal_vs_laplace;
    std::vector<LabeledDataset> train;
    std::vector<LabeledDataset> test;
    std::uint64_t seed = 0;
};

/// Training parameters sit on grids over the task ranges, test parameters are
/// drawn at random; GARCH uses random (alpha, beta) within each band for both.
/// Every dataset draws from its own stream seeded by (seed, split, index).
TaskSplit make_split(Task task, int t_len, int n_train, int n_test, std::uint64_t seed);

/// Draws (alpha, beta) uniformly over {alpha >= 0.01, beta >= 0, alpha + beta in [lo, hi]}.
std::pair<double, double> sample_garch_band(double lo, double hi, Rng& rng);
std::pair<double, double> garch_band(int band);

std::vector<std::vector<double>> sequences(const std::vector<LabeledDataset>& sets);
std::vector<double> labels(const std::vector<LabeledDataset>& sets);
std::vector<int> class_labels(const std::vector<LabeledDataset>& sets);

/// Columns: dataset_id, label, x_1..x_T.
void write_datasets_csv(std::ostream& out, const std::vector<LabeledDataset>& sets);
/// JSON with the task, split seed and per-dataset family, parameters and seed.
void write_split_metadata(std::ostream& out, const TaskSplit& split);

}  // namespace qrc
