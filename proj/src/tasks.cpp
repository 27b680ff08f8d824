#include "qrc/tasks.hpp"

#include "qrc/csv.hpp"
#include "qrc/stats.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace qrc {

std::string task_name(Task task) {
    switch (task) {
        case Task::normal_vs_laplace: return "normal_vs_laplace";
        case Task::student_t: return "student_t";
        case Task::garch_bands: return "garch_bands";
    }
    throw std::invalid_argument("task_name: unknown task");
}

Task parse_task(std::string_view name) {
    if (name == "normal_vs_laplace") return Task::normal_vs_laplace;
    if (name == "student_t") return Task::student_t;
    if (name == "garch_bands") return Task::garch_bands;
    throw std::invalid_argument("unknown task '" + std::string(name) + "'");
}

int task_classes(Task task) {
    switch (task) {
        case Task::normal_vs_laplace: return 2;
        case Task::student_t: return 0;
        case Task::garch_bands: return 3;
    }
    return 0;
}

std::vector<double> task_thresholds(Task task) {
    switch (task) {
        case Task::normal_vs_laplace: return {0.5};
        case Task::garch_bands: return {0.5, 1.5};
        case Task::student_t: return {};
    }
    return {};
}

namespace {

void check_length(int t_len) {
    if (t_len < 1) throw std::invalid_argument("sample length must be >= 1");
}

}  // namespace

std::vector<double> sample_normal(double mu, double sigma, int t_len, Rng& rng) {
    check_length(t_len);
    if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma)) {
        throw std::invalid_argument("sample_normal: need finite mu and sigma > 0");
    }
    std::normal_distribution<double> dist(mu, sigma);
    std::vector<double> x(static_cast<std::size_t>(t_len));
    for (auto& v : x) v = dist(rng);
    return x;
}

double laplace_quantile(double mu, double b, double u) {
    if (!(std::abs(u) < 0.5)) throw std::domain_error("laplace_quantile: u must lie in (-1/2, 1/2)");
    const double s = (u > 0.0) - (u < 0.0);
    return mu - b * s * std::log(1.0 - 2.0 * std::abs(u));
}

std::vector<double> sample_laplace(double mu, double b, int t_len, Rng& rng) {
    check_length(t_len);
    if (!(b > 0.0) || !std::isfinite(mu) || !std::isfinite(b)) {
        throw std::invalid_argument("sample_laplace: need finite mu and b > 0");
    }
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    std::vector<double> x(static_cast<std::size_t>(t_len));
    for (auto& v : x) {
        double u = unif(rng);
        while (!(std::abs(u) < 0.5)) u = unif(rng);
        v = laplace_quantile(mu, b, u);
    }
    return x;
}

std::vector<double> sample_student_t(double nu, int t_len, Rng& rng) {
    check_length(t_len);
    if (!(nu > 0.0) || !std::isfinite(nu)) throw std::invalid_argument("sample_student_t: need nu > 0");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::chi_squared_distribution<double> chi2(nu);
    std::vector<double> x(static_cast<std::size_t>(t_len));
    for (auto& v : x) {
        const double z = normal(rng);
        double w = chi2(rng);
        while (!(w > 0.0)) w = chi2(rng);
        v = z / std::sqrt(w / nu);
    }
    return x;
}

std::vector<double> simulate_garch(double omega_g, double alpha, double beta, int t_len, Rng& rng) {
    check_length(t_len);
    if (!(omega_g > 0.0) || !(alpha >= 0.0) || !(beta >= 0.0)) {
        throw std::invalid_argument("simulate_garch: need omega > 0 and alpha, beta >= 0");
    }
    if (!(alpha + beta < 1.0)) throw std::invalid_argument("simulate_garch: alpha + beta must be < 1");
    std::normal_distribution<double> normal(0.0, 1.0);
    double var = omega_g / (1.0 - alpha - beta);
    std::vector<double> x(static_cast<std::size_t>(t_len));
    for (int t = -kGarchBurnIn; t < t_len; ++t) {
        const double xt = std::sqrt(var) * normal(rng);
        if (t >= 0) x[static_cast<std::size_t>(t)] = xt;
        var = omega_g + alpha * xt * xt + beta * var;
    }
    return x;
}

std::pair<double, double> garch_band(int band) {
    switch (band) {
        case 0: return {0.2, 0.6};
        case 1: return {0.6, 0.9};
        case 2: return {0.9, 0.99};
    }
    throw std::out_of_range("garch_band: band must be 0, 1 or 2");
}

std::pair<double, double> sample_garch_band(double lo, double hi, Rng& rng) {
    const double a0 = kGarchMinAlpha;
    if (!(lo > a0) || !(hi > lo) || !(hi < 1.0)) throw std::invalid_argument("sample_garch_band: invalid band");
    // The slice at persistence s has length s - a0, so s has density proportional to s - a0.
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double lo2 = (lo - a0) * (lo - a0);
    const double hi2 = (hi - a0) * (hi - a0);
    const double s = a0 + std::sqrt(lo2 + unif(rng) * (hi2 - lo2));
    const double alpha = a0 + unif(rng) * (s - a0);
    return {alpha, s - alpha};
}

namespace {

double grid_point(double lo, double hi, int k, int n) {
    if (n == 1) return 0.5 * (lo + hi);
    return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
}

// Stride close to n / golden ratio and coprime with n, so that (k * stride) mod n
// visits every grid index once and spreads the second coordinate.
int lattice_stride(int n) {
    if (n <= 2) return 1;
    int s = static_cast<int>(std::lround(n / 1.6180339887498949));
    for (int d = 0; d < n; ++d) {
        for (int c : {s - d, s + d}) {
            if (c >= 1 && c < n && std::gcd(c, n) == 1) return c;
        }
    }
    return 1;
}

enum class Split : std::uint64_t { train = 1, test = 2 };

LabeledDataset normal_or_laplace(int cls, double mu, double scale, int t_len, std::uint64_t seed) {
    Rng rng(seed);
    LabeledDataset d;
    d.label = cls;
    d.seed = seed;
    if (cls == 0) {
        d.family = "normal";
        d.params = {{"mu", mu}, {"sigma", scale}};
        d.sequence = sample_normal(mu, scale, t_len, rng);
    } else {
        d.family = "laplace";
        d.params = {{"mu", mu}, {"b", scale}};
        d.sequence = sample_laplace(mu, scale, t_len, rng);
    }
    return d;
}

LabeledDataset student(double inv_nu, int t_len, std::uint64_t seed) {
    Rng rng(seed);
    LabeledDataset d;
    d.label = inv_nu;
    d.seed = seed;
    d.family = "student_t";
    d.params = {{"nu", 1.0 / inv_nu}};
    d.sequence = sample_student_t(1.0 / inv_nu, t_len, rng);
    return d;
}

LabeledDataset garch(int band, int t_len, std::uint64_t seed) {
    Rng rng(seed);
    const auto [lo, hi] = garch_band(band);
    const auto [alpha, beta] = sample_garch_band(lo, hi, rng);
    LabeledDataset d;
    d.label = band;
    d.seed = seed;
    d.family = "garch";
    d.params = {{"omega", 1.0}, {"alpha", alpha}, {"beta", beta}};
    d.sequence = simulate_garch(1.0, alpha, beta, t_len, rng);
    return d;
}

constexpr double kMuLo = 1.0, kMuHi = 2.0, kScaleLo = 0.1, kScaleHi = 0.7;

std::vector<LabeledDataset> make_sets(Task task, Split split, int t_len, int n, std::uint64_t seed) {
    std::vector<LabeledDataset> sets;
    sets.reserve(static_cast<std::size_t>(n));
    const auto stream = static_cast<std::uint64_t>(split);
    const bool grid = split == Split::train;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        const std::uint64_t ds_seed = mix_seed(seed, stream, static_cast<std::uint64_t>(i));
        switch (task) {
            case Task::normal_vs_laplace: {
                const int cls = i % 2;
                const int per_class = n / 2;
                const int k = i / 2;
                double mu = 0.0, scale = 0.0;
                if (grid) {
                    mu = grid_point(kMuLo, kMuHi, k, per_class);
                    const int stride = lattice_stride(per_class);
                    scale = grid_point(kScaleLo, kScaleHi, (k * stride) % per_class, per_class);
                } else {
                    Rng prng(mix_seed(ds_seed, 0, 0));
                    mu = kMuLo + (kMuHi - kMuLo) * unif(prng);
                    scale = kScaleLo + (kScaleHi - kScaleLo) * unif(prng);
                }
                sets.push_back(normal_or_laplace(cls, mu, scale, t_len, ds_seed));
                break;
            }
            case Task::student_t: {
                double inv_nu = 0.0;
                if (grid) {
                    inv_nu = grid_point(kNuInvLo, kNuInvHi, i, n);
                } else {
                    Rng prng(mix_seed(ds_seed, 0, 0));
                    inv_nu = kNuInvLo + (kNuInvHi - kNuInvLo) * unif(prng);
                }
                sets.push_back(student(inv_nu, t_len, ds_seed));
                break;
            }
            case Task::garch_bands:
                sets.push_back(garch(i % 3, t_len, ds_seed));
                break;
        }
    }
    return sets;
}

}  // namespace

TaskSplit make_split(Task task, int t_len, int n_train, int n_test, std::uint64_t seed) {
    check_length(t_len);
    if (n_train < 2 || n_test < 2) throw std::invalid_argument("make_split: need at least 2 train and 2 test sets");
    const int classes = task_classes(task);
    if (classes > 0 && (n_train % classes != 0 || n_test % classes != 0)) {
        throw std::invalid_argument("make_split: dataset counts must be divisible by the number of classes");
    }
    TaskSplit split;
    split.task = task;
    split.seed = seed;
    split.train = make_sets(task, Split::train, t_len, n_train, seed);
    split.test = make_sets(task, Split::test, t_len, n_test, seed);
    return split;
}

std::vector<std::vector<double>> sequences(const std::vector<LabeledDataset>& sets) {
    std::vector<std::vector<double>> out;
    out.reserve(sets.size());
    for (const auto& d : sets) out.push_back(d.sequence);
    return out;
}

std::vector<double> labels(const std::vector<LabeledDataset>& sets) {
    std::vector<double> out;
    out.reserve(sets.size());
    for (const auto& d : sets) out.push_back(d.label);
    return out;
}

std::vector<int> class_labels(const std::vector<LabeledDataset>& sets) {
    std::vector<int> out;
    out.reserve(sets.size());
    for (const auto& d : sets) out.push_back(static_cast<int>(std::lround(d.label)));
    return out;
}

void write_datasets_csv(std::ostream& out, const std::vector<LabeledDataset>& sets) {
    const std::size_t t_len = sets.empty() ? 0 : sets.front().sequence.size();
    out << "dataset_id,label";
    for (std::size_t t = 1; t <= t_len; ++t) out << ",x_" << t;
    out << '\n';
    for (std::size_t i = 0; i < sets.size(); ++i) {
        out << i << ',' << format_double(sets[i].label);
        for (double v : sets[i].sequence) out << ',' << format_double(v);
        out << '\n';
    }
}

void write_split_metadata(std::ostream& out, const TaskSplit& split) {
    auto describe = [](const std::vector<LabeledDataset>& sets) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < sets.size(); ++i) {
            nlohmann::ordered_json d;
            d["dataset_id"] = i;
            d["family"] = sets[i].family;
            d["label"] = sets[i].label;
            d["seed"] = sets[i].seed;
            d["params"] = sets[i].params;
            arr.push_back(std::move(d));
        }
        return arr;
    };
    nlohmann::ordered_json j;
    j["task"] = task_name(split.task);
    j["seed"] = split.seed;
    j["train"] = describe(split.train);
    j["test"] = describe(split.test);
    out << j.dump(2) << '\n';
}

}  // namespace qrc
