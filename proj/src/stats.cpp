#include "qrc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qrc {

double mean(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("mean: empty input");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double population_std(std::span<const double> x) {
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size()));
}

double sample_std(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double lag1_autocorrelation(std::span<const double> x) {
    if (x.size() < 2) throw std::invalid_argument("lag1_autocorrelation: need at least 2 values");
    const double m = mean(x);
    const auto n = static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - m) * (v - m);
    var /= n;
    if (var < 1e-14) return 0.0;
    double cov = 0.0;
    for (std::size_t t = 0; t + 1 < x.size(); ++t) cov += (x[t] - m) * (x[t + 1] - m);
    cov /= n - 1.0;
    return cov / var;
}

double median(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("median: empty input");
    std::vector<double> v(x.begin(), x.end());
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

double sample_kurtosis(std::span<const double> x) {
    const double m = mean(x);
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d2 = (v - m) * (v - m);
        m2 += d2;
        m4 += d2 * d2;
    }
    const auto n = static_cast<double>(x.size());
    m2 /= n;
    m4 /= n;
    if (m2 <= 0.0) throw std::domain_error("sample_kurtosis: zero variance");
    return m4 / (m2 * m2);
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
}

}  // namespace qrc
