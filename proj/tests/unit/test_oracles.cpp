// Large-sample statistical checks of the generators and estimators.
#include "qrc/baselines.hpp"
#include "qrc/stats.hpp"
#include "qrc/tasks.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace qrc;

namespace {

double sample_var(const std::vector<double>& x) {
    const double s = population_std(x);
    return s * s;
}

}  // namespace

TEST_CASE("Normal sampler moments") {
    Rng rng(1);
    const int n = 100000;
    const auto x = sample_normal(1.5, 0.4, n, rng);
    CHECK(std::abs(mean(x) - 1.5) < 5.0 * 0.4 / std::sqrt(n));
    CHECK(std::abs(sample_var(x) / 0.16 - 1.0) < 0.05);
}

TEST_CASE("Laplace sampler variance and median") {
    Rng rng(2);
    const int n = 100000;
    const auto x = sample_laplace(0.0, 1.0, n, rng);
    CHECK(std::abs(sample_var(x) / 2.0 - 1.0) < 0.05);
    CHECK(std::abs(median(x)) < 5.0 / std::sqrt(n));
}

TEST_CASE("Student-t sampler limits and tails") {
    Rng rng(3);
    const auto g = sample_student_t(1e6, 100000, rng);
    CHECK(std::abs(sample_kurtosis(g) - 3.0) < 0.1);
    const auto t5 = sample_student_t(5.0, 1000000, rng);
    CHECK(std::abs(sample_var(t5) / (5.0 / 3.0) - 1.0) < 0.05);
    int big = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        Rng r(1000 + s);
        const auto c = sample_student_t(1.0, 10000, r);
        big += *std::max_element(c.begin(), c.end()) > 50.0;
    }
    CHECK(big >= 198);
}

TEST_CASE("GARCH unconditional variance and clustering") {
    Rng rng(4);
    const auto x = simulate_garch(1.0, 0.1, 0.5, 1000000, rng);
    CHECK(std::abs(sample_var(x) / 2.5 - 1.0) < 0.05);
    double kurt = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        Rng r(50 + s);
        kurt += sample_kurtosis(simulate_garch(1.0, 0.15, 0.80, 5000, r));
    }
    CHECK(kurt / 20.0 > 3.5);
}

TEST_CASE("GLRT is consistent at large T") {
    int normal_ok = 0, laplace_ok = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        Rng r(7000 + s);
        normal_ok += glrt_classify(sample_normal(1.5, 0.4, 10000, r)) == 0;
        laplace_ok += glrt_classify(sample_laplace(1.5, 0.4, 10000, r)) == 1;
    }
    CHECK(normal_ok >= 99);
    CHECK(laplace_ok >= 99);
}

TEST_CASE("Student-t MLE is consistent at large T") {
    Rng rng(5);
    CHECK(std::abs(mle_student_inv_nu(sample_student_t(3.0, 100000, rng)).estimate - 1.0 / 3.0) < 0.02);
    CHECK(mle_student_inv_nu(sample_normal(0.0, 1.0, 100000, rng)).estimate < 0.05);
}
