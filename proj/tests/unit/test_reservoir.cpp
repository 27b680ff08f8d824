#include "qrc/reservoir.hpp"
#include "qrc/tasks.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

using namespace qrc;

namespace {

std::vector<double> normal_seq(int n, std::uint64_t seed) {
    Rng rng(seed);
    return sample_normal(1.5, 0.4, n, rng);
}

}  // namespace

TEST_CASE("zero input keeps the reservoir in the vacuum") {
    const NeuronTrajectory tr = run_reservoir(ReservoirParams{}, std::vector<double>(6, 0.0), IntegratorConfig{});
    REQUIRE(tr.rows() == 6);
    REQUIRE(tr.cols() == 9);
    for (Eigen::Index t = 0; t < tr.rows(); ++t) {
        CHECK(std::abs(tr(t, 0) - 1.0) < 1e-7);
        for (Eigen::Index k = 1; k < 9; ++k) CHECK(std::abs(tr(t, k)) < 1e-7);
    }
}

// Parity (-1)^(n1+n2) maps H(x) to H(-x) and fixes the dissipator and the
// vacuum, so a global sign flip leaves every population unchanged.
TEST_CASE("global negation is a symmetry, partial sign flips are not") {
    const ReservoirParams p;
    const std::vector<double> c(5, 1.2), neg(5, -1.2);
    const NeuronTrajectory a = run_reservoir(p, c, IntegratorConfig{});
    const NeuronTrajectory b = run_reservoir(p, neg, IntegratorConfig{});
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);

    const std::vector<double> mixed{1.2, -1.2, 1.2, -1.2, 1.2};
    const NeuronTrajectory m = run_reservoir(p, mixed, IntegratorConfig{});
    CHECK((a - m).cwiseAbs().maxCoeff() > 1e-4);
}

TEST_CASE("trajectories are bitwise reproducible and physical") {
    const ReservoirParams p;
    const auto seq = normal_seq(12, 5);
    const NeuronTrajectory a = run_reservoir(p, seq, IntegratorConfig{});
    const NeuronTrajectory b = run_reservoir(p, seq, IntegratorConfig{});
    CHECK(a == b);
    CHECK(a.minCoeff() >= 0.0);
    CHECK(a.maxCoeff() <= 1.0);
    for (Eigen::Index t = 0; t < a.rows(); ++t) CHECK(a.row(t).sum() <= 1.0 + 1e-7);
    CHECK(a(0, 0) < 0.999);
}

TEST_CASE("run_reservoir rejects bad input and counts clipped symbols") {
    const ReservoirParams p;
    CHECK_THROWS(run_reservoir(p, std::vector<double>{}, IntegratorConfig{}));
    CHECK_THROWS(run_reservoir(p, std::vector<double>{1.0, std::nan("")}, IntegratorConfig{}));

    ReservoirParams small = p;
    small.eps0 = 0.05;
    long clipped = 0;
    const NeuronTrajectory a = run_reservoir(small, std::vector<double>{25.0, -30.0, 3.0}, IntegratorConfig{}, &clipped);
    CHECK(clipped == 2);
    const NeuronTrajectory b = run_reservoir(small, std::vector<double>{20.0, -20.0, 3.0}, IntegratorConfig{});
    CHECK(a == b);
}

TEST_CASE("fading memory: an early difference shrinks") {
    const ReservoirParams p;
    auto s1 = normal_seq(10, 8);
    auto s2 = s1;
    s2[0] += 0.6;
    const NeuronTrajectory a = run_reservoir(p, s1, IntegratorConfig{});
    const NeuronTrajectory b = run_reservoir(p, s2, IntegratorConfig{});
    const double first = (a.row(0) - b.row(0)).cwiseAbs().maxCoeff();
    const double last = (a.row(9) - b.row(9)).cwiseAbs().maxCoeff();
    CHECK(first > 1e-3);
    CHECK(last < first);
}

TEST_CASE("pooling a constant trajectory") {
    NeuronTrajectory tr = NeuronTrajectory::Constant(7, 9, 0.25);
    const Eigen::VectorXd f = pool_features(tr);
    REQUIRE(f.size() == 28);
    for (int k = 0; k < 9; ++k) {
        CHECK(f(3 * k) == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(f(3 * k + 1) == doctest::Approx(0.0));
        CHECK(f(3 * k + 2) == 0.0);
    }
    CHECK(f(27) == 1.0);
}

TEST_CASE("pooling an alternating neuron") {
    NeuronTrajectory tr(4, 1);
    tr << 0, 1, 0, 1;
    const Eigen::VectorXd f = pool_features(tr);
    REQUIRE(f.size() == 4);
    CHECK(f(0) == doctest::Approx(0.5));
    CHECK(f(1) == doctest::Approx(0.5));
    CHECK(f(2) == doctest::Approx(-1.0));
    CHECK(f(3) == 1.0);
}

TEST_CASE("pooling matches hand-computed statistics") {
    NeuronTrajectory tr(5, 2);
    tr.col(0) << 0.1, 0.4, 0.2, 0.7, 0.3;
    tr.col(1) << 0.9, 0.8, 0.8, 0.6, 0.5;
    const Eigen::VectorXd f = pool_features(tr);
    for (int k = 0; k < 2; ++k) {
        const Eigen::VectorXd x = tr.col(k);
        const double m = x.mean();
        const double var = (x.array() - m).square().sum() / 5.0;
        double cov = 0.0;
        for (int t = 0; t < 4; ++t) cov += (x(t) - m) * (x(t + 1) - m);
        cov /= 4.0;
        CHECK(f(3 * k) == doctest::Approx(m).epsilon(1e-14));
        CHECK(f(3 * k + 1) == doctest::Approx(std::sqrt(var)).epsilon(1e-14));
        CHECK(f(3 * k + 2) == doctest::Approx(cov / var).epsilon(1e-12));
    }
    CHECK_THROWS(pool_features(NeuronTrajectory::Zero(1, 9)));
}

TEST_CASE("featurize: shape, order, reset and distinct rows") {
    const ReservoirParams p = [] {
        ReservoirParams q;
        q.eps0 = 1.9;
        return q;
    }();
    Rng rng(21);
    const auto g1 = simulate_garch(1.0, 0.1, 0.5, 8, rng);
    const auto g2 = simulate_garch(1.0, 0.3, 0.65, 8, rng);
    const auto g3 = simulate_garch(1.0, 0.05, 0.2, 8, rng);

    const FeatureMatrix one = featurize_datasets(p, {g1}, IntegratorConfig{});
    CHECK(one.rows() == 1);
    CHECK(one.cols() == 28);

    const FeatureMatrix f = featurize_datasets(p, {g1, g2, g3}, IntegratorConfig{}, 2);
    const FeatureMatrix r = featurize_datasets(p, {g3, g1, g2}, IntegratorConfig{}, 1);
    CHECK(f.row(0) == r.row(1));
    CHECK(f.row(1) == r.row(2));
    CHECK(f.row(2) == r.row(0));
    CHECK(f.row(0) == one.row(0));
    CHECK((f.row(0) - f.row(1)).cwiseAbs().maxCoeff() > 1e-6);
    CHECK(f.col(27).isOnes());

    CHECK_THROWS(featurize_datasets(p, {}, IntegratorConfig{}));
    CHECK_THROWS(featurize_datasets(p, {g1, std::vector<double>(3, 1.0)}, IntegratorConfig{}));
}

TEST_CASE("feature header and CSV") {
    const auto names = feature_names(2);
    REQUIRE(names.size() == 28);
    CHECK(names[0] == "n00_mean");
    CHECK(names[1] == "n00_std");
    CHECK(names[2] == "n00_ac1");
    CHECK(names[26] == "n22_ac1");
    CHECK(names[27] == "bias");
    std::ostringstream out;
    FeatureMatrix f = FeatureMatrix::Zero(2, 28);
    f(1, 0) = 0.125;
    write_feature_csv(out, names, f);
    std::istringstream in(out.str());
    std::string header, row0, row1;
    std::getline(in, header);
    std::getline(in, row0);
    std::getline(in, row1);
    CHECK(header.rfind("n00_mean,n00_std,n00_ac1,n01_mean", 0) == 0);
    CHECK(row1.rfind("0.125,0,", 0) == 0);
    CHECK_THROWS(write_feature_csv(out, feature_names(1), f));
}
