#include "qrc/csv.hpp"
#include "qrc/experiment.hpp"
#include "qrc/stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

using namespace qrc;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("qrc_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("config parsing") {
    const ExperimentConfig c = parse(
        "; comment\n[experiment]\ntask = garch_bands\nT = 10, 40\nn_train = 30\nn_test = 60\nrepetitions = 3\n"
        "methods = classical\nseed = 7\nout = somewhere\n[reservoir]\ntau = 0.5\n[integrator]\nrel_tol = 1e-7\n"
        "[baseline]\nstrict_parity = true\n");
    CHECK(c.task == Task::garch_bands);
    CHECK(c.t_grid == std::vector<int>{10, 40});
    CHECK(c.n_train == 30);
    CHECK(c.n_test == 60);
    CHECK(c.n_repetitions == 3);
    CHECK_FALSE(c.run_qrc);
    CHECK(c.run_classical);
    CHECK(c.seed == 7);
    CHECK(c.out_dir == "somewhere");
    CHECK(c.reservoir.tau == 0.5);
    CHECK(c.reservoir.eps0 == 1.9);
    CHECK(c.integrator.rel_tol == 1e-7);
    CHECK(c.strict_parity);
    CHECK_FALSE(c.constrain_accuracy);

    CHECK(parse("[experiment]\ntask = student_t\n").reservoir.eps0 == 1.0);
    CHECK(parse("[experiment]\ntask = normal_vs_laplace\n").reservoir.eps0 == 3.8);
    CHECK(parse("[experiment]\ntask = student_t\n[reservoir]\neps0 = 2.5\n").reservoir.eps0 == 2.5);
    CHECK(default_eps0(Task::garch_bands) == 1.9);
    CHECK(default_config(Task::student_t).reservoir.eps0 == 1.0);
}

TEST_CASE("malformed configs are rejected") {
    CHECK_THROWS(parse("[experiment]\ntaks = student_t\n"));
    CHECK_THROWS(parse("[nonsense]\nx = 1\n"));
    CHECK_THROWS(parse("[experiment]\ntask = coin_flip\n"));
    CHECK_THROWS(parse("[experiment]\nmethods = qrc, magic\n"));
    CHECK_THROWS(parse("[experiment]\nn_train = many\n"));
    CHECK_THROWS(parse("[experiment]\ntask = garch_bands\nn_train = 20\n"));
    CHECK_THROWS(parse("[fit]\nconstrain_accuracy = perhaps\n"));
    CHECK_THROWS(parse("[reservoir]\nkappa1 = 0\n"));
    CHECK_THROWS(load_config("/nonexistent/config.ini"));
}

TEST_CASE("canonical config and hash") {
    ExperimentConfig a = default_config(Task::student_t);
    ExperimentConfig b = a;
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    CHECK(config_hash(a) == fnv1a_hex(canonical_config(a)));
    b.seed += 1;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.reservoir.eps0 = 1.01;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.out_dir = "elsewhere";
    CHECK(config_hash(a) == config_hash(b));
    CHECK(canonical_config(a).find("seed=20240601") != std::string::npos);
}

TEST_CASE("split seeds are distinct per (T, repetition)") {
    std::set<std::uint64_t> seeds;
    for (int t : {10, 20, 40, 80, 160, 320})
        for (int r = 0; r < 10; ++r) seeds.insert(split_seed(1, t, r));
    CHECK(seeds.size() == 60);
    CHECK(split_seed(1, 10, 0) == split_seed(1, 10, 0));
    CHECK(split_seed(1, 10, 0) != split_seed(2, 10, 0));
}

TEST_CASE("classical-only single point run") {
    ExperimentConfig c = default_config(Task::normal_vs_laplace);
    c.t_grid = {20};
    c.n_repetitions = 1;
    c.run_qrc = false;
    c.n_train = c.n_test = 40;
    const ExperimentResult r = run_experiment(c);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].method == "classical");
    CHECK(r.rows[0].metric == "accuracy");
    CHECK(r.rows[0].value >= 0.0);
    CHECK(r.rows[0].value <= 1.0);
    REQUIRE(r.splits.size() == 1);
    CHECK(r.splits[0].seed == split_seed(c.seed, 20, 0));
}

TEST_CASE("reruns produce byte-identical results") {
    ExperimentConfig c = default_config(Task::garch_bands);
    c.t_grid = {6, 8};
    c.n_repetitions = 2;
    c.n_train = c.n_test = 6;
    c.seed = 123;
    auto render = [&](int workers) {
        const ExperimentResult r = run_experiment(c, workers);
        std::ostringstream out;
        write_results_csv(out, r.rows, config_hash(c), c.seed);
        return out.str();
    };
    const std::string a = render(1);
    CHECK(a == render(1));
    CHECK(a == render(3));
    std::istringstream in(a);
    std::string line;
    std::getline(in, line);
    CHECK(line == "# config_hash=" + config_hash(c) + " seed=123");
    std::getline(in, line);
    CHECK(line == "task,method,T,repetition,metric,value");
}

TEST_CASE("Student-t classical RMSE improves from T=40 to T=160") {
    ExperimentConfig c = default_config(Task::student_t);
    c.t_grid = {40, 160};
    c.n_repetitions = 20;
    c.run_qrc = false;
    const ExperimentResult r = run_experiment(c);
    REQUIRE(r.rows.size() == 40);
    int better = 0;
    for (int rep = 0; rep < 20; ++rep) {
        double r40 = 0, r160 = 0;
        for (const auto& row : r.rows) {
            if (row.repetition != rep) continue;
            (row.t == 40 ? r40 : r160) = row.value;
        }
        better += r160 < r40;
    }
    CHECK(better >= 18);
}

TEST_CASE("QRC and classical on a small Student-t grid give four curve points") {
    ExperimentConfig c = default_config(Task::student_t);
    c.t_grid = {4, 8};
    c.n_repetitions = 2;
    c.n_train = c.n_test = 6;
    const ExperimentResult r = run_experiment(c);
    CHECK(r.rows.size() == 8);
    const auto pts = aggregate(r.rows);
    CHECK(pts.size() == 4);
    for (const auto& p : pts) {
        CHECK(p.count == 2);
        CHECK(p.metric == "rmse");
        CHECK(p.mean >= 0.0);
    }
}

TEST_CASE("mean predictor RMSE") {
    TaskSplit s;
    s.task = Task::student_t;
    for (double v : {0.2, 0.4}) s.train.push_back({{0.0}, v, "", {}, 0});
    for (double v : {0.1, 0.5}) s.test.push_back({{0.0}, v, "", {}, 0});
    CHECK(mean_predictor_rmse(s) == doctest::Approx(0.2));
    CHECK(metric_for(Task::student_t) == "rmse");
    CHECK(metric_for(Task::garch_bands) == "accuracy");
}

TEST_CASE("results CSV round trip and validation") {
    const std::vector<ResultRow> rows{{"student_t", "qrc", 10, 0, "rmse", 0.1234567890123},
                                      {"student_t", "classical", 10, 0, "rmse", 1.0 / 3.0}};
    std::ostringstream out;
    write_results_csv(out, rows, "abc", 5);
    std::istringstream in(out.str());
    const auto back = read_results_csv(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0].method == "qrc");
    CHECK(back[1].value == 1.0 / 3.0);
    CHECK(back[0].t == 10);

    std::istringstream bad("task,method,T,rep,metric,value\n");
    CHECK_THROWS(read_results_csv(bad));
    std::istringstream short_row("task,method,T,repetition,metric,value\nx,y,1\n");
    CHECK_THROWS(read_results_csv(short_row));
    std::istringstream empty("");
    CHECK_THROWS(read_results_csv(empty));
}

TEST_CASE("aggregation and fit sigma floor") {
    const std::vector<ResultRow> rows{{"t", "qrc", 10, 0, "accuracy", 0.6},
                                      {"t", "qrc", 10, 1, "accuracy", 0.8},
                                      {"t", "qrc", 20, 0, "accuracy", 0.9},
                                      {"t", "qrc", 20, 1, "accuracy", 0.9}};
    const auto pts = aggregate(rows);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].mean == doctest::Approx(0.7));
    CHECK(pts[0].std == doctest::Approx(std::sqrt(0.02)));
    CHECK(fit_sigma(pts[0]) == doctest::Approx(std::sqrt(0.02)));
    CHECK(pts[1].std == 0.0);
    CHECK(fit_sigma(pts[1]) == 1e-3);
    CurvePoint r{"t", "qrc", "rmse", 10, 0.5, 0.0, 3};
    CHECK(fit_sigma(r) == doctest::Approx(5e-4));
}

TEST_CASE("fit_and_report on a synthetic results table") {
    const std::vector<double> q{0.95, 0.4, 0.3};
    std::mt19937_64 rng(8);
    std::normal_distribution<double> z;
    std::vector<ResultRow> rows;
    // Per-T offset and per-rep spread share one scale, so the true law fits with chi2_red near 1.
    const double s = 1e-4;
    for (int t : {10, 20, 40, 80, 160, 320, 640}) {
        const double centre = evaluate_law(Law::acc_power, q, t) + s * z(rng);
        for (int rep = 0; rep < 10; ++rep)
            rows.push_back({"garch_bands", "qrc", t, rep, "accuracy", centre + (rep % 2 ? s : -s)});
    }
    const fs::path dir = scratch("fit");
    const FitOutput out = fit_and_report(rows, dir, false, "feedbeef", 42);
    REQUIRE(out.report.size() == 1);
    const ScalingFit& f = out.report[0].fit;
    CHECK(f.law == Law::acc_power);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(f.params(i) - q[i]) <= 3.0 * f.param_sigmas(i));

    const std::string report = slurp(dir / "fit_report.csv");
    CHECK(report.rfind("# config_hash=feedbeef seed=42\ntask,law,A_inf/r_inf,c,k,p,chi2_red\n", 0) == 0);

    REQUIRE(fs::exists(dir / "garch_bands_scaling.svg"));
    const std::string svg = slurp(dir / "garch_bands_scaling.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("config_hash=feedbeef") != std::string::npos);
    std::size_t markers = 0;
    for (std::size_t p = svg.find("class=\"marker\""); p != std::string::npos; p = svg.find("class=\"marker\"", p + 1))
        ++markers;
    CHECK(markers == 7);
    CHECK(svg.find("class=\"asymptote\"") != std::string::npos);
    CHECK(svg.find("stroke-dasharray") != std::string::npos);
    CHECK(fs::exists(dir / "garch_bands_qrc_linearized.svg"));

    const fs::path csv_only = scratch("fit_csv_only");
    const FitOutput no_plots = fit_and_report(rows, csv_only, true);
    CHECK(no_plots.plots.empty());
    CHECK_FALSE(fs::exists(csv_only / "garch_bands_scaling.svg"));
    CHECK(slurp(csv_only / "fit_report.csv").find("acc_power") != std::string::npos);
}

TEST_CASE("fit_and_report refuses curves with too few T values") {
    std::vector<ResultRow> rows;
    for (int t : {10, 40})
        for (int rep = 0; rep < 3; ++rep) rows.push_back({"normal_vs_laplace", "qrc", t, rep, "accuracy", 0.6 + 0.01 * rep});
    CHECK_THROWS_WITH_AS(fit_and_report(rows, scratch("refuse"), true),
                         doctest::Contains("distinct T values"), std::invalid_argument);
    CHECK_THROWS(fit_and_report({}, scratch("refuse2"), true));
}
