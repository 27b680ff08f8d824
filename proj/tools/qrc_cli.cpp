#include "qrc/experiment.hpp"
#include "qrc/tasks.hpp"
#include "qrc/validation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    bool csv_only = false;
};

qrc::ExperimentConfig resolve(const Common& c, CLI::App& app) {
    qrc::ExperimentConfig cfg = c.config.empty() ? qrc::ExperimentConfig{} : qrc::load_config(c.config);
    if (app.count("--seed")) cfg.seed = c.seed;
    if (!c.out.empty()) cfg.out_dir = c.out;
    return cfg;
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

std::vector<qrc::ResultRow> load_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open results file " + path);
    return qrc::read_results_csv(in);
}

// Recovers "# config_hash=... seed=..." from a results file, if present.
std::pair<std::string, std::uint64_t> results_stamp(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::string hash;
    std::uint64_t seed = 0;
    const auto h = line.find("config_hash=");
    const auto s = line.find("seed=");
    if (line.rfind('#', 0) == 0 && h != std::string::npos && s != std::string::npos) {
        hash = line.substr(h + 12, line.find(' ', h) - h - 12);
        seed = std::stoull(line.substr(s + 5));
    }
    return {hash, seed};
}

int cmd_gen_data(const qrc::ExperimentConfig& cfg) {
    const fs::path dir = fs::path(cfg.out_dir) / "data";
    fs::create_directories(dir);
    const std::string hash = qrc::config_hash(cfg);
    for (int t : cfg.t_grid) {
        for (int rep = 0; rep < cfg.n_repetitions; ++rep) {
            const std::uint64_t seed = qrc::split_seed(cfg.seed, t, rep);
            const qrc::TaskSplit split = qrc::make_split(cfg.task, t, cfg.n_train, cfg.n_test, seed);
            const std::string stem = qrc::task_name(cfg.task) + "_T" + std::to_string(t) + "_r" + std::to_string(rep);
            for (const auto& [name, sets] : {std::pair{"train", &split.train}, std::pair{"test", &split.test}}) {
                std::ofstream out(dir / (stem + "_" + name + ".csv"));
                out << "# config_hash=" << hash << " seed=" << cfg.seed << '\n';
                qrc::write_datasets_csv(out, *sets);
            }
            std::ofstream meta(dir / (stem + "_split.json"));
            std::ostringstream body;
            qrc::write_split_metadata(body, split);
            auto j = nlohmann::ordered_json::parse(body.str());
            j["config_hash"] = hash;
            j["master_seed"] = cfg.seed;
            j["T"] = t;
            j["repetition"] = rep;
            meta << j.dump(2) << '\n';
        }
    }
    std::cout << "wrote datasets to " << dir.string() << '\n';
    return 0;
}

int cmd_run(const qrc::ExperimentConfig& cfg, int workers) {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    const std::string hash = qrc::config_hash(cfg);
    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    const qrc::ExperimentResult res = qrc::run_experiment(cfg, workers, &std::cerr);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    {
        std::ofstream out(dir / "results.csv");
        qrc::write_results_csv(out, res.rows, hash, cfg.seed);
    }
    nlohmann::ordered_json meta;
    meta["config_hash"] = hash;
    meta["master_seed"] = cfg.seed;
    meta["code_version"] = qrc::code_version();
    meta["started_at"] = started;
    meta["wall_time_s"] = wall;
    meta["workers"] = workers;
    meta["clipped_inputs"] = res.clipped_inputs;
    meta["config"] = qrc::canonical_config(cfg);
    nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
    for (const auto& s : res.splits) seeds.push_back({{"T", s.t}, {"repetition", s.repetition}, {"seed", s.seed}});
    meta["split_seeds"] = seeds;
    std::ofstream(dir / "results.meta.json") << meta.dump(2) << '\n';
    std::cout << "wrote " << res.rows.size() << " rows to " << (dir / "results.csv").string() << '\n';
    return 0;
}

int cmd_fit(const std::string& results, const std::string& out_dir, bool csv_only, bool constrain) {
    const auto [hash, seed] = results_stamp(results);
    const fs::path dir = out_dir.empty() ? fs::path(results).parent_path() : fs::path(out_dir);
    const qrc::FitOutput out = qrc::fit_and_report(load_results(results), dir, csv_only, hash, seed, constrain);
    qrc::write_fit_report(std::cout, out.report);
    for (const auto& p : out.plots) std::cout << "plot: " << p.string() << '\n';
    return 0;
}

int cmd_plot(const std::string& results, const std::string& out_dir, bool constrain) {
    const auto [hash, seed] = results_stamp(results);
    const fs::path dir = out_dir.empty() ? fs::path(results).parent_path() : fs::path(out_dir);
    const auto rows = load_results(results);
    // Fitting is deterministic, so re-rendering refits the stored curves.
    const qrc::FitOutput fits = qrc::fit_and_report(rows, dir, true, hash, seed, constrain);
    for (const auto& p : qrc::render_plots(rows, fits.report, dir, hash, seed)) std::cout << "plot: " << p.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum reservoir experiments: datasets, runs, scaling fits and physics checks"};
    app.require_subcommand(1);
    Common c;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", c.config, "Experiment config (INI)")->check(CLI::ExistingFile);
        sub->add_option("--seed", c.seed, "Master seed (overrides the config)");
        sub->add_option("--out", c.out, "Output directory (overrides the config)");
    };

    CLI::App* gen = app.add_subcommand("gen-data", "Write train/test datasets for every (T, repetition)");
    add_common(gen);

    CLI::App* run = app.add_subcommand("run", "Run an experiment and write results.csv");
    add_common(run);
    run->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
    run->add_flag("--csv-only", c.csv_only, "Accepted for symmetry; run never plots");

    std::string results;
    bool constrain = false;
    CLI::App* fit = app.add_subcommand("fit", "Fit scaling laws to a results file");
    fit->add_option("results", results, "results.csv")->required()->check(CLI::ExistingFile);
    fit->add_option("--out", c.out, "Output directory (default: next to the results)");
    fit->add_flag("--csv-only", c.csv_only, "Skip plots");
    fit->add_flag("--constrain-accuracy", constrain, "Keep A_inf <= 1");

    CLI::App* plot = app.add_subcommand("plot", "Re-render plots from a results file");
    plot->add_option("results", results, "results.csv")->required()->check(CLI::ExistingFile);
    plot->add_option("--out", c.out, "Output directory (default: next to the results)");
    plot->add_flag("--constrain-accuracy", constrain, "Keep A_inf <= 1");

    CLI::App* validate = app.add_subcommand("validate", "Run the physics oracle suite");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*gen) return cmd_gen_data(resolve(c, *gen));
        if (*run) return cmd_run(resolve(c, *run), c.workers);
        if (*fit) return cmd_fit(results, c.out, c.csv_only, constrain);
        if (*plot) return cmd_plot(results, c.out, constrain);
        if (*validate) {
            const qrc::PhysicsReport r = qrc::validate_physics();
            qrc::print_physics_report(std::cout, r);
            return r.passed() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
