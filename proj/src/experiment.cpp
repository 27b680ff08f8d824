#include "qrc/experiment.hpp"

#include "qrc/baselines.hpp"
#include "qrc/csv.hpp"
#include "qrc/plot.hpp"
#include "qrc/readout.hpp"
#include "qrc/reservoir.hpp"
#include "qrc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace qrc {

const char* code_version() { return QRC_VERSION; }

double default_eps0(Task task) {
    switch (task) {
        case Task::normal_vs_laplace: return 3.8;
        case Task::student_t: return 1.0;
        case Task::garch_bands: return 1.9;
    }
    return 1.0;
}

ExperimentConfig default_config(Task task) {
    ExperimentConfig cfg;
    cfg.task = task;
    cfg.reservoir.eps0 = default_eps0(task);
    return cfg;
}

void ExperimentConfig::validate() const {
    if (t_grid.empty()) throw std::invalid_argument("config: T grid is empty");
    for (int t : t_grid) {
        if (t < 2) throw std::invalid_argument("config: every T must be >= 2");
    }
    if (n_repetitions < 1) throw std::invalid_argument("config: repetitions must be >= 1");
    if (!run_qrc && !run_classical) throw std::invalid_argument("config: no method selected");
    const int classes = task_classes(task);
    if (n_train < 2 || n_test < 2) throw std::invalid_argument("config: need n_train, n_test >= 2");
    if (classes > 0 && (n_train % classes || n_test % classes)) {
        throw std::invalid_argument("config: n_train and n_test must be divisible by the number of classes");
    }
    reservoir.validate();
    integrator.validate();
}

namespace {

namespace pt = boost::property_tree;

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    for (auto& cell : split_csv_line(s)) {
        if (!cell.empty()) out.push_back(cell);
    }
    return out;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw std::invalid_argument("config: not a boolean: '" + s + "'");
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    const std::map<std::string, std::set<std::string>> known = {
        {"experiment", {"task", "T", "n_train", "n_test", "repetitions", "methods", "seed", "out"}},
        {"reservoir",
         {"omega1", "omega2", "g12", "u", "kappa1", "kappa2", "eps0", "n_cutoff", "m_measure", "tau", "input_clip"}},
        {"integrator", {"rel_tol", "abs_tol", "max_step", "initial_step", "hermitize_every", "max_steps"}},
        {"baseline", {"strict_parity"}},
        {"fit", {"constrain_accuracy"}},
    };
    for (const auto& [section, body] : tree) {
        const auto it = known.find(section);
        if (it == known.end()) throw std::invalid_argument("config: unknown section [" + section + "]");
        if (!body.data().empty() && body.empty()) throw std::invalid_argument("config: key outside a section: " + section);
        for (const auto& [key, value] : body) {
            if (!it->second.count(key)) throw std::invalid_argument("config: unknown key " + section + "." + key);
        }
    }
    auto get = [&](const char* path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return *v;
        return std::nullopt;
    };

    ExperimentConfig cfg;
    if (auto v = get("experiment.task")) cfg.task = parse_task(*v);
    cfg.reservoir.eps0 = default_eps0(cfg.task);
    if (auto v = get("experiment.T")) {
        cfg.t_grid.clear();
        for (const auto& t : split_list(*v)) cfg.t_grid.push_back(static_cast<int>(parse_long(t)));
    }
    if (auto v = get("experiment.n_train")) cfg.n_train = static_cast<int>(parse_long(*v));
    if (auto v = get("experiment.n_test")) cfg.n_test = static_cast<int>(parse_long(*v));
    if (auto v = get("experiment.repetitions")) cfg.n_repetitions = static_cast<int>(parse_long(*v));
    if (auto v = get("experiment.methods")) {
        cfg.run_qrc = cfg.run_classical = false;
        for (const auto& m : split_list(*v)) {
            if (m == "qrc") cfg.run_qrc = true;
            else if (m == "classical") cfg.run_classical = true;
            else throw std::invalid_argument("config: unknown method '" + m + "'");
        }
    }
    if (auto v = get("experiment.seed")) cfg.seed = static_cast<std::uint64_t>(parse_long(*v));
    if (auto v = get("experiment.out")) cfg.out_dir = *v;

    ReservoirParams& r = cfg.reservoir;
    const std::pair<const char*, double*> reals[] = {
        {"reservoir.omega1", &r.omega1}, {"reservoir.omega2", &r.omega2}, {"reservoir.g12", &r.g12},
        {"reservoir.u", &r.u},           {"reservoir.kappa1", &r.kappa1}, {"reservoir.kappa2", &r.kappa2},
        {"reservoir.eps0", &r.eps0},     {"reservoir.tau", &r.tau},       {"reservoir.input_clip", &r.input_clip},
        {"integrator.rel_tol", &cfg.integrator.rel_tol},
        {"integrator.abs_tol", &cfg.integrator.abs_tol},
        {"integrator.max_step", &cfg.integrator.max_step},
        {"integrator.initial_step", &cfg.integrator.initial_step},
    };
    for (const auto& [path, dst] : reals) {
        if (auto v = get(path)) *dst = parse_double(*v);
    }
    if (auto v = get("reservoir.n_cutoff")) r.n_cutoff = static_cast<int>(parse_long(*v));
    if (auto v = get("reservoir.m_measure")) r.m_measure = static_cast<int>(parse_long(*v));
    if (auto v = get("integrator.hermitize_every")) cfg.integrator.hermitize_every = static_cast<int>(parse_long(*v));
    if (auto v = get("integrator.max_steps")) cfg.integrator.max_steps = parse_long(*v);
    if (auto v = get("baseline.strict_parity")) cfg.strict_parity = parse_bool(*v);
    if (auto v = get("fit.constrain_accuracy")) cfg.constrain_accuracy = parse_bool(*v);
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path.string());
    return parse_config(in);
}

std::string canonical_config(const ExperimentConfig& cfg) {
    std::ostringstream s;
    const ReservoirParams& r = cfg.reservoir;
    const IntegratorConfig& ic = cfg.integrator;
    s << "task=" << task_name(cfg.task) << "\nT=";
    for (std::size_t i = 0; i < cfg.t_grid.size(); ++i) s << (i ? "," : "") << cfg.t_grid[i];
    s << "\nn_train=" << cfg.n_train << "\nn_test=" << cfg.n_test << "\nrepetitions=" << cfg.n_repetitions
      << "\nqrc=" << cfg.run_qrc << "\nclassical=" << cfg.run_classical << "\nseed=" << cfg.seed
      << "\nomega1=" << format_double(r.omega1) << "\nomega2=" << format_double(r.omega2)
      << "\ng12=" << format_double(r.g12) << "\nu=" << format_double(r.u) << "\nkappa1=" << format_double(r.kappa1)
      << "\nkappa2=" << format_double(r.kappa2) << "\neps0=" << format_double(r.eps0) << "\nn_cutoff=" << r.n_cutoff
      << "\nm_measure=" << r.m_measure << "\ntau=" << format_double(r.tau)
      << "\ninput_clip=" << format_double(r.input_clip) << "\nrel_tol=" << format_double(ic.rel_tol)
      << "\nabs_tol=" << format_double(ic.abs_tol) << "\nmax_step=" << format_double(ic.max_step)
      << "\ninitial_step=" << format_double(ic.initial_step) << "\nhermitize_every=" << ic.hermitize_every
      << "\nmax_steps=" << ic.max_steps << "\nstrict_parity=" << cfg.strict_parity
      << "\nconstrain_accuracy=" << cfg.constrain_accuracy << '\n';
    return s.str();
}

std::string config_hash(const ExperimentConfig& cfg) { return fnv1a_hex(canonical_config(cfg)); }

std::uint64_t split_seed(std::uint64_t master, int t_len, int repetition) {
    return mix_seed(master, static_cast<std::uint64_t>(t_len), static_cast<std::uint64_t>(repetition));
}

std::string metric_for(Task task) { return task == Task::student_t ? "rmse" : "accuracy"; }

namespace {

Eigen::VectorXd as_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

double evaluate_qrc(const TaskSplit& split, const ExperimentConfig& cfg, int workers, long* clipped) {
    const FeatureMatrix f_train = featurize_datasets(cfg.reservoir, sequences(split.train), cfg.integrator, workers, clipped);
    const FeatureMatrix f_test = featurize_datasets(cfg.reservoir, sequences(split.test), cfg.integrator, workers, clipped);
    const Eigen::VectorXd w = train_readout(f_train, as_vector(labels(split.train)));
    const Eigen::VectorXd y = predict(f_test, w);
    if (split.task == Task::student_t) {
        const std::vector<double> pred(y.data(), y.data() + y.size());
        return rmse(pred, labels(split.test));
    }
    return accuracy(classify_all(y, task_thresholds(split.task)), class_labels(split.test));
}

double evaluate_classical(const TaskSplit& split, const ExperimentConfig& cfg) {
    switch (split.task) {
        case Task::normal_vs_laplace: {
            std::vector<int> pred;
            for (const auto& d : split.test) pred.push_back(glrt_classify(d.sequence));
            return accuracy(pred, class_labels(split.test));
        }
        case Task::student_t: {
            std::vector<double> pred;
            for (const auto& d : split.test) pred.push_back(mle_student_inv_nu(d.sequence).estimate);
            return rmse(pred, labels(split.test));
        }
        case Task::garch_bands: return classical_garch_classify(split, cfg.strict_parity);
    }
    throw std::invalid_argument("evaluate_classical: unknown task");
}

double mean_predictor_rmse(const TaskSplit& split) {
    const std::vector<double> train = labels(split.train);
    const std::vector<double> test = labels(split.test);
    const std::vector<double> pred(test.size(), mean(train));
    return rmse(pred, test);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers, std::ostream* log) {
    cfg.validate();
    ExperimentResult res;
    const std::string task = task_name(cfg.task);
    const std::string metric = metric_for(cfg.task);
    for (int t : cfg.t_grid) {
        for (int rep = 0; rep < cfg.n_repetitions; ++rep) {
            const std::uint64_t seed = split_seed(cfg.seed, t, rep);
            res.splits.push_back({t, rep, seed});
            const TaskSplit split = make_split(cfg.task, t, cfg.n_train, cfg.n_test, seed);
            auto record = [&](const char* method, auto&& eval) {
                double value = 0.0;
                try {
                    value = eval();
                } catch (const std::exception& e) {
                    throw std::runtime_error("run_experiment: " + std::string(method) + " failed at T=" +
                                             std::to_string(t) + " repetition=" + std::to_string(rep) + ": " +
                                             e.what());
                }
                res.rows.push_back({task, method, t, rep, metric, value});
                if (log) *log << task << ' ' << method << " T=" << t << " rep=" << rep << ' ' << metric << '='
                              << value << std::endl;
            };
            if (cfg.run_qrc) record("qrc", [&] { return evaluate_qrc(split, cfg, workers, &res.clipped_inputs); });
            if (cfg.run_classical) record("classical", [&] { return evaluate_classical(split, cfg); });
        }
    }
    return res;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, const std::string& hash,
                       std::uint64_t seed) {
    out << "# config_hash=" << hash << " seed=" << seed << '\n';
    out << "task,method,T,repetition,metric,value\n";
    for (const auto& r : rows) {
        out << r.task << ',' << r.method << ',' << r.t << ',' << r.repetition << ',' << r.metric << ','
            << format_double(r.value) << '\n';
    }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
    std::vector<ResultRow> rows;
    std::string line;
    bool header = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split_csv_line(line);
        if (!header) {
            if (line != "task,method,T,repetition,metric,value") {
                throw std::invalid_argument("results: unexpected header '" + line + "'");
            }
            header = true;
            continue;
        }
        if (cells.size() != 6) throw std::invalid_argument("results: line " + std::to_string(lineno) + " needs 6 cells");
        rows.push_back({cells[0], cells[1], static_cast<int>(parse_long(cells[2])), static_cast<int>(parse_long(cells[3])),
                        cells[4], parse_double(cells[5])});
    }
    if (!header) throw std::invalid_argument("results: missing header");
    return rows;
}

std::vector<CurvePoint> aggregate(const std::vector<ResultRow>& rows) {
    std::map<std::tuple<std::string, std::string, int>, std::pair<std::string, std::vector<double>>> groups;
    for (const auto& r : rows) {
        auto& g = groups[{r.task, r.method, r.t}];
        g.first = r.metric;
        g.second.push_back(r.value);
    }
    std::vector<CurvePoint> out;
    for (const auto& [key, g] : groups) {
        CurvePoint p;
        std::tie(p.task, p.method, p.t) = key;
        p.metric = g.first;
        p.mean = mean(g.second);
        p.std = sample_std(g.second);
        p.count = static_cast<int>(g.second.size());
        out.push_back(p);
    }
    return out;
}

double fit_sigma(const CurvePoint& p) {
    if (p.std > 0.0) return p.std;
    return p.metric == "rmse" ? std::max(1e-3 * std::abs(p.mean), 1e-12) : 1e-3;
}

namespace {

using CurveKey = std::pair<std::string, std::string>;

std::map<CurveKey, std::vector<CurvePoint>> curves(const std::vector<ResultRow>& rows) {
    std::map<CurveKey, std::vector<CurvePoint>> out;
    for (const auto& p : aggregate(rows)) out[{p.task, p.method}].push_back(p);
    return out;
}

std::string stamp(const std::string& hash, std::uint64_t seed) {
    return "config_hash=" + hash + " seed=" + std::to_string(seed);
}

const char* method_color(const std::string& method) { return method == "qrc" ? "#d62728" : "#1f77b4"; }

// Linearized coordinates for a selected law: x and ln of the residual to the asymptote.
bool linearized_point(const ScalingFit& fit, double t, double value, double& x, double& y) {
    const Eigen::VectorXd& th = fit.params;
    double resid = 0.0;
    switch (fit.law) {
        case Law::acc_stretched: x = std::pow(t, th(3)); resid = th(0) - value; break;
        case Law::acc_power: x = std::log(t); resid = th(0) - value; break;
        case Law::rmse_power: x = std::log(t); resid = value; break;
        case Law::rmse_logpower: x = std::log(std::log(t)); resid = value; break;
        case Law::rmse_expfloor: x = std::pow(t, th(3)); resid = value - th(0); break;
    }
    if (!(resid > 0.0) || !std::isfinite(x)) return false;
    y = std::log(resid);
    return true;
}

std::string safe_name(std::string s) {
    for (char& c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') c = '_';
    }
    return s;
}

}  // namespace

std::vector<std::filesystem::path> render_plots(const std::vector<ResultRow>& rows,
                                                const std::vector<FitReportRow>& fits,
                                                const std::filesystem::path& out_dir, const std::string& hash,
                                                std::uint64_t seed) {
    std::filesystem::create_directories(out_dir);
    const auto by_curve = curves(rows);
    std::map<std::string, std::vector<CurveKey>> by_task;
    for (const auto& [key, pts] : by_curve) by_task[key.first].push_back(key);
    auto find_fit = [&](const CurveKey& key) -> const ScalingFit* {
        for (const auto& f : fits) {
            if (f.task == key.first && f.method == key.second) return &f.fit;
        }
        return nullptr;
    };

    std::vector<std::filesystem::path> written;
    for (const auto& [task, keys] : by_task) {
        PlotSpec spec;
        spec.title = task;
        spec.x_label = "T";
        spec.y_label = by_curve.at(keys.front()).front().metric;
        spec.log_x = true;
        spec.description = stamp(hash, seed);
        for (const auto& key : keys) {
            const auto& pts = by_curve.at(key);
            PlotSeries s;
            s.label = key.second;
            s.color = method_color(key.second);
            double t_lo = pts.front().t, t_hi = pts.front().t;
            for (const auto& p : pts) {
                s.x.push_back(p.t);
                s.y.push_back(p.mean);
                s.err.push_back(p.std);
                t_lo = std::min<double>(t_lo, p.t);
                t_hi = std::max<double>(t_hi, p.t);
            }
            spec.series.push_back(s);
            if (const ScalingFit* fit = find_fit(key)) {
                PlotCurve c;
                c.label = key.second + " " + law_name(fit->law);
                c.color = s.color;
                const std::span<const double> th(fit->params.data(), static_cast<std::size_t>(fit->params.size()));
                for (int i = 0; i <= 100; ++i) {
                    const double t = t_lo * std::pow(t_hi / t_lo, i / 100.0);
                    if (fit->law == Law::rmse_logpower && !(t > 1.0)) continue;
                    c.x.push_back(t);
                    c.y.push_back(evaluate_law(fit->law, th, t));
                }
                spec.curves.push_back(c);
                const int ia = std::max(law_param_index(fit->law, "A_inf"), law_param_index(fit->law, "r_inf"));
                if (ia >= 0) spec.asymptotes.push_back({fit->params(ia), s.color, key.second + " asymptote"});
            }
        }
        const auto path = out_dir / (safe_name(task) + "_scaling.svg");
        std::ofstream out(path);
        write_svg(out, spec);
        written.push_back(path);

        for (const auto& key : keys) {
            const ScalingFit* fit = find_fit(key);
            if (!fit) continue;
            PlotSpec lin;
            lin.title = task + " " + key.second + " linearized (" + law_name(fit->law) + ")";
            lin.x_label = fit->law == Law::acc_stretched || fit->law == Law::rmse_expfloor ? "T^p"
                          : fit->law == Law::rmse_logpower                               ? "ln ln T"
                                                                                           : "ln T";
            lin.y_label = is_accuracy_law(fit->law) ? "ln(A_inf - A)"
                          : fit->law == Law::rmse_expfloor ? "ln(RMSE - r_inf)"
                                                           : "ln RMSE";
            lin.description = stamp(hash, seed);
            PlotSeries s;
            s.label = key.second;
            s.color = method_color(key.second);
            PlotCurve c;
            c.label = law_name(fit->law);
            c.color = s.color;
            const std::span<const double> th(fit->params.data(), static_cast<std::size_t>(fit->params.size()));
            for (const auto& p : by_curve.at(key)) {
                double x = 0.0, y = 0.0;
                if (!linearized_point(*fit, p.t, p.mean, x, y)) continue;
                s.x.push_back(x);
                s.y.push_back(y);
                const double resid = std::exp(y);
                s.err.push_back(fit_sigma(p) / resid);
                double fx = 0.0, fy = 0.0;
                if (linearized_point(*fit, p.t, evaluate_law(fit->law, th, p.t), fx, fy)) {
                    c.x.push_back(fx);
                    c.y.push_back(fy);
                }
            }
            lin.series.push_back(s);
            lin.curves.push_back(c);
            const auto lpath = out_dir / (safe_name(task + "_" + key.second) + "_linearized.svg");
            std::ofstream lout(lpath);
            write_svg(lout, lin);
            written.push_back(lpath);
        }
    }
    return written;
}

FitOutput fit_and_report(const std::vector<ResultRow>& rows, const std::filesystem::path& out_dir, bool csv_only,
                         const std::string& hash, std::uint64_t seed, bool constrain_accuracy) {
    if (rows.empty()) throw std::invalid_argument("fit: results table is empty");
    FitOutput out;
    WlsOptions opts;
    opts.constrain_accuracy = constrain_accuracy;
    for (const auto& [key, pts] : curves(rows)) {
        const bool acc = pts.front().metric == "accuracy";
        const std::vector<Law> candidates = acc ? accuracy_laws() : rmse_laws();
        int max_params = 0;
        for (Law l : candidates) max_params = std::max(max_params, law_param_count(l));
        if (static_cast<int>(pts.size()) < max_params + 1) {
            throw std::invalid_argument("fit: curve " + key.first + "/" + key.second + " has " +
                                        std::to_string(pts.size()) + " distinct T values; at least " +
                                        std::to_string(max_params + 1) + " are needed");
        }
        std::vector<ScalingDatum> data;
        for (const auto& p : pts) data.push_back({static_cast<double>(p.t), p.mean, fit_sigma(p)});
        out.report.push_back({key.first, key.second, select_law(data, candidates, opts)});
    }
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream rep(out_dir / "fit_report.csv");
        rep << "# " << stamp(hash, seed) << '\n';
        write_fit_report(rep, out.report);
    }
    if (!csv_only) out.plots = render_plots(rows, out.report, out_dir, hash, seed);
    return out;
}

}  // namespace qrc
