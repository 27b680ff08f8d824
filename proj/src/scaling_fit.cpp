#include "qrc/scaling_fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace qrc {

std::string law_name(Law law) {
    switch (law) {
        case Law::acc_stretched: return "acc_stretched";
        case Law::acc_power: return "acc_power";
        case Law::rmse_power: return "rmse_power";
        case Law::rmse_logpower: return "rmse_logpower";
        case Law::rmse_expfloor: return "rmse_expfloor";
    }
    throw std::invalid_argument("law_name: unknown law");
}

Law parse_law(std::string_view name) {
    for (Law law : {Law::acc_stretched, Law::acc_power, Law::rmse_power, Law::rmse_logpower, Law::rmse_expfloor}) {
        if (law_name(law) == name) return law;
    }
    throw std::invalid_argument("unknown law '" + std::string(name) + "'");
}

std::vector<std::string> law_param_names(Law law) {
    switch (law) {
        case Law::acc_stretched: return {"A_inf", "c", "k", "p"};
        case Law::acc_power: return {"A_inf", "c", "p"};
        case Law::rmse_power: return {"c", "p"};
        case Law::rmse_logpower: return {"c", "p"};
        case Law::rmse_expfloor: return {"r_inf", "c", "k", "p"};
    }
    throw std::invalid_argument("law_param_names: unknown law");
}

int law_param_count(Law law) { return static_cast<int>(law_param_names(law).size()); }

int law_param_index(Law law, std::string_view name) {
    const auto names = law_param_names(law);
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return static_cast<int>(i);
    }
    return -1;
}

bool is_accuracy_law(Law law) { return law == Law::acc_stretched || law == Law::acc_power; }

std::vector<Law> accuracy_laws() { return {Law::acc_stretched, Law::acc_power}; }

std::vector<Law> rmse_laws() { return {Law::rmse_power, Law::rmse_logpower, Law::rmse_expfloor}; }

namespace {

void check_params(Law law, std::span<const double> params) {
    if (static_cast<int>(params.size()) != law_param_count(law)) {
        throw std::invalid_argument("law " + law_name(law) + ": expected " + std::to_string(law_param_count(law)) +
                                    " parameters");
    }
}

void check_t(Law law, double t) {
    if (!(t >= 1.0)) throw std::invalid_argument("evaluate_law: T must be >= 1");
    if (law == Law::rmse_logpower && !(t > 1.0)) throw std::invalid_argument("evaluate_law: log-power law needs T > 1");
}

}  // namespace

double evaluate_law(Law law, std::span<const double> params, double t) {
    check_params(law, params);
    check_t(law, t);
    switch (law) {
        case Law::acc_stretched: return params[0] - params[1] * std::exp(-params[2] * std::pow(t, params[3]));
        case Law::acc_power: return params[0] - params[1] * std::pow(t, -params[2]);
        case Law::rmse_power: return params[0] * std::pow(t, -params[1]);
        case Law::rmse_logpower: return params[0] * std::pow(std::log(t), -params[1]);
        case Law::rmse_expfloor: return params[0] + params[1] * std::exp(-params[2] * std::pow(t, params[3]));
    }
    throw std::invalid_argument("evaluate_law: unknown law");
}

Eigen::VectorXd law_gradient(Law law, std::span<const double> params, double t) {
    check_params(law, params);
    check_t(law, t);
    Eigen::VectorXd g(law_param_count(law));
    const double lt = std::log(t);
    switch (law) {
        case Law::acc_stretched:
        case Law::rmse_expfloor: {
            const double sign = law == Law::acc_stretched ? -1.0 : 1.0;
            const double c = params[1], k = params[2], p = params[3];
            const double tp = std::pow(t, p);
            const double e = std::exp(-k * tp);
            g << 1.0, sign * e, -sign * c * tp * e, -sign * c * k * tp * lt * e;
            break;
        }
        case Law::acc_power: {
            const double tp = std::pow(t, -params[2]);
            g << 1.0, -tp, params[1] * tp * lt;
            break;
        }
        case Law::rmse_power: {
            const double tp = std::pow(t, -params[1]);
            g << tp, -params[0] * tp * lt;
            break;
        }
        case Law::rmse_logpower: {
            const double ll = std::log(lt);
            const double lp = std::pow(lt, -params[1]);
            g << lp, -params[0] * lp * ll;
            break;
        }
    }
    return g;
}

namespace {

void check_data(std::span<const ScalingDatum> data, Law law) {
    if (static_cast<int>(data.size()) <= law_param_count(law)) {
        throw std::invalid_argument("fit " + law_name(law) + ": need more points than parameters");
    }
    for (const auto& d : data) {
        if (!(d.sigma > 0.0) || !std::isfinite(d.sigma) || !std::isfinite(d.value)) {
            throw std::invalid_argument("fit: every datum needs a finite value and sigma > 0");
        }
        check_t(law, d.t);
    }
}

std::optional<Eigen::VectorXd> normalized_residuals(std::span<const ScalingDatum> data, Law law,
                                                    const Eigen::VectorXd& theta) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        r(static_cast<Eigen::Index>(i)) =
            (data[i].value - evaluate_law(law, {theta.data(), static_cast<std::size_t>(theta.size())}, data[i].t)) /
            data[i].sigma;
    }
    if (!r.allFinite()) return std::nullopt;
    return r;
}

Eigen::MatrixXd residual_jacobian(std::span<const ScalingDatum> data, Law law, const Eigen::VectorXd& theta) {
    Eigen::MatrixXd j(static_cast<Eigen::Index>(data.size()), theta.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        j.row(static_cast<Eigen::Index>(i)) =
            -law_gradient(law, {theta.data(), static_cast<std::size_t>(theta.size())}, data[i].t).transpose() /
            data[i].sigma;
    }
    return j;
}

// Sigmas from chi2_red * (J^T J)^-1. Parameters touching the null space of
// J^T J get an infinite sigma and the fit is flagged degenerate.
void fill_covariance(ScalingFit& fit, const Eigen::MatrixXd& jac) {
    const Eigen::Index m = jac.cols();
    const Eigen::MatrixXd a = jac.transpose() * jac;
    Eigen::VectorXd scale(m);
    for (Eigen::Index i = 0; i < m; ++i) scale(i) = a(i, i) > 0.0 ? 1.0 / std::sqrt(a(i, i)) : 0.0;
    const Eigen::MatrixXd as = scale.asDiagonal() * a * scale.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(as);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double ev_max = ev.cwiseAbs().maxCoeff();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(m);
    std::vector<bool> unidentified(static_cast<std::size_t>(m), false);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (scale(i) == 0.0) unidentified[static_cast<std::size_t>(i)] = true;
    }
    for (Eigen::Index k = 0; k < m; ++k) {
        if (ev(k) > 1e-12 * ev_max && ev_max > 0.0) {
            inv(k) = 1.0 / ev(k);
        } else {
            fit.degenerate = true;
            for (Eigen::Index i = 0; i < m; ++i) {
                if (std::abs(eig.eigenvectors()(i, k)) > 1e-8) unidentified[static_cast<std::size_t>(i)] = true;
            }
        }
    }
    fit.degenerate = fit.degenerate || std::any_of(unidentified.begin(), unidentified.end(), [](bool b) { return b; });
    const Eigen::MatrixXd cov = scale.asDiagonal() * eig.eigenvectors() * inv.asDiagonal() *
                                eig.eigenvectors().transpose() * scale.asDiagonal() * fit.chi2_red;
    fit.param_sigmas.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        fit.param_sigmas(i) = unidentified[static_cast<std::size_t>(i)] ? std::numeric_limits<double>::infinity()
                                                                        : std::sqrt(std::max(cov(i, i), 0.0));
    }
}

void project(Law law, Eigen::VectorXd& theta, const WlsOptions& opts) {
    if (opts.constrain_accuracy && is_accuracy_law(law)) theta(0) = std::min(theta(0), 1.0);
}

}  // namespace

ScalingFit wls_fit(std::span<const ScalingDatum> data, Law law, std::span<const double> init, const WlsOptions& opts) {
    check_data(data, law);
    check_params(law, init);
    const int m = law_param_count(law);
    Eigen::VectorXd theta = Eigen::Map<const Eigen::VectorXd>(init.data(), m);
    project(law, theta, opts);
    auto r = normalized_residuals(data, law, theta);
    if (!r) throw std::invalid_argument("wls_fit: initial parameters give non-finite residuals");
    double chi2 = r->squaredNorm();

    ScalingFit fit;
    fit.law = law;
    fit.dof = static_cast<int>(data.size()) - m;
    double lambda = 1e-3;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        if (chi2 == 0.0) {
            fit.converged = true;
            break;
        }
        const Eigen::MatrixXd jac = residual_jacobian(data, law, theta);
        const Eigen::MatrixXd a = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * *r;
        const double dmax = a.diagonal().maxCoeff();
        const Eigen::VectorXd damp =
            dmax > 0.0 ? a.diagonal().cwiseMax(1e-12 * dmax).eval() : Eigen::VectorXd::Ones(m).eval();
        bool accepted = false;
        double chi2_new = chi2;
        Eigen::VectorXd cand;
        std::optional<Eigen::VectorXd> r_new;
        while (lambda < 1e20) {
            Eigen::MatrixXd lhs = a;
            lhs.diagonal() += lambda * damp;
            cand = theta + lhs.ldlt().solve(-g);
            project(law, cand, opts);
            if (cand.allFinite()) {
                r_new = normalized_residuals(data, law, cand);
                if (r_new && r_new->squaredNorm() < chi2) {
                    chi2_new = r_new->squaredNorm();
                    accepted = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // No damped step lowers chi2: a minimum to working precision.
            fit.converged = true;
            break;
        }
        const double rel = (chi2 - chi2_new) / chi2;
        theta = cand;
        r = std::move(r_new);
        chi2 = chi2_new;
        lambda = std::max(lambda * 0.1, 1e-12);
        if (rel < opts.rel_tol) {
            fit.converged = true;
            ++it;
            break;
        }
    }
    fit.iterations = it;
    // An amplitude that no longer moves the model above rounding is exactly zero:
    // the fit is a constant and the shape parameters are unidentified.
    if (law == Law::acc_power || law == Law::acc_stretched || law == Law::rmse_expfloor) {
        double term = 0.0;
        for (const auto& d : data)
            term = std::max(term, std::abs(evaluate_law(law, {theta.data(), static_cast<std::size_t>(m)}, d.t) - theta(0)));
        if (theta(1) != 0.0 && term <= 1e-13 * std::max(1.0, std::abs(theta(0)))) {
            Eigen::VectorXd snapped = theta;
            snapped(1) = 0.0;
            if (auto rs = normalized_residuals(data, law, snapped); rs && rs->squaredNorm() <= chi2 * (1.0 + 1e-9) + 1e-20) {
                theta = snapped;
                chi2 = rs->squaredNorm();
            }
        }
    }
    fit.params = theta;
    fit.chi2 = chi2;
    fit.chi2_red = chi2 / fit.dof;
    fill_covariance(fit, residual_jacobian(data, law, theta));
    return fit;
}

namespace {

struct LineFit {
    double a = 0.0;
    double b = 0.0;
    double var_a = 0.0;
    double var_b = 0.0;
    double chi2 = 0.0;
};

// z ~ a + b x with weights 1/s^2.
std::optional<LineFit> weighted_line(const std::vector<double>& x, const std::vector<double>& z,
                                     const std::vector<double>& s) {
    double sw = 0.0, sx = 0.0, sxx = 0.0, sz = 0.0, sxz = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = 1.0 / (s[i] * s[i]);
        sw += w;
        sx += w * x[i];
        sxx += w * x[i] * x[i];
        sz += w * z[i];
        sxz += w * x[i] * z[i];
    }
    const double det = sw * sxx - sx * sx;
    if (!(det > 1e-14 * sw * sxx)) return std::nullopt;
    LineFit f;
    f.b = (sw * sxz - sx * sz) / det;
    f.a = (sxx * sz - sx * sxz) / det;
    f.var_a = sxx / det;
    f.var_b = sw / det;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = (z[i] - f.a - f.b * x[i]) / s[i];
        f.chi2 += d * d;
    }
    if (!std::isfinite(f.chi2)) return std::nullopt;
    return f;
}

struct Linearized {
    std::vector<double> x, z, s;
};

// Linearization at a node: shift is A_inf or r_inf, p the scanned exponent.
std::optional<Linearized> linearize(std::span<const ScalingDatum> data, Law law, double shift, double p) {
    Linearized lin;
    for (const auto& d : data) {
        double resid = 0.0;
        double x = 0.0;
        switch (law) {
            case Law::acc_power: resid = shift - d.value; x = std::log(d.t); break;
            case Law::acc_stretched: resid = shift - d.value; x = std::pow(d.t, p); break;
            case Law::rmse_power: resid = d.value; x = std::log(d.t); break;
            case Law::rmse_logpower: resid = d.value; x = std::log(std::log(d.t)); break;
            case Law::rmse_expfloor: resid = d.value - shift; x = std::pow(d.t, p); break;
        }
        if (!(resid > 0.0)) return std::nullopt;
        lin.x.push_back(x);
        lin.z.push_back(std::log(resid));
        lin.s.push_back(d.sigma / resid);
    }
    return lin;
}

struct NodeFit {
    bool feasible = false;
    double chi2_red = std::numeric_limits<double>::infinity();
    LineFit line;
};

double node_value(double lo, double hi, int i, int n) {
    return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

}  // namespace

ScalingFit linearized_scan_fit(std::span<const ScalingDatum> data, Law law, const ScanGrid& grid) {
    check_data(data, law);
    const int m = law_param_count(law);
    const int dof = static_cast<int>(data.size()) - m;
    const bool scan_shift = law == Law::acc_power || law == Law::acc_stretched || law == Law::rmse_expfloor;
    const bool scan_p = law == Law::acc_stretched || law == Law::rmse_expfloor;
    const int na = scan_shift ? grid.nodes : 1;
    const int np = scan_p ? grid.p_nodes : 1;
    if (na < 1 || np < 1) throw std::invalid_argument("linearized_scan_fit: grid needs at least one node");
    if (scan_shift && !(grid.hi >= grid.lo)) throw std::invalid_argument("linearized_scan_fit: grid bounds reversed");
    if (scan_p && !(grid.p_hi >= grid.p_lo)) throw std::invalid_argument("linearized_scan_fit: grid bounds reversed");

    std::vector<NodeFit> nodes(static_cast<std::size_t>(na) * np);
    auto at = [&](int i, int j) -> NodeFit& { return nodes[static_cast<std::size_t>(i) * np + j]; };
    for (int i = 0; i < na; ++i) {
        for (int j = 0; j < np; ++j) {
            const double shift = node_value(grid.lo, grid.hi, i, na);
            const double p = node_value(grid.p_lo, grid.p_hi, j, np);
            const auto lin = linearize(data, law, shift, p);
            if (!lin) continue;
            const auto line = weighted_line(lin->x, lin->z, lin->s);
            if (!line) continue;
            NodeFit& nf = at(i, j);
            nf.feasible = true;
            nf.line = *line;
            nf.chi2_red = line->chi2 / dof;
        }
    }

    int best_i = -1, best_j = -1;
    double best_score = std::numeric_limits<double>::infinity();
    for (int i = 0; i < na; ++i) {
        for (int j = 0; j < np; ++j) {
            const NodeFit& nf = at(i, j);
            if (!nf.feasible) continue;
            bool local_min = true;
            for (int di = -1; di <= 1 && local_min; ++di) {
                for (int dj = -1; dj <= 1; ++dj) {
                    const int ii = i + di, jj = j + dj;
                    if ((di == 0 && dj == 0) || ii < 0 || jj < 0 || ii >= na || jj >= np) continue;
                    // Nodes bordering the infeasible region sit on the log singularity and
                    // produce spurious minima.
                    if (!at(ii, jj).feasible || at(ii, jj).chi2_red < nf.chi2_red) {
                        local_min = false;
                        break;
                    }
                }
            }
            if (!local_min) continue;
            const double score = std::abs(nf.chi2_red - 1.0);
            if (score < best_score) {
                best_score = score;
                best_i = i;
                best_j = j;
            }
        }
    }
    if (best_i < 0) {
        for (int i = 0; i < na; ++i)
            for (int j = 0; j < np; ++j)
                if (at(i, j).feasible && at(i, j).chi2_red < best_score) {
                    best_score = at(i, j).chi2_red;
                    best_i = i;
                    best_j = j;
                }
    }
    if (best_i < 0) throw std::invalid_argument("linearized_scan_fit: no feasible grid node");

    const NodeFit& nf = at(best_i, best_j);
    const double shift = node_value(grid.lo, grid.hi, best_i, na);
    const double p = node_value(grid.p_lo, grid.p_hi, best_j, np);
    const double c = std::exp(nf.line.a);
    const double sig_c = c * std::sqrt(nf.line.var_a * nf.chi2_red);
    const double sig_b = std::sqrt(nf.line.var_b * nf.chi2_red);
    const double da = na > 1 ? (grid.hi - grid.lo) / (na - 1) : 0.0;
    const double dp = np > 1 ? (grid.p_hi - grid.p_lo) / (np - 1) : 0.0;

    ScalingFit fit;
    fit.law = law;
    fit.dof = dof;
    fit.chi2_red = nf.chi2_red;
    fit.chi2 = nf.line.chi2;
    fit.converged = true;
    fit.params.resize(m);
    fit.param_sigmas.resize(m);
    switch (law) {
        case Law::acc_power:
            fit.params << shift, c, -nf.line.b;
            fit.param_sigmas << da, sig_c, sig_b;
            break;
        case Law::acc_stretched:
        case Law::rmse_expfloor:
            fit.params << shift, c, -nf.line.b, p;
            fit.param_sigmas << da, sig_c, sig_b, dp;
            break;
        case Law::rmse_power:
        case Law::rmse_logpower:
            fit.params << c, -nf.line.b;
            fit.param_sigmas << sig_c, sig_b;
            break;
    }
    fit.at_boundary = (scan_shift && na > 1 && (best_i == 0 || best_i == na - 1)) ||
                      (scan_p && np > 1 && (best_j == 0 || best_j == np - 1));
    return fit;
}

namespace {

std::vector<Eigen::VectorXd> multistart_inits(std::span<const ScalingDatum> data, Law law) {
    double vmax = -std::numeric_limits<double>::infinity();
    double vmin = std::numeric_limits<double>::infinity();
    for (const auto& d : data) {
        vmax = std::max(vmax, d.value);
        vmin = std::min(vmin, d.value);
    }
    const double margin = std::max(1e-3, 0.05 * (vmax - vmin));
    const double p_starts[] = {0.2, 0.5, 1.0};
    std::vector<Eigen::VectorXd> inits;
    auto add = [&](std::initializer_list<double> v) {
        Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
        Eigen::Index i = 0;
        for (double e : v) x(i++) = e;
        if (x.allFinite()) inits.push_back(x);
    };
    auto line_at = [&](double shift, double p) -> std::optional<LineFit> {
        const auto lin = linearize(data, law, shift, p);
        if (!lin) return std::nullopt;
        return weighted_line(lin->x, lin->z, lin->s);
    };

    switch (law) {
        case Law::acc_power:
        case Law::acc_stretched:
            for (double a_inf : {vmax + margin, 1.0}) {
                if (!(a_inf > vmax)) a_inf = vmax + margin;
                for (double p : p_starts) {
                    const auto line = line_at(a_inf, p);
                    if (!line) continue;
                    if (law == Law::acc_power) {
                        add({a_inf, std::exp(line->a), -line->b});
                        add({a_inf, std::exp(line->a), p});
                    } else {
                        add({a_inf, std::exp(line->a), std::max(-line->b, 1e-6), p});
                    }
                }
            }
            break;
        case Law::rmse_power:
        case Law::rmse_logpower:
            if (const auto line = line_at(0.0, 0.0)) {
                add({std::exp(line->a), -line->b});
                for (double p : p_starts) add({std::exp(line->a), p});
            }
            break;
        case Law::rmse_expfloor:
            for (double r_inf : {0.0, 0.5 * vmin}) {
                for (double p : p_starts) {
                    const auto line = line_at(r_inf, p);
                    if (!line) continue;
                    add({r_inf, std::exp(line->a), std::max(-line->b, 1e-6), p});
                }
            }
            break;
    }
    return inits;
}

bool better(const ScalingFit& a, const ScalingFit& b) {
    if (a.degenerate != b.degenerate) return !a.degenerate;
    return a.chi2 < b.chi2;
}

}  // namespace

ScalingFit best_wls_fit(std::span<const ScalingDatum> data, Law law, const WlsOptions& opts) {
    check_data(data, law);
    std::optional<ScalingFit> best;
    for (const auto& init : multistart_inits(data, law)) {
        ScalingFit fit;
        try {
            fit = wls_fit(data, law, {init.data(), static_cast<std::size_t>(init.size())}, opts);
        } catch (const std::invalid_argument&) {
            continue;
        }
        if (!fit.params.allFinite() || !std::isfinite(fit.chi2)) continue;
        if (!best || better(fit, *best)) best = fit;
    }
    if (!best) throw std::runtime_error("best_wls_fit: no feasible start for " + law_name(law));
    return *best;
}

ScalingFit select_law(std::span<const ScalingDatum> data, std::span<const Law> candidates, const WlsOptions& opts) {
    if (candidates.size() < 2) throw std::invalid_argument("select_law: need at least 2 candidates");
    std::vector<std::pair<Law, double>> table;
    std::optional<ScalingFit> best;
    for (Law law : candidates) {
        std::optional<ScalingFit> fit;
        try {
            fit = best_wls_fit(data, law, opts);
        } catch (const std::runtime_error&) {
        }
        table.emplace_back(law, fit ? fit->chi2_red : std::numeric_limits<double>::quiet_NaN());
        if (!fit || fit->degenerate) continue;
        if (!best || std::abs(fit->chi2_red - 1.0) < std::abs(best->chi2_red - 1.0)) best = fit;
    }
    if (!best) throw std::runtime_error("select_law: every candidate fit is degenerate or infeasible");
    best->candidates = std::move(table);
    return *best;
}

namespace {

std::string cell(const ScalingFit& fit, std::initializer_list<const char*> names) {
    for (const char* name : names) {
        const int i = law_param_index(fit.law, name);
        if (i < 0) continue;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%.6g ± %.2g", fit.params(i), fit.param_sigmas(i));
        return buf;
    }
    return "--";
}

}  // namespace

void write_fit_report(std::ostream& out, const std::vector<FitReportRow>& rows) {
    out << kFitReportHeader << '\n';
    for (const auto& row : rows) {
        char chi[32];
        std::snprintf(chi, sizeof(chi), "%.4g", row.fit.chi2_red);
        out << row.task << '/' << row.method << ',' << law_name(row.fit.law) << ',' << cell(row.fit, {"A_inf", "r_inf"})
            << ',' << cell(row.fit, {"c"}) << ',' << cell(row.fit, {"k"}) << ',' << cell(row.fit, {"p"}) << ',' << chi
            << '\n';
    }
}

}  // namespace qrc
