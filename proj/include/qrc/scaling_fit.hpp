#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qrc {

/// acc_stretched:  A(T) = A_inf - c exp(-k T^p)       (A_inf, c, k, p)
/// acc_power:      A(T) = A_inf - c T^-p              (A_inf, c, p)
/// rmse_power:     R(T) = c T^-p                      (c, p)
/// rmse_logpower:  R(T) = c (ln T)^-p                 (c, p)
/// rmse_expfloor:  R(T) = r_inf + c exp(-k T^p)       (r_inf, c, k, p)
enum class Law { acc_stretched, acc_power, rmse_power, rmse_logpower, rmse_expfloor };

std::string law_name(Law law);
Law parse_law(std::string_view name);
int law_param_count(Law law);
std::vector<std::string> law_param_names(Law law);
/// Index of the parameter named name in the law's parameter vector, or -1.
int law_param_index(Law law, std::string_view name);
bool is_accuracy_law(Law law);
std::vector<Law> accuracy_laws();
std::vector<Law> rmse_laws();

double evaluate_law(Law law, std::span<const double> params, double t);
/// Partial derivatives of the law with respect to its parameters.
Eigen::VectorXd law_gradient(Law law, std::span<const double> params, double t);

struct ScalingDatum {
    double t = 0.0;
    double value = 0.0;
    double sigma = 0.0;
};

struct ScalingFit {
    Law law = Law::acc_power;
    Eigen::VectorXd params;
    Eigen::VectorXd param_sigmas;
    double chi2 = 0.0;
    double chi2_red = 0.0;
    int dof = 0;
    int iterations = 0;
    bool converged = false;
    /// J^T J was singular; unidentifiable parameters carry infinite sigma.
    bool degenerate = false;
    /// Linearized scan: the selected node lies on the edge of the grid.
    bool at_boundary = false;
    /// select_law: chi2_red of every candidate, in candidate order.
    std::vector<std::pair<Law, double>> candidates;
};

struct WlsOptions {
    int max_iterations = 500;
    double rel_tol = 1e-10;
    /// Keep A_inf <= 1 for accuracy laws.
    bool constrain_accuracy = false;
};

/// Weighted least squares by Levenberg-Marquardt. Covariance is
/// chi2_red * (J^T J)^-1 with J the Jacobian of the normalized residuals.
ScalingFit wls_fit(std::span<const ScalingDatum> data, Law law, std::span<const double> init,
                   const WlsOptions& opts = {});

/// Best of several wls_fit runs started from linearized pre-fits and the
/// multi-start grid (A_inf in {max(data), 1}, p in {0.2, 0.5, 1}).
ScalingFit best_wls_fit(std::span<const ScalingDatum> data, Law law, const WlsOptions& opts = {});

/// Scanned parameters: A_inf (power), (A_inf, p) (stretched), (r_inf, p) (floor).
/// The power and log-power RMSE laws have no scanned parameter.
struct ScanGrid {
    double lo = 0.0;
    double hi = 1.0;
    int nodes = 201;
    double p_lo = 0.05;
    double p_hi = 2.0;
    int p_nodes = 201;
};

/// Weighted linear regressions after linearizing the law at every grid node,
/// with uncertainties propagated to first order. Returns the local minimum of
/// chi2_red over the grid whose chi2_red is closest to 1.
ScalingFit linearized_scan_fit(std::span<const ScalingDatum> data, Law law, const ScanGrid& grid);

/// Multi-start wls_fit per candidate; returns the fit with chi2_red closest to 1,
/// earlier candidates winning ties.
ScalingFit select_law(std::span<const ScalingDatum> data, std::span<const Law> candidates,
                      const WlsOptions& opts = {});

struct FitReportRow {
    std::string task;
    std::string method;
    ScalingFit fit;
};

inline constexpr std::string_view kFitReportHeader = "task,law,A_inf/r_inf,c,k,p,chi2_red";

/// One line per curve, columns as in kFitReportHeader; cells are "value ± sigma"
/// and "--" where the law has no such parameter.
void write_fit_report(std::ostream& out, const std::vector<FitReportRow>& rows);

}  // namespace qrc
