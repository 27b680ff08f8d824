#include "qrc/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace qrc {

DensityMatrix::DensityMatrix(ComplexMatrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
        throw std::invalid_argument("DensityMatrix: matrix must be square and non-empty");
    }
}

DensityMatrix DensityMatrix::basis_state(Eigen::Index dim, Eigen::Index index) {
    if (index < 0 || index >= dim) throw std::out_of_range("DensityMatrix: basis index out of range");
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    m(index, index) = 1.0;
    return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
    return DensityMatrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

double DensityMatrix::hermiticity_error() const {
    return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
    const ComplexMatrix herm = 0.5 * (entries_ + entries_.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0 && rel_tol < 1e-2) || !(abs_tol > 0.0 && abs_tol < 1e-2)) {
        throw std::invalid_argument("IntegratorConfig: tolerances must lie in (0, 1e-2)");
    }
    if (!(max_step > 0.0)) throw std::invalid_argument("IntegratorConfig: max_step must be > 0");
    if (hermitize_every < 1) throw std::invalid_argument("IntegratorConfig: hermitize_every must be >= 1");
    if (max_steps < 1) throw std::invalid_argument("IntegratorConfig: max_steps must be >= 1");
}

ComplexMatrix lindblad_rhs(const Operator& h, std::span<const Operator> collapse,
                           const DensityMatrix& rho) {
    if (h.dim() != rho.dim()) throw std::invalid_argument("lindblad_rhs: dimension mismatch");
    const Complex i_unit(0.0, 1.0);
    const ComplexMatrix& r = rho.matrix();
    ComplexMatrix out = -i_unit * (h.matrix() * r - r * h.matrix());
    for (const auto& c : collapse) {
        if (c.dim() != rho.dim()) throw std::invalid_argument("lindblad_rhs: dimension mismatch");
        const ComplexMatrix& cm = c.matrix();
        const ComplexMatrix cdc = cm.adjoint() * cm;
        out += cm * r * cm.adjoint() - 0.5 * (cdc * r + r * cdc);
    }
    return out;
}

namespace {

// Integrator state: a (2d x d) row-major real array, rows [0, d) hold Re(rho) and
// rows [d, 2d) hold Im(rho).
using SplitMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

SplitMatrix to_split(const ComplexMatrix& m) {
    const Eigen::Index d = m.rows();
    SplitMatrix out(2 * d, d);
    out.topRows(d) = m.real();
    out.bottomRows(d) = m.imag();
    return out;
}

ComplexMatrix from_split(const SplitMatrix& s) {
    const Eigen::Index d = s.cols();
    ComplexMatrix out(d, d);
    out.real() = s.topRows(d);
    out.imag() = s.bottomRows(d);
    return out;
}

struct Entry {
    Eigen::Index row;
    Eigen::Index col;
    double re;
    double im;
};

std::vector<Entry> nonzeros(const ComplexMatrix& m) {
    std::vector<Entry> out;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (m(r, c) != Complex(0.0)) out.push_back({r, c, m(r, c).real(), m(r, c).imag()});
        }
    }
    return out;
}

// Row update outr/outi (op)= e * (yr + i yi). Purely real and purely imaginary
// entries take half the multiply-adds of a general one.
template <bool Assign>
inline void row_update(const Entry& e, const double* __restrict yr, const double* __restrict yi,
                       double* __restrict outr, double* __restrict outi, Eigen::Index d) {
    const double re = e.re;
    const double im = e.im;
    if (im == 0.0) {
        for (Eigen::Index k = 0; k < d; ++k) {
            if constexpr (Assign) {
                outr[k] = re * yr[k];
                outi[k] = re * yi[k];
            } else {
                outr[k] += re * yr[k];
                outi[k] += re * yi[k];
            }
        }
    } else if (re == 0.0) {
        for (Eigen::Index k = 0; k < d; ++k) {
            if constexpr (Assign) {
                outr[k] = -im * yi[k];
                outi[k] = im * yr[k];
            } else {
                outr[k] -= im * yi[k];
                outi[k] += im * yr[k];
            }
        }
    } else {
        for (Eigen::Index k = 0; k < d; ++k) {
            if constexpr (Assign) {
                outr[k] = re * yr[k] - im * yi[k];
                outi[k] = re * yi[k] + im * yr[k];
            } else {
                outr[k] += re * yr[k] - im * yi[k];
                outi[k] += re * yi[k] + im * yr[k];
            }
        }
    }
}

// out = A * y. Entries are in row order, so the first entry of a row overwrites
// it and empty rows are zeroed.
void apply_entries(const std::vector<Entry>& entries, const double* __restrict y, double* __restrict out,
                   Eigen::Index d) {
    const Eigen::Index im_offset = d * d;
    Eigen::Index next_row = 0;
    for (const auto& e : entries) {
        const double* yr = y + e.col * d;
        const double* yi = y + im_offset + e.col * d;
        double* outr = out + e.row * d;
        double* outi = out + im_offset + e.row * d;
        if (e.row >= next_row) {
            for (; next_row < e.row; ++next_row) {
                std::fill_n(out + next_row * d, d, 0.0);
                std::fill_n(out + im_offset + next_row * d, d, 0.0);
            }
            row_update<true>(e, yr, yi, outr, outi, d);
            next_row = e.row + 1;
        } else {
            row_update<false>(e, yr, yi, outr, outi, d);
        }
    }
    for (; next_row < d; ++next_row) {
        std::fill_n(out + next_row * d, d, 0.0);
        std::fill_n(out + im_offset + next_row * d, d, 0.0);
    }
}

// Nonzero entries of a collapse operator grouped into runs where both row and
// column advance by one, so a run of the sandwich is a contiguous row update.
struct Jump {
    struct Run {
        Eigen::Index row;
        Eigen::Index col;
        Eigen::Index len;
        std::size_t offset;
    };
    std::vector<Entry> entries;
    std::vector<Run> runs;
    std::vector<double> re;
    std::vector<double> im;

    explicit Jump(const ComplexMatrix& c) : entries(nonzeros(c)) {
        std::vector<Entry> sorted = entries;
        std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) {
            return a.row - a.col != b.row - b.col ? a.row - a.col < b.row - b.col : a.row < b.row;
        });
        for (const auto& e : sorted) {
            if (!runs.empty()) {
                Run& last = runs.back();
                if (e.row == last.row + last.len && e.col == last.col + last.len) {
                    ++last.len;
                    re.push_back(e.re);
                    im.push_back(e.im);
                    continue;
                }
            }
            runs.push_back({e.row, e.col, 1, re.size()});
            re.push_back(e.re);
            im.push_back(e.im);
        }
    }
};

// Master-equation generator written as
//   d rho/dt = X + X^+ + sum_j C_j rho C_j^+,   X = G rho,   G = -i H - K/2,
// with K = sum_j C_j^+ C_j. This relies on rho being Hermitian. G acts through
// its nonzero entries, one contiguous row update each; each sandwich C rho C^+
// is summed over pairs of nonzero entries of C.
class Generator {
public:
    Generator(const Operator& h, std::span<const Operator> collapse) : dim_(h.dim()) {
        const Complex i_unit(0.0, 1.0);
        ComplexMatrix g = -i_unit * h.matrix();
        for (const auto& c : collapse) {
            if (c.dim() != dim_) throw std::invalid_argument("evolve: dimension mismatch");
            g -= 0.5 * (c.matrix().adjoint() * c.matrix());
            jumps_.emplace_back(c.matrix());
        }
        drift_ = nonzeros(g);
        work_.resize(2 * dim_, dim_);
    }

    void operator()(const SplitMatrix& y, SplitMatrix& out) {
        const Eigen::Index d = dim_;
        const Eigen::Index plane = d * d;
        apply_entries(drift_, y.data(), work_.data(), d);
        const double* __restrict w = work_.data();
        double* __restrict o = out.data();
        for (Eigen::Index r = 0; r < d; ++r) {
            o[r * d + r] = 2.0 * w[r * d + r];
            o[plane + r * d + r] = 0.0;
            for (Eigen::Index c = r + 1; c < d; ++c) {
                const double re = w[r * d + c] + w[c * d + r];
                const double im = w[plane + r * d + c] - w[plane + c * d + r];
                o[r * d + c] = re;
                o[c * d + r] = re;
                o[plane + r * d + c] = im;
                o[plane + c * d + r] = -im;
            }
        }
        const double* __restrict yr = y.data();
        const double* __restrict yi = y.data() + plane;
        for (const auto& jump : jumps_) {
            for (const auto& e1 : jump.entries) {
                // Entries e1 rho e2^* land at (e1.row, e2.row).
                const double* __restrict pr = yr + e1.col * d;
                const double* __restrict pi = yi + e1.col * d;
                double* __restrict orr = o + e1.row * d;
                double* __restrict ori = o + plane + e1.row * d;
                for (const auto& run : jump.runs) {
                    const double* __restrict wr = jump.re.data() + run.offset;
                    const double* __restrict wi = jump.im.data() + run.offset;
                    for (Eigen::Index t = 0; t < run.len; ++t) {
                        const double cr = e1.re * wr[t] + e1.im * wi[t];
                        const double ci = e1.im * wr[t] - e1.re * wi[t];
                        const double a = pr[run.col + t];
                        const double b = pi[run.col + t];
                        orr[run.row + t] += cr * a - ci * b;
                        ori[run.row + t] += cr * b + ci * a;
                    }
                }
            }
        }
    }

private:
    Eigen::Index dim_;
    std::vector<Entry> drift_;
    std::vector<Jump> jumps_;
    SplitMatrix work_;
};

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

DensityMatrix evolve(const DensityMatrix& rho0, const Operator& h, std::span<const Operator> collapse,
                     double tau, const IntegratorConfig& cfg, EvolveStats* stats) {
    cfg.validate();
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("evolve: tau must be > 0");
    if (h.dim() != rho0.dim()) throw std::invalid_argument("evolve: dimension mismatch");

    Generator rhs(h, collapse);
    const Eigen::Index d = rho0.dim();
    SplitMatrix y = to_split(rho0.matrix());
    SplitMatrix k1(2 * d, d), k2(2 * d, d), k3(2 * d, d), k4(2 * d, d), k5(2 * d, d), k6(2 * d, d),
        k7(2 * d, d);
    SplitMatrix stage(2 * d, d), y_new(2 * d, d), err(2 * d, d);
    Eigen::ArrayXXd mag(d, d);

    double t = 0.0;
    double step = std::min({cfg.max_step, tau, cfg.initial_step});
    const double min_step = 1e-13 * std::max(tau, 1.0);
    long accepted = 0;
    long rejected = 0;
    rhs(y, k1);

    while (t < tau) {
        if (accepted + rejected >= cfg.max_steps) {
            throw IntegrationError("evolve: exceeded max_steps");
        }
        bool last = false;
        if (t + step >= tau) {
            step = tau - t;
            last = true;
        }
        stage.noalias() = y + (step * a21) * k1;
        rhs(stage, k2);
        stage.noalias() = y + step * (a31 * k1 + a32 * k2);
        rhs(stage, k3);
        stage.noalias() = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(stage, k4);
        stage.noalias() = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(stage, k5);
        stage.noalias() = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(stage, k6);
        y_new.noalias() = y + step * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        rhs(y_new, k7);

        err.noalias() = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        // Scaled RMS over complex entries: |e| / (atol + rtol * max(|y|, |y_new|)).
        mag = (y.topRows(d).array().square() + y.bottomRows(d).array().square())
                  .max(y_new.topRows(d).array().square() + y_new.bottomRows(d).array().square())
                  .sqrt();
        mag = cfg.abs_tol + cfg.rel_tol * mag;
        const double err_norm = std::sqrt(
            ((err.topRows(d).array().square() + err.bottomRows(d).array().square()) / mag.square()).sum() /
            static_cast<double>(d * d));
        if (!std::isfinite(err_norm)) throw IntegrationError("evolve: non-finite error estimate");

        if (err_norm <= 1.0) {
            t = last ? tau : t + step;
            y.swap(y_new);
            ++accepted;
            if (accepted % cfg.hermitize_every == 0) {
                stage.topRows(d) = 0.5 * (y.topRows(d) + y.topRows(d).transpose());
                stage.bottomRows(d) = 0.5 * (y.bottomRows(d) - y.bottomRows(d).transpose());
                y.swap(stage);
            }
            k1.swap(k7);
            const double factor =
                err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
            if (!last) step = std::min(step * factor, cfg.max_step);
            if (stats) stats->last_step = step;
        } else {
            ++rejected;
            step *= std::clamp(0.9 * std::pow(err_norm, -0.2), 0.1, 1.0);
            if (step < min_step) throw IntegrationError("evolve: step size underflow");
        }
    }

    if (stats) {
        stats->accepted += accepted;
        stats->rejected += rejected;
    }
    DensityMatrix out(from_split(y));
    const double trace_drift = std::abs(out.trace() - rho0.trace());
    if (!(trace_drift < 1e-9)) throw IntegrationError("evolve: trace drift beyond 1e-9");
    if (!(out.hermiticity_error() < 1e-10)) throw IntegrationError("evolve: lost Hermiticity");
    return out;
}

int cutoff_from_dim(Eigen::Index dim) {
    const auto side = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(dim))));
    if (side < 2 || side * side != dim) {
        throw std::invalid_argument("cutoff_from_dim: dimension is not (n_c+1)^2");
    }
    return static_cast<int>(side - 1);
}

double fock_population(const DensityMatrix& rho, int i, int j) {
    const int nc = cutoff_from_dim(rho.dim());
    if (i < 0 || j < 0 || i > nc || j > nc) throw std::out_of_range("fock_population: index out of range");
    const Complex p = rho.matrix()(fock_index(i, j, nc), fock_index(i, j, nc));
    if (!(std::abs(p.imag()) < 1e-10)) {
        throw std::domain_error("fock_population: diagonal entry has imaginary part >= 1e-10");
    }
    return std::clamp(p.real(), 0.0, 1.0);
}

double edge_population(const DensityMatrix& rho) {
    const int nc = cutoff_from_dim(rho.dim());
    double total = 0.0;
    for (int i = 0; i <= nc; ++i) {
        for (int j = 0; j <= nc; ++j) {
            if (i == nc || j == nc) total += rho.matrix()(fock_index(i, j, nc), fock_index(i, j, nc)).real();
        }
    }
    return total;
}

void write_population_csv(std::ostream& out, std::span<const double> times,
                          std::span<const DensityMatrix> states, int m_measure) {
    if (times.size() != states.size()) throw std::invalid_argument("write_population_csv: size mismatch");
    out << "t";
    for (int i = 0; i <= m_measure; ++i) {
        for (int j = 0; j <= m_measure; ++j) out << ",p" << i << j;
    }
    out << '\n' << std::setprecision(17);
    for (std::size_t s = 0; s < states.size(); ++s) {
        out << times[s];
        for (int i = 0; i <= m_measure; ++i) {
            for (int j = 0; j <= m_measure; ++j) out << ',' << fock_population(states[s], i, j);
        }
        out << '\n';
    }
}

}  // namespace qrc
