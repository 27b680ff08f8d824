#include "qrc/quantum_core.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace qrc;

namespace {

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

Eigen::VectorXcd basis(Eigen::Index dim, Eigen::Index k) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    v(k) = 1.0;
    return v;
}

}  // namespace

TEST_CASE("annihilation on a qubit ladder") {
    const Operator a = annihilation(1);
    CHECK(a.dim() == 2);
    CHECK(a.matrix()(0, 1) == Complex(1.0));
    CHECK(a.matrix()(0, 0) == Complex(0.0));
    CHECK(a.matrix()(1, 0) == Complex(0.0));
    CHECK(a.matrix()(1, 1) == Complex(0.0));
}

TEST_CASE("a^dagger a has the integer spectrum 0..n_c") {
    const Operator a = annihilation(5);
    const ComplexMatrix n = a.matrix().adjoint() * a.matrix();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(n);
    for (int k = 0; k <= 5; ++k) CHECK(es.eigenvalues()(k) == doctest::Approx(k).epsilon(1e-12));
    CHECK(max_abs(number(5).matrix() - n) < 1e-14);
}

TEST_CASE("annihilation kills the vacuum and rejects a zero cutoff") {
    const Operator a = annihilation(5);
    CHECK((a.matrix() * basis(6, 0)).norm() == 0.0);
    CHECK_THROWS(annihilation(0));
    CHECK_THROWS(annihilation(-2));
}

TEST_CASE("truncated commutator equals identity minus the cutoff correction") {
    for (int nc : {1, 3, 5, 8}) {
        const Operator a = annihilation(nc);
        const Operator ad = creation(nc);
        const ComplexMatrix comm = (a * ad - ad * a).matrix();
        ComplexMatrix expected = ComplexMatrix::Identity(nc + 1, nc + 1);
        expected(nc, nc) -= static_cast<double>(nc + 1);
        CHECK(max_abs(comm - expected) < 1e-12);
    }
}

TEST_CASE("two-mode embedding") {
    const int nc = 5;
    const Operator i6 = identity(nc + 1);
    CHECK(max_abs(two_mode_embed(i6, Mode::first, nc).matrix() - ComplexMatrix::Identity(36, 36)) == 0.0);
    CHECK(max_abs(two_mode_embed(i6, Mode::second, nc).matrix() - ComplexMatrix::Identity(36, 36)) == 0.0);

    const Operator a1 = two_mode_embed(annihilation(nc), Mode::first, nc);
    const Operator a2 = two_mode_embed(annihilation(nc), Mode::second, nc);
    CHECK(max_abs((a1 * a2 - a2 * a1).matrix()) == 0.0);

    const Operator ntot = two_mode_embed(number(nc), Mode::first, nc) + two_mode_embed(number(nc), Mode::second, nc);
    const Eigen::VectorXcd v = basis(36, fock_index(2, 3, nc));
    CHECK(((ntot.matrix() * v) - 5.0 * v).norm() < 1e-14);

    // Kronecker oracle: mode 1 is the slow index.
    const ComplexMatrix a = annihilation(nc).matrix();
    for (int i = 0; i <= nc; ++i)
        for (int j = 0; j <= nc; ++j)
            for (int k = 0; k <= nc; ++k)
                for (int l = 0; l <= nc; ++l) {
                    const Complex want1 = a(i, k) * (j == l ? 1.0 : 0.0);
                    const Complex want2 = (i == k ? 1.0 : 0.0) * a(j, l);
                    CHECK(a1.matrix()(fock_index(i, j, nc), fock_index(k, l, nc)) == want1);
                    CHECK(a2.matrix()(fock_index(i, j, nc), fock_index(k, l, nc)) == want2);
                }

    CHECK_THROWS(two_mode_embed(annihilation(4), Mode::first, nc));
}

TEST_CASE("Hamiltonian is Hermitian for any drive") {
    ReservoirParams p;
    for (double x : {0.0, 1.0, -2.5, 20.0, 1e-7}) {
        const Operator h = build_hamiltonian(p, x);
        CHECK(h.dim() == 36);
        CHECK(h.hermiticity_error() < 1e-12);
    }
    CHECK_THROWS(build_hamiltonian(p, std::numeric_limits<double>::quiet_NaN()));
    CHECK_THROWS(build_hamiltonian(p, std::numeric_limits<double>::infinity()));
}

TEST_CASE("undriven Hamiltonian conserves excitation number") {
    ReservoirParams p;
    const int nc = p.n_cutoff;
    const Operator h = build_hamiltonian(p, 0.0);
    const Operator ntot = two_mode_embed(number(nc), Mode::first, nc) + two_mode_embed(number(nc), Mode::second, nc);
    const double hmax = max_abs(h.matrix());
    CHECK(max_abs((h * ntot - ntot * h).matrix()) < 1e-10 * hmax);

    // Driven: the commutator does not vanish.
    const Operator hd = build_hamiltonian(p, 1.0);
    CHECK(max_abs((hd * ntot - ntot * hd).matrix()) > 1.0);
}

TEST_CASE("undriven ground state is the vacuum with energy zero") {
    ReservoirParams p;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(build_hamiltonian(p, 0.0).matrix());
    CHECK(std::abs(es.eigenvalues()(0)) < 1e-12);
    CHECK(es.eigenvalues()(1) > 1.0);
    CHECK(std::abs(es.eigenvectors().col(0)(fock_index(0, 0, p.n_cutoff))) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Hamiltonian matches an independent Kronecker construction") {
    ReservoirParams p;
    p.omega1 = 7.3;
    p.omega2 = 6.1;
    p.g12 = 0.27;
    p.u = 0.45;
    p.eps0 = 1.7;
    const int nc = p.n_cutoff;
    const int d = nc + 1;
    const double x = -0.83;

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
    for (int k = 1; k <= nc; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
    auto kron = [&](const Eigen::MatrixXd& l, const Eigen::MatrixXd& r) {
        Eigen::MatrixXd out(d * d, d * d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) out.block(i * d, j * d, d, d) = l(i, j) * r;
        return out;
    };
    const Eigen::MatrixXd a1 = kron(a, id), a2 = kron(id, a);
    const Eigen::MatrixXd n1 = a1.transpose() * a1, n2 = a2.transpose() * a2;
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d * d, d * d);
    ComplexMatrix want = (p.omega1 * n1 - 0.5 * p.u * n1 * (n1 + eye) + p.omega2 * n2 - 0.5 * p.u * n2 * (n2 + eye) +
                          p.g12 * (a1.transpose() * a2 + a1 * a2.transpose()))
                             .cast<Complex>();
    want += Complex(0.0, p.eps0 * x) * ((a1 - a1.transpose()) + (a2 - a2.transpose())).cast<Complex>();
    CHECK(max_abs(build_hamiltonian(p, x).matrix() - want) < 1e-12);
}

TEST_CASE("collapse operators") {
    ReservoirParams p;
    const int nc = p.n_cutoff;
    const auto c = collapse_operators(p);
    REQUIRE(c.size() == 2);
    const Operator a1 = two_mode_embed(annihilation(nc), Mode::first, nc);
    const Operator a2 = two_mode_embed(annihilation(nc), Mode::second, nc);
    CHECK(max_abs(c[0].matrix() - 0.70710678118654752 * a1.matrix()) < 1e-12);
    CHECK(max_abs(c[1].matrix() - 0.70710678118654752 * a2.matrix()) < 1e-12);
    const Eigen::VectorXcd vac = basis(36, 0);
    CHECK((c[0].matrix() * vac).norm() == 0.0);
    CHECK((c[1].matrix() * vac).norm() == 0.0);
    const ComplexMatrix n1 = two_mode_embed(number(nc), Mode::first, nc).matrix();
    CHECK(max_abs(c[0].matrix().adjoint() * c[0].matrix() - p.kappa1 * n1) < 1e-12);
}

TEST_CASE("reservoir parameter validation") {
    ReservoirParams p;
    CHECK_NOTHROW(p.validate());
    CHECK(p.two_mode_dim() == 36);
    auto broken = [](auto mutate) {
        ReservoirParams q;
        mutate(q);
        return q;
    };
    CHECK_THROWS(broken([](ReservoirParams& q) { q.kappa1 = 0.0; }).validate());
    CHECK_THROWS(broken([](ReservoirParams& q) { q.omega2 = -1.0; }).validate());
    CHECK_THROWS(broken([](ReservoirParams& q) { q.m_measure = 6; }).validate());
    CHECK_THROWS(broken([](ReservoirParams& q) { q.tau = 0.0; }).validate());
}
