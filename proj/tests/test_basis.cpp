#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "fdc/basis.hpp"
#include "fdc/rng.hpp"

using namespace fdc;

TEST_CASE("fourier_eval fixed values") {
    CHECK(fourier_eval(1, 0.37) == doctest::Approx(1.0));
    CHECK(fourier_eval(2, 0.0) == doctest::Approx(std::sqrt(2.0)));
    // psi_3(t) = sqrt2 sin(2 pi t) at t = 1/4
    CHECK(fourier_eval(3, 0.25) == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(fourier_eval(0, 0.5), std::invalid_argument);
}

TEST_CASE("design matrix orthogonality on the offset grid") {
    const DesignMatrix d = build_design(8, 5, BasisKind::fourier);
    const Eigen::MatrixXd gram = d.b.transpose() * d.b;
    const Eigen::MatrixXd target = 8.0 * Eigen::MatrixXd::Identity(5, 5);
    CHECK((gram - target).cwiseAbs().maxCoeff() < kOrthoTol);
}

TEST_CASE("degenerate and invalid design sizes") {
    const DesignMatrix d = build_design(1, 1, BasisKind::fourier);
    CHECK(d.b.rows() == 1);
    CHECK(d.b(0, 0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(build_design(4, 5, BasisKind::fourier), std::invalid_argument);
    CHECK_THROWS_AS(build_design(8, 4, BasisKind::log_poly), std::invalid_argument);
}

TEST_CASE("projection of the zero curve is zero") {
    const DesignMatrix d = build_design(16, 5, BasisKind::fourier);
    const Eigen::VectorXd zeta = project_scores(Eigen::VectorXd::Zero(16), d);
    CHECK(zeta.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(project_scores(Eigen::VectorXd::Zero(7), d), std::invalid_argument);
}

TEST_CASE("noise-free fourier curve recovers its coefficients exactly") {
    const int m = 64, j = 9;
    const DesignMatrix d = build_design(m, j, BasisKind::fourier);
    RngStream rng(5);
    Eigen::VectorXd c(j);
    for (int i = 0; i < j; ++i) c[i] = rng.normal();
    const Eigen::VectorXd x = d.b * c;
    const Eigen::VectorXd zeta = project_scores(x, d);
    CHECK((zeta - c).cwiseAbs().maxCoeff() < kRecoveryTol);
}

TEST_CASE("property: fourier recovery is exact for random coefficients, J < M/2") {
    RngStream rng(99);
    for (int rep = 0; rep < 25; ++rep) {
        const int m = 16 + static_cast<int>(rng.u01() * 100);
        const int j = 1 + static_cast<int>(rng.u01() * (m / 2 - 1));
        const DesignMatrix d = build_design(m, j, BasisKind::fourier);
        Eigen::VectorXd c(j);
        for (int i = 0; i < j; ++i) c[i] = 3.0 * rng.normal();
        const Eigen::VectorXd zeta = project_scores(d.b * c, d);
        REQUIRE((zeta - c).cwiseAbs().maxCoeff() < kRecoveryTol);
    }
}

TEST_CASE("property: projection is linear") {
    RngStream rng(31);
    const DesignMatrix d = build_design(20, 6, BasisKind::fourier);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXd x(20), y(20);
        for (int i = 0; i < 20; ++i) {
            x[i] = rng.normal();
            y[i] = rng.normal();
        }
        const double a = 2.0 * rng.u01() - 1.0, b = 2.0 * rng.u01() - 1.0;
        const Eigen::VectorXd lhs = project_scores(a * x + b * y, d);
        const Eigen::VectorXd rhs = a * project_scores(x, d) + b * project_scores(y, d);
        REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("build_design is deterministic") {
    const DesignMatrix a = build_design(30, 7, BasisKind::fourier);
    const DesignMatrix b = build_design(30, 7, BasisKind::fourier);
    CHECK((a.b - b.b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("least-squares projection agrees with an independent normal-equations oracle") {
    // non-orthogonal basis: solve (B^T B) z = B^T x directly as the oracle
    const DesignMatrix d = build_design(50, 3, BasisKind::log_poly);
    RngStream rng(77);
    Eigen::VectorXd x(50);
    for (int i = 0; i < 50; ++i) x[i] = rng.normal(0.0, 2.0);
    const Eigen::VectorXd ls = project_scores(x, d, ProjectionMode::least_squares);
    const Eigen::MatrixXd gram = d.b.transpose() * d.b;
    const Eigen::VectorXd oracle = gram.ldlt().solve(d.b.transpose() * x);
    CHECK((ls - oracle).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("paper-faithful projection on a non-orthogonal basis tracks least squares loosely") {
    // exact synthetic curve in the log_poly basis: LS recovers coefficients
    // exactly, the M^-1 B^T estimate carries the basis non-orthogonality error
    const DesignMatrix d = build_design(50, 3, BasisKind::log_poly);
    const Eigen::Vector3d c(1.0, -2.0, 0.5);
    const Eigen::VectorXd x = d.b * c;
    const Eigen::VectorXd ls = project_scores(x, d, ProjectionMode::least_squares);
    const Eigen::VectorXd pf = project_scores(x, d, ProjectionMode::paper_faithful);
    CHECK((ls - c).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((pf - c).cwiseAbs().maxCoeff() > 0.01);  // distorted by design
}

TEST_CASE("inclusive grid hits both endpoints") {
    const Eigen::VectorXd g = make_grid(5, GridKind::inclusive);
    CHECK(g[0] == doctest::Approx(0.0));
    CHECK(g[4] == doctest::Approx(1.0));
    const Eigen::VectorXd o = make_grid(5, GridKind::offset);
    CHECK(o[0] == doctest::Approx(0.0));
    CHECK(o[4] == doctest::Approx(0.8));
}
