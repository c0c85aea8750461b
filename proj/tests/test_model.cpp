#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "fdc/model.hpp"

using namespace fdc;

TEST_CASE("preset parameters match the published models") {
    const PopulationPair m1 = model_preset(1);
    CHECK(m1.mu1.isApprox(Eigen::Vector3d(-1.0, 2.0, -3.0)));
    CHECK(m1.lambda1.isApprox(Eigen::Vector3d(0.6, 0.4, 0.2)));
    CHECK(m1.mu2.isApprox(Eigen::Vector3d(-0.5, 2.5, -2.5)));
    CHECK(m1.lambda2.isApprox(Eigen::Vector3d(0.9, 0.5, 0.3)));
    CHECK(m1.pi1 == doctest::Approx(0.5));
    CHECK(m1.basis_kind == BasisKind::log_poly);

    const PopulationPair m4 = model_preset(4);
    CHECK(m4.j_model() == 4);
    CHECK(m4.lambda1.isApprox(Eigen::Vector4d(4.0, 3.0, 2.0, 1.0)));

    const PopulationPair m5 = model_preset(5);
    CHECK(m5.score_law2 == ScoreLaw::student_t);
    CHECK(m5.t_dof[0] == 5);
    CHECK(m5.t_dof[1] == 3);
    CHECK(m5.t_dof[2] == 1);

    CHECK_THROWS_AS(model_preset(0), std::invalid_argument);
    CHECK_THROWS_AS(model_preset(6), std::invalid_argument);
}

TEST_CASE("sampling is bitwise deterministic under a fixed seed") {
    const PopulationPair pop = model_preset(1);
    const auto a = sample_dataset(pop, 50, 50, 50, 1234);
    const auto b = sample_dataset(pop, 50, 50, 50, 1234);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].values.size() == b[i].values.size());
        CHECK((a[i].values.array() == b[i].values.array()).all());
        CHECK(a[i].label == b[i].label);
    }
    CHECK(a.front().kind == CurveSample::Kind::grid_values);
    CHECK(a.front().values.size() == 50);
}

TEST_CASE("sample means track the preset parameters (law of large numbers)") {
    const PopulationPair pop = model_preset(1);
    const int n = 10000;
    const auto data = sample_dataset(pop, n, 1, std::nullopt, 99);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (int i = 0; i < n; ++i) mean += data[static_cast<std::size_t>(i)].values;
    mean /= n;
    for (int j = 0; j < 3; ++j) {
        const double se = std::sqrt(pop.lambda1[j] / n);
        CHECK(std::abs(mean[j] - pop.mu1[j]) < 4.0 * se);
    }
}

TEST_CASE("gaussian score coordinates are empirically uncorrelated") {
    const PopulationPair pop = model_preset(1);
    RngStream rng(314);
    const int n = 20000;
    const Eigen::MatrixXd s = draw_score_matrix(pop, 1, n, rng);
    const Eigen::RowVectorXd mu = s.colwise().mean();
    const Eigen::MatrixXd centered = s.rowwise() - mu;
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            if (a == b) continue;
            const double se = std::sqrt(pop.lambda1[a] * pop.lambda1[b] / n);
            CHECK(std::abs(cov(a, b)) < 4.0 * se);
        }
}

TEST_CASE("model 5 class-2 coordinate 3 rejects gaussianity (Jarque-Bera)") {
    const PopulationPair pop = model_preset(5);
    RngStream rng(2718);
    const int n = 10000;
    const Eigen::MatrixXd s = draw_score_matrix(pop, 2, n, rng);
    const Eigen::VectorXd x = s.col(2);  // t_1 coordinate
    const double mean = x.mean();
    const Eigen::ArrayXd d = x.array() - mean;
    const double m2 = d.square().mean();
    const double skew = d.cube().mean() / std::pow(m2, 1.5);
    const double kurt = d.square().square().mean() / (m2 * m2) - 3.0;
    const double jb = n * (skew * skew / 6.0 + kurt * kurt / 24.0);
    CHECK(jb > 9.21);  // chi-square(2) 0.99 quantile: Gaussian fit rejected at alpha=0.01
    CHECK(kurt > 10.0);
}

TEST_CASE("separation diagnostics: identical populations vanish") {
    PopulationPair pop = model_preset(1);
    pop.mu2 = pop.mu1;
    pop.lambda2 = pop.lambda1;
    const auto d = separation_diagnostics(pop);
    CHECK(d.mean_sep == doctest::Approx(0.0));
    CHECK(d.cov_sep == doctest::Approx(0.0));
}

TEST_CASE("separation diagnostics: model 1 and model 2 hand arithmetic") {
    const auto d1 = separation_diagnostics(model_preset(1));
    CHECK(d1.mean_sep == doctest::Approx(5.0 / 18 + 0.5 + 5.0 / 6));
    const auto d2 = separation_diagnostics(model_preset(2));
    const double r1 = 3.0 / 4.5 - 1.0, r2 = 2.0 / 2.5 - 1.0, r3 = 1.0 / 1.5 - 1.0;
    CHECK(d2.cov_sep == doctest::Approx(r1 * r1 + r2 * r2 + r3 * r3));
}

TEST_CASE("separation diagnostics are invariant under coordinate permutation") {
    PopulationPair pop = model_preset(1);
    const auto base = separation_diagnostics(pop);
    // reverse all coordinates of both populations simultaneously
    pop.mu1.reverseInPlace();
    pop.mu2.reverseInPlace();
    pop.lambda1.reverseInPlace();
    pop.lambda2.reverseInPlace();
    const auto perm = separation_diagnostics(pop);
    CHECK(perm.mean_sep == doctest::Approx(base.mean_sep));
    CHECK(perm.cov_sep == doctest::Approx(base.cov_sep));
}

TEST_CASE("membership: identical populations belong to any space") {
    PopulationPair pop = model_preset(1);
    pop.mu2 = pop.mu1;
    pop.lambda2 = pop.lambda1;
    ParamSpaceSpec spec;
    spec.kind = SpaceKind::hyperrectangle;
    spec.radius = 1e-6;
    spec.nu1 = 1.0;
    spec.nu2 = 1.0;
    spec.c0 = 0.1;
    const auto report = check_membership(pop, spec);
    CHECK(report.conditions[2].min_radius == doctest::Approx(0.0));
    CHECK(report.conditions[3].min_radius == doctest::Approx(0.0));
    CHECK(report.conditions[2].pass);
    CHECK(report.conditions[3].pass);
}

TEST_CASE("membership: model 1 minimal radii, coordinate-wise arithmetic") {
    ParamSpaceSpec spec;
    spec.kind = SpaceKind::hyperrectangle;
    spec.radius = 100.0;
    spec.nu1 = 1.0;
    spec.nu2 = 1.0;
    spec.c0 = 0.25;
    const auto report = check_membership(model_preset(1), spec);
    // mean-separation sequence: (1/2)^2 / lambda2_j, weights j^(1+nu2) = j^2
    const double c1 = 0.25 / 0.9, c2 = 0.25 / 0.5 * 4.0, c3 = 0.25 / 0.3 * 9.0;
    CHECK(c1 == doctest::Approx(5.0 / 18));
    CHECK(report.conditions[2].min_radius == doctest::Approx(std::max({c1, c2, c3})));
    // worst condition overall is the mu^2 sequence: max(9, 6.25) * 3^2 = 81
    CHECK(report.conditions[0].min_radius == doctest::Approx(81.0));
    CHECK(report.prior_ok);
    CHECK(report.member);
}

TEST_CASE("membership boundary: equality is inclusive") {
    Eigen::VectorXd seq(1);
    seq[0] = 1.0;
    CHECK(hyperrectangle_min_radius(seq, 1.0) == doctest::Approx(1.0));
    PopulationPair pop = model_preset(1);
    ParamSpaceSpec spec;
    spec.kind = SpaceKind::hyperrectangle;
    spec.nu1 = spec.nu2 = 1.0;
    spec.c0 = 0.25;
    const auto tight = check_membership(pop, spec);
    // at exactly the worst condition's minimal radius the population is a member
    double worst = 0.0;
    for (const auto& c : tight.conditions) worst = std::max(worst, c.min_radius);
    spec.radius = worst;
    CHECK(check_membership(pop, spec).member);
}

TEST_CASE("membership is monotone in the radius") {
    ParamSpaceSpec spec;
    spec.kind = SpaceKind::sobolev_ball;
    spec.nu1 = spec.nu2 = 1.0;
    spec.c0 = 0.25;
    const PopulationPair pop = model_preset(2);
    spec.radius = 1.0;
    const auto small = check_membership(pop, spec);
    double worst = 0.0;
    for (const auto& c : small.conditions) worst = std::max(worst, c.min_radius);
    for (double extra : {0.0, 1.0, 10.0}) {
        spec.radius = worst + extra;
        CHECK(check_membership(pop, spec).member);
    }
}

TEST_CASE("sobolev minimal radius is the weighted partial sum") {
    Eigen::VectorXd seq(3);
    seq << 1.0, 0.5, 0.25;
    // sum |a_j| j^1 = 1 + 1 + 0.75
    CHECK(sobolev_min_radius(seq, 1.0) == doctest::Approx(2.75));
}

TEST_CASE("sample_dataset preconditions") {
    const PopulationPair pop = model_preset(1);
    CHECK_THROWS_AS(sample_dataset(pop, 0, 5, std::nullopt, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_dataset(pop, 5, 5, 0, 1), std::invalid_argument);
}
