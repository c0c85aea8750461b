#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "fdc/errors.hpp"
#include "fdc/fdnn.hpp"

using namespace fdc;

namespace {

// 1-D separable fixture: class 1 near +2, class 2 near -2
void separable_fixture(int n, Eigen::MatrixXd& x, Eigen::VectorXi& y, std::uint64_t seed) {
    RngStream rng(seed);
    x.resize(2 * n, 1);
    y.resize(2 * n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = 2.0 + 0.3 * rng.normal();
        y[i] = 1;
        x(n + i, 0) = -2.0 + 0.3 * rng.normal();
        y[n + i] = -1;
    }
}

}  // namespace

TEST_CASE("hinge values") {
    CHECK(hinge(1.0) == doctest::Approx(0.0));
    CHECK(hinge(0.0) == doctest::Approx(1.0));
    CHECK(hinge(-1.0) == doctest::Approx(2.0));
    CHECK(hinge(2.5) == doctest::Approx(0.0));
}

TEST_CASE("forward pass: zero weights give zero output") {
    NetArch arch = NetArch::uniform(2, 3, 4, 100, 1.0);
    RngStream rng(1);
    DnnModel m = init_net(arch, rng);
    for (auto& w : m.weights) w.setZero();
    for (auto& v : m.shifts) v.setZero();
    CHECK(m.forward(Eigen::Vector3d(0.3, -0.2, 1.0)) == doctest::Approx(0.0));
}

TEST_CASE("forward pass: single hidden unit by hand") {
    NetArch arch = NetArch::uniform(1, 1, 1, 10, 5.0);
    RngStream rng(1);
    DnnModel m = init_net(arch, rng);
    m.weights[0](0, 0) = 1.0;
    m.shifts[0][0] = 0.0;
    m.weights[1](0, 0) = 1.0;
    CHECK(m.forward(Eigen::VectorXd::Constant(1, 0.5)) == doctest::Approx(0.5));
    // shift moves the relu kink
    m.shifts[0][0] = 0.2;
    CHECK(m.forward(Eigen::VectorXd::Constant(1, 0.5)) == doctest::Approx(0.3));
    CHECK(m.forward(Eigen::VectorXd::Constant(1, 0.1)) == doctest::Approx(0.0));
}

TEST_CASE("forward output is clamped to [-1, 1]") {
    NetArch arch = NetArch::uniform(1, 2, 8, 1000, 3.0);
    RngStream rng(3);
    DnnModel m = init_net(arch, rng);
    for (auto& w : m.weights) w.setConstant(3.0);
    for (auto& v : m.shifts) v.setConstant(-3.0);
    for (int i = 0; i < 10000; ++i) {
        const Eigen::Vector2d z(rng.normal(0, 5), rng.normal(0, 5));
        const double out = m.forward(z);
        REQUIRE(out <= 1.0);
        REQUIRE(out >= -1.0);
    }
}

TEST_CASE("architecture sizing: practical rule worked example") {
    // n=100, M=50, c=1: root = max(ceil sqrt 50, ceil sqrt 100) = 10
    const NetArch a = size_arch(ArchMode::practical6, 100, 50, 1.0, 1.0, 1);
    CHECK(a.input_dim == 10);
    CHECK(a.widths[1] == 200);
    CHECK(a.sparsity == 200);
    // B = 5 * max(ceil 50^(1/4), ceil 100^(1/4)) = 5 * 4
    CHECK(a.weight_bound == doctest::Approx(20.0));
    // L = max(ceil ln 50, ceil ln 100) = max(4, 5)
    CHECK(a.depth == 5);
}

TEST_CASE("architecture sizing: theory 5.1 at n=100, nu2=1") {
    const NetArch a = size_arch(ArchMode::theory51, 100, std::nullopt, 1.0);
    // J = round(100^(1/2) * (ln 100)^(-2)) = round(0.471) = 0 -> clamped to 1
    CHECK(a.input_dim == 1);
    CHECK(a.depth == 5);  // round(ln 100)
}

TEST_CASE("architecture sizing: theory 5.2 reduces to 5.1 beyond the critical frequency") {
    const NetArch full = size_arch(ArchMode::theory51, 100, std::nullopt, 1.0);
    // M* = n / log^4 n = 100 / 449.9 < 1, so any M is dense
    const NetArch sampled = size_arch(ArchMode::theory52, 100, 50, 1.0, 1.0);
    CHECK(sampled.input_dim == full.input_dim);
    CHECK(sampled.depth == full.depth);
    CHECK(sampled.sparsity == full.sparsity);
    CHECK_THROWS_AS(size_arch(ArchMode::theory52, 100, 50, 1.0, std::nullopt),
                    std::invalid_argument);
}

TEST_CASE("gradient check: analytic backprop matches central finite differences") {
    RngStream master(4242);
    int done = 0;
    int attempts = 0;
    while (done < 10 && attempts < 200) {
        ++attempts;
        RngStream rng = master.child(static_cast<std::uint64_t>(attempts));
        const int depth = 1 + static_cast<int>(rng.u01() * 2.0);
        const int width = 2 + static_cast<int>(rng.u01() * 4.0);
        const int dim = 1 + static_cast<int>(rng.u01() * 3.0);
        NetArch arch = NetArch::uniform(depth, dim, width, 100000, 10.0);
        DnnModel model = init_net(arch, rng);
        const int nb = 4;
        Eigen::MatrixXd x(nb, dim);
        Eigen::VectorXi y(nb);
        for (int i = 0; i < nb; ++i) {
            for (int j = 0; j < dim; ++j) x(i, j) = rng.normal();
            y[i] = rng.u01() < 0.5 ? 1 : -1;
        }

        // resample when any margin, pre-activation, or clamp boundary is near a kink
        bool near_kink = false;
        for (int i = 0; i < nb && !near_kink; ++i) {
            Eigen::VectorXd h = model.weights[0] * x.row(i).transpose();
            for (int l = 0; l < depth; ++l) {
                const Eigen::VectorXd pre = h - model.shifts[static_cast<std::size_t>(l)];
                if (pre.cwiseAbs().minCoeff() < 1e-3) near_kink = true;
                h = model.weights[static_cast<std::size_t>(l) + 1] * pre.cwiseMax(0.0);
            }
            const double raw = h[0];
            if (std::abs(std::abs(raw) - 1.0) < 1e-3) near_kink = true;
            const double margin = y[i] * std::clamp(raw, -1.0, 1.0);
            if (std::abs(margin - 1.0) < 1e-3) near_kink = true;
        }
        if (near_kink) continue;

        Gradients g;
        hinge_loss(model, x, y, &g);
        const double h_step = 1e-5;
        double max_rel = 0.0;
        auto check_param = [&](double* p, double analytic) {
            const double keep = *p;
            *p = keep + h_step;
            const double up = hinge_loss(model, x, y);
            *p = keep - h_step;
            const double dn = hinge_loss(model, x, y);
            *p = keep;
            const double fd = (up - dn) / (2.0 * h_step);
            // floor absorbs pure FD rounding noise on zero-gradient parameters
            const double scale = std::max({std::abs(fd), std::abs(analytic), 1e-3});
            max_rel = std::max(max_rel, std::abs(fd - analytic) / scale);
        };
        for (std::size_t l = 0; l < model.weights.size(); ++l)
            for (Eigen::Index i = 0; i < model.weights[l].size(); ++i)
                check_param(model.weights[l].data() + i, g.d_weights[l].data()[i]);
        for (std::size_t l = 0; l < model.shifts.size(); ++l)
            for (Eigen::Index i = 0; i < model.shifts[l].size(); ++i)
                check_param(model.shifts[l].data() + i, g.d_shifts[l].data()[i]);
        REQUIRE(max_rel < 1e-5);
        ++done;
    }
    CHECK(done == 10);
}

TEST_CASE("training solves the separable fixture and honors all constraints") {
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
    separable_fixture(40, x, y, 7);
    NetArch arch = NetArch::uniform(2, 1, 8, 40, 5.0);
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.seed = 11;
    const TrainResult r = train(x, y, arch, cfg);
    CHECK(r.final_loss < 0.05);
    int correct = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        if (classify_dnn(r.model, x.row(i).transpose()) == (y[i] == 1 ? 1 : 2)) ++correct;
    CHECK(correct == x.rows());  // 100% training accuracy
    CHECK(r.model.nonzero_count() <= arch.sparsity);
    CHECK(r.model.max_abs_param() <= arch.weight_bound + 1e-12);
    CHECK(classify_dnn(r.model, Eigen::VectorXd::Constant(1, 2.0)) == 1);
    CHECK(classify_dnn(r.model, Eigen::VectorXd::Constant(1, -2.0)) == 2);
}

TEST_CASE("training is bitwise deterministic under a fixed seed") {
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
    separable_fixture(25, x, y, 3);
    NetArch arch = NetArch::uniform(1, 1, 6, 30, 5.0);
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.seed = 5;
    const TrainResult a = train(x, y, arch, cfg);
    const TrainResult b = train(x, y, arch, cfg);
    for (std::size_t l = 0; l < a.model.weights.size(); ++l)
        CHECK((a.model.weights[l].array() == b.model.weights[l].array()).all());
    for (std::size_t l = 0; l < a.model.shifts.size(); ++l)
        CHECK((a.model.shifts[l].array() == b.model.shifts[l].array()).all());
}

TEST_CASE("best-so-far loss trace is non-increasing") {
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
    separable_fixture(30, x, y, 13);
    NetArch arch = NetArch::uniform(2, 1, 6, 60, 5.0);
    TrainConfig cfg;
    cfg.epochs = 80;
    cfg.seed = 17;
    const TrainResult r = train(x, y, arch, cfg);
    for (std::size_t i = 1; i < r.best_loss_trace.size(); ++i)
        REQUIRE(r.best_loss_trace[i] <= r.best_loss_trace[i - 1] + 1e-15);
}

TEST_CASE("tie at zero output goes to class 1") {
    NetArch arch = NetArch::uniform(1, 1, 1, 10, 1.0);
    RngStream rng(2);
    DnnModel m = init_net(arch, rng);
    for (auto& w : m.weights) w.setZero();
    for (auto& v : m.shifts) v.setZero();
    CHECK(classify_dnn(m, Eigen::VectorXd::Constant(1, 3.0)) == 1);
}

TEST_CASE("single-class data is rejected") {
    Eigen::MatrixXd x(4, 1);
    x << 1, 2, 3, 4;
    Eigen::VectorXi y(4);
    y << 1, 1, 1, 1;
    NetArch arch = NetArch::uniform(1, 1, 2, 10, 1.0);
    CHECK_THROWS_AS(train(x, y, arch, TrainConfig{}), std::invalid_argument);
}

TEST_CASE("top-s projection keeps exactly the largest magnitudes") {
    NetArch arch = NetArch::uniform(1, 2, 2, 3, 10.0);
    RngStream rng(9);
    DnnModel m = init_net(arch, rng);
    m.weights[0] << 4.0, -3.0, 2.0, 1.0;  // 2x2
    m.weights[1] << 0.5, -0.25;           // 1x2
    m.shifts[0] << 0.1, -5.0;
    project_top_s(m, 3);
    CHECK(m.nonzero_count() == 3);
    CHECK(m.weights[0](0, 0) == doctest::Approx(4.0));
    CHECK(m.weights[0](0, 1) == doctest::Approx(-3.0));
    CHECK(m.shifts[0][1] == doctest::Approx(-5.0));
    CHECK(m.weights[0](1, 0) == 0.0);
}

TEST_CASE("model text format round trip preserves the forward map") {
    NetArch arch = NetArch::uniform(2, 3, 5, 1000, 2.0);
    RngStream rng(21);
    const DnnModel m = init_net(arch, rng);
    std::stringstream ss;
    save_dnn(m, ss);
    const DnnModel r = load_dnn(ss);
    RngStream probe(22);
    for (int i = 0; i < 50; ++i) {
        const Eigen::Vector3d z(probe.normal(), probe.normal(), probe.normal());
        REQUIRE(r.forward(z) == doctest::Approx(m.forward(z)).epsilon(1e-15));
    }
    std::stringstream bad("not-a-model 1 2 3");
    CHECK_THROWS_AS(load_dnn(bad), DataError);
}
