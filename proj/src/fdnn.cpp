#include "fdc/fdnn.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fdc/errors.hpp"

namespace fdc {

NetArch NetArch::uniform(int depth, int input_dim, int width, std::int64_t sparsity,
                         double weight_bound) {
    NetArch a;
    a.depth = depth;
    a.input_dim = input_dim;
    a.widths.resize(static_cast<std::size_t>(depth) + 2);
    a.widths.front() = input_dim;
    for (int l = 1; l <= depth; ++l) a.widths[static_cast<std::size_t>(l)] = width;
    a.widths.back() = 1;
    a.sparsity = sparsity;
    a.weight_bound = weight_bound;
    return a;
}

std::int64_t NetArch::parameter_count() const {
    std::int64_t total = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l)
        total += static_cast<std::int64_t>(widths[l]) * widths[l + 1];
    for (std::size_t l = 1; l + 1 < widths.size(); ++l) total += widths[l];  // shifts V_1..V_L
    return total;
}

void NetArch::validate() const {
    if (depth < 1) throw std::invalid_argument("NetArch: depth must be >= 1");
    if (static_cast<int>(widths.size()) != depth + 2)
        throw std::invalid_argument("NetArch: widths must have L+2 entries");
    if (widths.front() != input_dim || widths.back() != 1)
        throw std::invalid_argument("NetArch: p_0 must be J and p_{L+1} must be 1");
    for (int w : widths)
        if (w < 1) throw std::invalid_argument("NetArch: widths must be positive");
    if (sparsity < depth + 1)
        throw std::invalid_argument("NetArch: sparsity must be >= L+1");
    if (!(weight_bound > 0.0)) throw std::invalid_argument("NetArch: weight bound must be > 0");
}

namespace {

int ceil_log(double x) { return static_cast<int>(std::ceil(std::log(x))); }
int ceil_pow(double x, double p) { return static_cast<int>(std::ceil(std::pow(x, p))); }

NetArch theory51_arch(int n, double nu2) {
    const double nd = static_cast<double>(n);
    const double ln = std::log(nd);
    const double e = 1.0 / (1.0 + nu2);
    const int depth = std::max(1, static_cast<int>(std::lround(ln)));
    const int j = std::max(1, static_cast<int>(std::lround(std::pow(nd, e) * std::pow(ln, -4.0 * e))));
    const int width =
        std::max(1, static_cast<int>(std::lround(std::pow(nd, e) * std::pow(ln, (nu2 - 3.0) * e))));
    const auto s = std::max<std::int64_t>(
        depth + 1, std::llround(std::pow(nd, e) * std::pow(ln, (2.0 * nu2 - 2.0) * e)));
    const double b =
        std::max(1.0, std::pow(nd, nu2 / (2.0 + 2.0 * nu2)) * std::pow(ln, (2.0 - 2.0 * nu2) * e));
    return NetArch::uniform(depth, j, width, s, b);
}

NetArch theory52_arch(int n, int m, double nu1, double nu2) {
    const double m_star = std::pow(static_cast<double>(n) / std::pow(std::log(n), 4.0), 1.0 / nu1);
    if (static_cast<double>(m) >= m_star) return theory51_arch(n, nu2);
    const double md = static_cast<double>(m);
    const double lm = std::log(md);
    const double jexp = nu1 / (1.0 + nu2);
    const int depth = std::max(1, static_cast<int>(std::lround(lm)));
    const int j = std::max(1, static_cast<int>(std::lround(std::pow(md, jexp))));
    const int width = std::max(1, static_cast<int>(std::lround(std::pow(md, jexp) * lm)));
    const auto s =
        std::max<std::int64_t>(depth + 1, std::llround(std::pow(md, jexp) * lm * lm));
    const double b = std::max(1.0, std::pow(md, nu1 * nu2 / (2.0 + 2.0 * nu2)));
    return NetArch::uniform(depth, j, width, s, b);
}

NetArch practical6_arch(int n, std::optional<int> m, int c) {
    const double nd = static_cast<double>(n);
    const double md = m ? static_cast<double>(*m) : 0.0;
    auto vmax = [&](int a, int b) { return std::max(a, b); };
    const int root = vmax(m ? ceil_pow(md, 0.5) : 0, ceil_pow(nd, 0.5));
    const int depth = vmax(m ? ceil_log(md) : 0, ceil_log(nd));
    const int j = std::max(1, c * root);
    const int width = 20 * root;
    const std::int64_t s = 20LL * root;
    const double b = 5.0 * vmax(m ? ceil_pow(md, 0.25) : 0, ceil_pow(nd, 0.25));
    return NetArch::uniform(std::max(1, depth), j, width, std::max<std::int64_t>(s, depth + 2), b);
}

}  // namespace

NetArch size_arch(ArchMode mode, int n, std::optional<int> m, double nu2,
                  std::optional<double> nu1, int c) {
    if (n < 2) throw std::invalid_argument("size_arch: n must be >= 2");
    switch (mode) {
        case ArchMode::theory51:
            return theory51_arch(n, nu2);
        case ArchMode::theory52:
            if (!nu1) throw std::invalid_argument("size_arch: theory52 needs nu1");
            if (!m) return theory51_arch(n, nu2);
            return theory52_arch(n, *m, *nu1, nu2);
        case ArchMode::practical6:
            return practical6_arch(n, m, c);
    }
    throw std::invalid_argument("size_arch: bad mode");
}

void TrainConfig::validate() const {
    if (epochs < 1 || batch < 1 || plateau_patience < 1 || projection_period < 1 || !(lr > 0.0) ||
        !(lr_decay > 0.0))
        throw std::invalid_argument("TrainConfig: all fields must be positive");
}

double DnnModel::forward(const Eigen::VectorXd& z) const {
    if (z.size() != arch.input_dim)
        throw std::invalid_argument("forward: input length must equal J");
    Eigen::VectorXd h = weights[0] * z;
    for (int l = 0; l < arch.depth; ++l) {
        h = (h - shifts[static_cast<std::size_t>(l)]).cwiseMax(0.0);
        h = weights[static_cast<std::size_t>(l) + 1] * h;
    }
    return std::clamp(h[0], -1.0, 1.0);
}

Eigen::VectorXd DnnModel::forward_batch(const Eigen::MatrixXd& z_rows) const {
    if (z_rows.cols() != arch.input_dim)
        throw std::invalid_argument("forward_batch: input width must equal J");
    Eigen::MatrixXd h = weights[0] * z_rows.transpose();  // p1 x n
    for (int l = 0; l < arch.depth; ++l) {
        h = (h.colwise() - shifts[static_cast<std::size_t>(l)]).cwiseMax(0.0);
        h = weights[static_cast<std::size_t>(l) + 1] * h;
    }
    return h.row(0).transpose().cwiseMax(-1.0).cwiseMin(1.0);
}

std::int64_t DnnModel::nonzero_count() const {
    std::int64_t nz = 0;
    for (const auto& w : weights) nz += (w.array() != 0.0).count();
    for (const auto& v : shifts) nz += (v.array() != 0.0).count();
    return nz;
}

double DnnModel::max_abs_param() const {
    double m = 0.0;
    for (const auto& w : weights) if (w.size()) m = std::max(m, w.cwiseAbs().maxCoeff());
    for (const auto& v : shifts) if (v.size()) m = std::max(m, v.cwiseAbs().maxCoeff());
    return m;
}

double hinge(double x) { return x < 1.0 ? 1.0 - x : 0.0; }

DnnModel init_net(const NetArch& arch, RngStream& rng) {
    arch.validate();
    DnnModel m;
    m.arch = arch;
    m.weights.resize(static_cast<std::size_t>(arch.depth) + 1);
    m.shifts.resize(static_cast<std::size_t>(arch.depth));
    for (int l = 0; l <= arch.depth; ++l) {
        const int fan_in = arch.widths[static_cast<std::size_t>(l)];
        const int fan_out = arch.widths[static_cast<std::size_t>(l) + 1];
        const double a = std::min(arch.weight_bound, 1.0 / std::sqrt(static_cast<double>(fan_in)));
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) w(r, c) = (2.0 * rng.u01() - 1.0) * a;
        m.weights[static_cast<std::size_t>(l)] = std::move(w);
        if (l < arch.depth) {
            Eigen::VectorXd v(fan_out);
            for (int r = 0; r < fan_out; ++r) v[r] = (2.0 * rng.u01() - 1.0) * a;
            m.shifts[static_cast<std::size_t>(l)] = std::move(v);
        }
    }
    return m;
}

double hinge_loss(const DnnModel& model, const Eigen::MatrixXd& x_rows, const Eigen::VectorXi& y,
                  Gradients* grads) {
    const Eigen::Index n = x_rows.rows();
    if (n < 1) throw std::invalid_argument("hinge_loss: empty batch");
    if (y.size() != n) throw std::invalid_argument("hinge_loss: labels size mismatch");
    const int depth = model.arch.depth;

    // forward pass, keeping pre-shift activations
    std::vector<Eigen::MatrixXd> pre(static_cast<std::size_t>(depth));   // a_l - v_l before relu
    std::vector<Eigen::MatrixXd> act(static_cast<std::size_t>(depth) + 1);
    act[0] = x_rows.transpose();  // p0 x n
    Eigen::MatrixXd h = model.weights[0] * act[0];
    for (int l = 0; l < depth; ++l) {
        pre[static_cast<std::size_t>(l)] = h.colwise() - model.shifts[static_cast<std::size_t>(l)];
        act[static_cast<std::size_t>(l) + 1] = pre[static_cast<std::size_t>(l)].cwiseMax(0.0);
        h = model.weights[static_cast<std::size_t>(l) + 1] * act[static_cast<std::size_t>(l) + 1];
    }
    const Eigen::VectorXd raw = h.row(0).transpose();
    const Eigen::VectorXd out = raw.cwiseMax(-1.0).cwiseMin(1.0);

    double loss = 0.0;
    Eigen::VectorXd dout = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double yi = static_cast<double>(y[i]);
        loss += hinge(yi * out[i]);
        // hinge subgradient 0 at the kink; clamp gradient 0 outside (-1, 1)
        if (yi * out[i] < 1.0 && std::abs(raw[i]) < 1.0) dout[i] = -yi;
    }
    loss /= static_cast<double>(n);
    if (!grads) return loss;

    dout /= static_cast<double>(n);
    grads->d_weights.assign(static_cast<std::size_t>(depth) + 1, {});
    grads->d_shifts.assign(static_cast<std::size_t>(depth), {});

    Eigen::MatrixXd delta = dout.transpose();  // 1 x n
    grads->d_weights[static_cast<std::size_t>(depth)] =
        delta * act[static_cast<std::size_t>(depth)].transpose();
    Eigen::MatrixXd back = model.weights[static_cast<std::size_t>(depth)].transpose() * delta;
    for (int l = depth - 1; l >= 0; --l) {
        // relu subgradient: 1 on positive pre-activations, 0 elsewhere (incl. 0)
        back = back.cwiseProduct(
            (pre[static_cast<std::size_t>(l)].array() > 0.0).cast<double>().matrix());
        grads->d_weights[static_cast<std::size_t>(l)] = back * act[static_cast<std::size_t>(l)].transpose();
        grads->d_shifts[static_cast<std::size_t>(l)] = -back.rowwise().sum();
        if (l > 0) back = model.weights[static_cast<std::size_t>(l)].transpose() * back;
    }
    return loss;
}

void project_top_s(DnnModel& model, std::int64_t s) {
    const std::int64_t total = model.arch.parameter_count();
    if (s >= total) return;
    std::vector<double> mags;
    mags.reserve(static_cast<std::size_t>(total));
    for (const auto& w : model.weights)
        for (Eigen::Index i = 0; i < w.size(); ++i) mags.push_back(std::abs(w.data()[i]));
    for (const auto& v : model.shifts)
        for (Eigen::Index i = 0; i < v.size(); ++i) mags.push_back(std::abs(v.data()[i]));
    std::nth_element(mags.begin(), mags.begin() + (s - 1), mags.end(), std::greater<double>());
    const double thr = mags[static_cast<std::size_t>(s - 1)];

    // keep strictly-above-threshold entries, then admit threshold ties in a
    // fixed parameter order until the budget is exhausted
    std::int64_t above = 0;
    for (double m : mags)
        if (m > thr) ++above;
    std::int64_t tie_budget = s - above;
    auto apply = [&](double* data, Eigen::Index size) {
        for (Eigen::Index i = 0; i < size; ++i) {
            const double a = std::abs(data[i]);
            if (a > thr) continue;
            if (a == thr && a > 0.0 && tie_budget > 0) {
                --tie_budget;
                continue;
            }
            data[i] = 0.0;
        }
    };
    for (auto& w : model.weights) apply(w.data(), w.size());
    for (auto& v : model.shifts) apply(v.data(), v.size());
}

TrainResult train(const Eigen::MatrixXd& x_rows, const Eigen::VectorXi& y, const NetArch& arch,
                  const TrainConfig& cfg) {
    arch.validate();
    cfg.validate();
    const Eigen::Index n = x_rows.rows();
    if (y.size() != n) throw std::invalid_argument("train: labels size mismatch");
    bool has_pos = false, has_neg = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (y[i] == 1) has_pos = true;
        else if (y[i] == -1) has_neg = true;
        else throw std::invalid_argument("train: labels must be +1 or -1");
    }
    if (!has_pos || !has_neg) throw std::invalid_argument("train: both classes must be present");

    RngStream rng = RngStream(cfg.seed).child("fdnn-train");
    DnnModel model = init_net(arch, rng);

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    double best = hinge_loss(model, x_rows, y);
    DnnModel best_model = model;
    double lr = cfg.lr;
    int since_improved = 0;
    Gradients g;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (Eigen::Index lo = 0; lo < n; lo += cfg.batch) {
            const Eigen::Index hi = std::min<Eigen::Index>(n, lo + cfg.batch);
            Eigen::MatrixXd xb(hi - lo, x_rows.cols());
            Eigen::VectorXi yb(hi - lo);
            for (Eigen::Index i = lo; i < hi; ++i) {
                xb.row(i - lo) = x_rows.row(order[static_cast<std::size_t>(i)]);
                yb[i - lo] = y[order[static_cast<std::size_t>(i)]];
            }
            hinge_loss(model, xb, yb, &g);
            for (std::size_t l = 0; l < model.weights.size(); ++l)
                model.weights[l] = (model.weights[l] - lr * g.d_weights[l])
                                       .cwiseMax(-arch.weight_bound)
                                       .cwiseMin(arch.weight_bound);
            for (std::size_t l = 0; l < model.shifts.size(); ++l)
                model.shifts[l] = (model.shifts[l] - lr * g.d_shifts[l])
                                      .cwiseMax(-arch.weight_bound)
                                      .cwiseMin(arch.weight_bound);
        }
        if ((epoch + 1) % cfg.projection_period == 0) project_top_s(model, arch.sparsity);

        const double loss = hinge_loss(model, x_rows, y);
        if (!std::isfinite(loss))
            throw NumericalError("fdnn train: loss diverged at epoch " + std::to_string(epoch));
        if (loss < best - 1e-12) {
            best = loss;
            best_model = model;
            since_improved = 0;
        } else if (++since_improved >= cfg.plateau_patience) {
            lr *= cfg.lr_decay;
            since_improved = 0;
        }
        result.best_loss_trace.push_back(best);
        result.epochs_run = epoch + 1;
    }

    project_top_s(best_model, arch.sparsity);
    result.final_loss = hinge_loss(best_model, x_rows, y);
    result.model = std::move(best_model);
    return result;
}

int classify_dnn(const DnnModel& model, const Eigen::VectorXd& z) {
    return model.forward(z) >= 0.0 ? 1 : 2;
}

RiskEstimate dnn_risk(const DnnModel& model, const Eigen::MatrixXd& test_scores,
                      const Eigen::VectorXi& labels, int threads) {
    const Eigen::Index n = test_scores.rows();
    if (n < 1) throw std::invalid_argument("dnn_risk: empty test set");
    if (labels.size() != n) throw std::invalid_argument("dnn_risk: labels size mismatch");
    std::int64_t errors = 0;

#ifdef _OPENMP
    const int nt = threads > 0 ? threads : omp_get_max_threads();
#else
    const int nt = 1;
    (void)threads;
#endif

#pragma omp parallel for schedule(static) num_threads(nt) reduction(+ : errors)
    for (Eigen::Index i = 0; i < n; ++i) {
        const int pred =
            classify_dnn(model, test_scores.row(i).head(model.arch.input_dim).transpose());
        if (pred != labels[i]) ++errors;
    }
    RiskEstimate est;
    est.risk = static_cast<double>(errors) / static_cast<double>(n);
    est.se = std::sqrt(est.risk * (1.0 - est.risk) / static_cast<double>(n));
    return est;
}

void save_dnn(const DnnModel& model, std::ostream& os) {
    os << "fdnn-v1\n";
    os << model.arch.depth << " " << model.arch.input_dim << "\n";
    for (std::size_t i = 0; i < model.arch.widths.size(); ++i)
        os << (i ? " " : "") << model.arch.widths[i];
    os << "\n" << model.arch.sparsity << " ";
    os.precision(17);
    os << model.arch.weight_bound << "\n";
    for (const auto& w : model.weights) {
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) os << (c ? " " : "") << w(r, c);
            os << "\n";
        }
    }
    for (const auto& v : model.shifts) {
        for (Eigen::Index r = 0; r < v.size(); ++r) os << (r ? " " : "") << v[r];
        os << "\n";
    }
}

DnnModel load_dnn(std::istream& is) {
    std::string magic;
    is >> magic;
    if (magic != "fdnn-v1") throw DataError("load_dnn: unrecognized model file");
    NetArch arch;
    if (!(is >> arch.depth >> arch.input_dim)) throw DataError("load_dnn: bad header");
    if (arch.depth < 1 || arch.depth > 1000 || arch.input_dim < 1)
        throw DataError("load_dnn: bad dimensions");
    arch.widths.resize(static_cast<std::size_t>(arch.depth) + 2);
    for (auto& w : arch.widths)
        if (!(is >> w)) throw DataError("load_dnn: bad widths");
    if (!(is >> arch.sparsity >> arch.weight_bound)) throw DataError("load_dnn: bad constraints");
    arch.validate();

    DnnModel m;
    m.arch = arch;
    m.weights.resize(static_cast<std::size_t>(arch.depth) + 1);
    m.shifts.resize(static_cast<std::size_t>(arch.depth));
    for (int l = 0; l <= arch.depth; ++l) {
        Eigen::MatrixXd w(arch.widths[static_cast<std::size_t>(l) + 1],
                          arch.widths[static_cast<std::size_t>(l)]);
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                if (!(is >> w(r, c))) throw DataError("load_dnn: truncated weights");
        m.weights[static_cast<std::size_t>(l)] = std::move(w);
    }
    for (int l = 0; l < arch.depth; ++l) {
        Eigen::VectorXd v(arch.widths[static_cast<std::size_t>(l) + 1]);
        for (Eigen::Index r = 0; r < v.size(); ++r)
            if (!(is >> v[r])) throw DataError("load_dnn: truncated shifts");
        m.shifts[static_cast<std::size_t>(l)] = std::move(v);
    }
    return m;
}

}  // namespace fdc
