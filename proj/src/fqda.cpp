#include "fdc/fqda.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fdc/errors.hpp"

namespace fdc {

QdaModel fit_qda_scores(const Eigen::MatrixXd& scores1, const Eigen::MatrixXd& scores2, int j,
                        QdaMode mode) {
    if (scores1.rows() < 2 || scores2.rows() < 2)
        throw std::invalid_argument("fit: each class needs at least 2 samples");
    if (j < 1 || j > scores1.cols() || j > scores2.cols())
        throw std::invalid_argument("fit: j exceeds available score columns");

    QdaModel m;
    m.j_used = j;
    m.mode = mode;
    const double n1 = static_cast<double>(scores1.rows());
    const double n2 = static_cast<double>(scores2.rows());
    m.mu_hat1 = scores1.leftCols(j).colwise().mean().transpose();
    m.mu_hat2 = scores2.leftCols(j).colwise().mean().transpose();
    // biased 1/n_k variance, as the estimator is defined
    m.lam_hat1 =
        (scores1.leftCols(j).rowwise() - m.mu_hat1.transpose()).array().square().colwise().sum().transpose() / n1;
    m.lam_hat2 =
        (scores2.leftCols(j).rowwise() - m.mu_hat2.transpose()).array().square().colwise().sum().transpose() / n2;
    for (int c = 0; c < j; ++c) {
        if (m.lam_hat1[c] < kVarFloor) {
            m.lam_hat1[c] = kVarFloor;
            ++m.floor_warnings;
        }
        if (m.lam_hat2[c] < kVarFloor) {
            m.lam_hat2[c] = kVarFloor;
            ++m.floor_warnings;
        }
    }
    m.d_hat = m.lam_hat2.cwiseInverse() - m.lam_hat1.cwiseInverse();
    m.beta_hat = (m.mu_hat2 - m.mu_hat1).cwiseQuotient(m.lam_hat2);
    m.pi_hat1 = n1 / (n1 + n2);
    m.pi_hat2 = n2 / (n1 + n2);
    return m;
}

QdaModel fit(const std::vector<CurveSample>& train, int j, QdaMode mode,
             const DesignMatrix* design, ProjectionMode projection) {
    std::vector<const CurveSample*> c1, c2;
    for (const auto& s : train) {
        if (!s.label) throw std::invalid_argument("fit: training samples must be labeled");
        (*s.label == 1 ? c1 : c2).push_back(&s);
    }
    if (c1.size() < 2 || c2.size() < 2)
        throw std::invalid_argument("fit: each class needs at least 2 samples");

    auto to_matrix = [&](const std::vector<const CurveSample*>& cls) {
        Eigen::MatrixXd out;
        for (std::size_t i = 0; i < cls.size(); ++i) {
            const CurveSample& s = *cls[i];
            Eigen::VectorXd scores;
            if (mode == QdaMode::fqda) {
                if (s.kind != CurveSample::Kind::exact_scores)
                    throw std::invalid_argument("fit: fqda mode requires exact scores");
                scores = s.values;
            } else {
                if (s.kind != CurveSample::Kind::grid_values)
                    throw std::invalid_argument("fit: sfqda mode requires grid values");
                if (!design) throw std::invalid_argument("fit: sfqda mode requires a design matrix");
                scores = project_scores(s.values, *design, projection);
            }
            if (out.size() == 0) out.resize(static_cast<Eigen::Index>(cls.size()), scores.size());
            if (scores.size() != out.cols())
                throw std::invalid_argument("fit: inconsistent sample lengths");
            out.row(static_cast<Eigen::Index>(i)) = scores.transpose();
        }
        return out;
    };
    return fit_qda_scores(to_matrix(c1), to_matrix(c2), j, mode);
}

double discriminant(const QdaModel& model, const Eigen::VectorXd& z) {
    if (z.size() != model.j_used)
        throw std::invalid_argument("discriminant: score length must equal j_used");
    double quad = 0.0, lin = 0.0, logdet = 0.0;
    for (int j = 0; j < model.j_used; ++j) {
        const double c1 = z[j] - model.mu_hat1[j];
        quad += model.d_hat[j] * c1 * c1;
        const double mubar = 0.5 * (model.mu_hat1[j] + model.mu_hat2[j]);
        lin += model.beta_hat[j] * (z[j] - mubar);
        // log|D S1 + I| = sum log(l1/l2) via D S1 + I = S2^-1 S1
        logdet += std::log(model.lam_hat1[j] / model.lam_hat2[j]);
    }
    return quad - 2.0 * lin - logdet + 2.0 * std::log(model.pi_hat1 / model.pi_hat2);
}

int classify(const QdaModel& model, const Eigen::VectorXd& z) {
    return discriminant(model, z) >= 0.0 ? 1 : 2;
}

RiskEstimate risk(const QdaModel& model, const Eigen::MatrixXd& test_scores,
                  const Eigen::VectorXi& labels, int threads) {
    const Eigen::Index n = test_scores.rows();
    if (n < 1) throw std::invalid_argument("risk: empty test set");
    if (labels.size() != n) throw std::invalid_argument("risk: labels/scores size mismatch");
    std::int64_t errors = 0;

#ifdef _OPENMP
    const int nt = threads > 0 ? threads : omp_get_max_threads();
#else
    const int nt = 1;
    (void)threads;
#endif

#pragma omp parallel for schedule(static) num_threads(nt) reduction(+ : errors)
    for (Eigen::Index i = 0; i < n; ++i) {
        const int pred = classify(model, test_scores.row(i).head(model.j_used).transpose());
        if (pred != labels[i]) ++errors;
    }
    RiskEstimate est;
    est.risk = static_cast<double>(errors) / static_cast<double>(n);
    est.se = std::sqrt(est.risk * (1.0 - est.risk) / static_cast<double>(n));
    return est;
}

QdaModel plug_in_true(const PopulationPair& pop, int j) {
    pop.validate();
    if (j < 1 || j > pop.j_model()) throw std::invalid_argument("plug_in_true: bad j");
    QdaModel m;
    m.j_used = j;
    m.mode = QdaMode::fqda;
    m.mu_hat1 = pop.mu1.head(j);
    m.mu_hat2 = pop.mu2.head(j);
    m.lam_hat1 = pop.lambda1.head(j);
    m.lam_hat2 = pop.lambda2.head(j);
    m.d_hat = m.lam_hat2.cwiseInverse() - m.lam_hat1.cwiseInverse();
    m.beta_hat = (m.mu_hat2 - m.mu_hat1).cwiseQuotient(m.lam_hat2);
    m.pi_hat1 = pop.pi1;
    m.pi_hat2 = pop.pi2;
    return m;
}

std::vector<int> default_j_grid(int n_total, std::optional<int> m, int j_available) {
    int cap = std::min(20, std::max(1, n_total / 2));
    if (m) cap = std::min(cap, *m);
    cap = std::min(cap, j_available);
    std::vector<int> grid(static_cast<std::size_t>(cap));
    std::iota(grid.begin(), grid.end(), 1);
    return grid;
}

namespace {

int theory_full_j(int n, double nu2) {
    const double j = std::pow(static_cast<double>(n) / std::log(static_cast<double>(n)),
                              1.0 / (1.0 + nu2));
    return static_cast<int>(std::lround(j));
}

int theory_sampled_j(int n, int m, double nu1, double nu2) {
    const double m_star = std::pow(static_cast<double>(n) / std::log(static_cast<double>(n)),
                                   1.0 / nu1);
    if (static_cast<double>(m) < m_star)
        return static_cast<int>(std::lround(std::pow(static_cast<double>(m), nu1 / (1.0 + nu2))));
    return theory_full_j(n, nu2);
}

}  // namespace

int select_j(const JSelection& sel, int n, std::optional<int> m, int j_available,
             const Eigen::MatrixXd* scores1, const Eigen::MatrixXd* scores2, RngStream* rng) {
    auto clamp = [&](int j) { return std::clamp(j, 1, j_available); };
    switch (sel.method) {
        case JMethod::theory_full:
            return clamp(theory_full_j(n, sel.nu2));
        case JMethod::theory_sampled:
            if (!m) throw std::invalid_argument("select_j: theory_sampled needs M");
            return clamp(theory_sampled_j(n, *m, sel.nu1, sel.nu2));
        case JMethod::cross_validation:
            break;
    }
    if (!scores1 || !scores2 || !rng)
        throw std::invalid_argument("select_j: cross-validation needs training scores and a stream");

    std::vector<int> grid = sel.j_grid;
    if (grid.empty())
        grid = default_j_grid(static_cast<int>(scores1->rows() + scores2->rows()), m, j_available);
    for (int j : grid)
        if (j < 1 || j > j_available)
            throw std::invalid_argument("select_j: j_grid entry out of range");

    // stratified K-fold: per-class shuffled indices dealt round-robin
    const int k_folds = std::max(2, sel.k_folds);
    std::vector<int> idx1(scores1->rows()), idx2(scores2->rows());
    std::iota(idx1.begin(), idx1.end(), 0);
    std::iota(idx2.begin(), idx2.end(), 0);
    rng->shuffle(idx1);
    rng->shuffle(idx2);

    std::vector<std::int64_t> errors(grid.size(), 0);
    int folds_used = 0;
    for (int f = 0; f < k_folds; ++f) {
        std::vector<int> v1, v2, t1, t2;
        for (std::size_t i = 0; i < idx1.size(); ++i)
            (static_cast<int>(i) % k_folds == f ? v1 : t1).push_back(idx1[i]);
        for (std::size_t i = 0; i < idx2.size(); ++i)
            (static_cast<int>(i) % k_folds == f ? v2 : t2).push_back(idx2[i]);
        if (t1.size() < 2 || t2.size() < 2) continue;  // fold missing a usable class
        if (v1.empty() && v2.empty()) continue;
        ++folds_used;

        Eigen::MatrixXd s1(t1.size(), scores1->cols()), s2(t2.size(), scores2->cols());
        for (std::size_t i = 0; i < t1.size(); ++i) s1.row(i) = scores1->row(t1[i]);
        for (std::size_t i = 0; i < t2.size(); ++i) s2.row(i) = scores2->row(t2[i]);

        for (std::size_t g = 0; g < grid.size(); ++g) {
            const QdaModel mdl = fit_qda_scores(s1, s2, grid[g], QdaMode::fqda);
            for (int i : v1)
                if (classify(mdl, scores1->row(i).head(grid[g]).transpose()) != 1) ++errors[g];
            for (int i : v2)
                if (classify(mdl, scores2->row(i).head(grid[g]).transpose()) != 2) ++errors[g];
        }
    }
    if (folds_used == 0) throw DataError("select_j: all cross-validation folds were unusable");

    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g)
        if (errors[g] < errors[best]) best = g;  // ties keep the smaller j
    return grid[best];
}

void save_qda(const QdaModel& model, std::ostream& os) {
    os << "fqda-v1\n";
    os << (model.mode == QdaMode::fqda ? "fqda" : "sfqda") << " " << model.j_used << " "
       << model.floor_warnings << "\n";
    os.precision(17);
    auto line = [&](const Eigen::VectorXd& v) {
        for (int i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
        os << "\n";
    };
    line(model.mu_hat1);
    line(model.mu_hat2);
    line(model.lam_hat1);
    line(model.lam_hat2);
    os << model.pi_hat1 << " " << model.pi_hat2 << "\n";
}

QdaModel load_qda(std::istream& is) {
    std::string magic;
    is >> magic;
    if (magic != "fqda-v1") throw DataError("load_qda: unrecognized model file");
    std::string mode;
    QdaModel m;
    is >> mode >> m.j_used >> m.floor_warnings;
    if (mode != "fqda" && mode != "sfqda") throw DataError("load_qda: bad mode");
    if (m.j_used < 1) throw DataError("load_qda: bad j");
    m.mode = mode == "fqda" ? QdaMode::fqda : QdaMode::sfqda;
    auto read_vec = [&](Eigen::VectorXd& v) {
        v.resize(m.j_used);
        for (int i = 0; i < m.j_used; ++i)
            if (!(is >> v[i])) throw DataError("load_qda: truncated model file");
    };
    read_vec(m.mu_hat1);
    read_vec(m.mu_hat2);
    read_vec(m.lam_hat1);
    read_vec(m.lam_hat2);
    if (!(is >> m.pi_hat1 >> m.pi_hat2)) throw DataError("load_qda: truncated model file");
    m.d_hat = m.lam_hat2.cwiseInverse() - m.lam_hat1.cwiseInverse();
    m.beta_hat = (m.mu_hat2 - m.mu_hat1).cwiseQuotient(m.lam_hat2);
    return m;
}

}  // namespace fdc
