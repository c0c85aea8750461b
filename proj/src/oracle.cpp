#include "fdc/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fdc {

namespace {

double log_normal_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * (std::log(2.0 * M_PI * var) + d * d / var);
}

double log_student_t_pdf(double x, int dof) {
    const double v = static_cast<double>(dof);
    return std::lgamma(0.5 * (v + 1.0)) - std::lgamma(0.5 * v) - 0.5 * std::log(v * M_PI) -
           0.5 * (v + 1.0) * std::log1p(x * x / v);
}

}  // namespace

void BayesRule::validate() const {
    pop.validate();
    if (j_trunc < 1 || j_trunc > pop.j_model())
        throw std::invalid_argument("BayesRule: j_trunc must be in [1, j_model]");
}

double q_star(const BayesRule& rule, const Eigen::VectorXd& z) {
    if (z.size() != rule.j_trunc)
        throw std::invalid_argument("q_star: score length must equal j_trunc");
    const auto& p = rule.pop;
    double quad = 0.0, lin = 0.0, logdet = 0.0;
    for (int j = 0; j < rule.j_trunc; ++j) {
        const double d = 1.0 / p.lambda2[j] - 1.0 / p.lambda1[j];
        const double c1 = z[j] - p.mu1[j];
        quad += d * c1 * c1;
        const double mubar = 0.5 * (p.mu1[j] + p.mu2[j]);
        lin += (p.mu1[j] - p.mu2[j]) / p.lambda2[j] * (z[j] - mubar);
        logdet += std::log(p.lambda1[j] / p.lambda2[j]);
    }
    return quad + 2.0 * lin - logdet + 2.0 * std::log(p.pi1 / p.pi2);
}

int classify_oracle(const BayesRule& rule, const Eigen::VectorXd& z) {
    return q_star(rule, z) >= 0.0 ? 1 : 2;
}

double log_density_ratio(const PopulationPair& pop, const Eigen::VectorXd& z) {
    if (z.size() != pop.j_model())
        throw std::invalid_argument("log_density_ratio: score length must equal j_model");
    double lf1 = std::log(pop.pi1), lf2 = std::log(pop.pi2);
    for (int j = 0; j < pop.j_model(); ++j) {
        lf1 += log_normal_pdf(z[j], pop.mu1[j], pop.lambda1[j]);
        if (pop.score_law2 == ScoreLaw::student_t)
            lf2 += log_student_t_pdf(z[j], pop.t_dof[j]);
        else
            lf2 += log_normal_pdf(z[j], pop.mu2[j], pop.lambda2[j]);
    }
    return lf1 - lf2;
}

int classify_bayes(const PopulationPair& pop, const Eigen::VectorXd& z) {
    if (pop.score_law2 == ScoreLaw::student_t)
        return log_density_ratio(pop, z) >= 0.0 ? 1 : 2;
    return classify_oracle(BayesRule::full(pop), z);
}

RiskEstimate mc_bayes_risk(const BayesRule& rule, std::int64_t n_test, const RngStream& stream,
                           int threads) {
    rule.validate();
    if (n_test < 1) throw std::invalid_argument("mc_bayes_risk: n_test must be >= 1");

    // classification sees only the first j_trunc scores
    PopulationPair trunc = rule.pop;
    if (rule.j_trunc < rule.pop.j_model()) {
        trunc.mu1 = rule.pop.mu1.head(rule.j_trunc);
        trunc.mu2 = rule.pop.mu2.head(rule.j_trunc);
        trunc.lambda1 = rule.pop.lambda1.head(rule.j_trunc);
        trunc.lambda2 = rule.pop.lambda2.head(rule.j_trunc);
        if (rule.pop.score_law2 == ScoreLaw::student_t)
            trunc.t_dof = rule.pop.t_dof.head(rule.j_trunc);
    }

    constexpr std::int64_t kBlock = 4096;
    const std::int64_t n_blocks = (n_test + kBlock - 1) / kBlock;
    std::int64_t errors = 0;

#ifdef _OPENMP
    const int nt = threads > 0 ? threads : omp_get_max_threads();
#else
    const int nt = 1;
    (void)threads;
#endif

#pragma omp parallel for schedule(static) num_threads(nt) reduction(+ : errors)
    for (std::int64_t b = 0; b < n_blocks; ++b) {
        RngStream rng = stream.child(static_cast<std::uint64_t>(b));
        const std::int64_t lo = b * kBlock;
        const std::int64_t hi = std::min(n_test, lo + kBlock);
        std::int64_t local = 0;
        for (std::int64_t i = lo; i < hi; ++i) {
            const int label = rng.u01() < rule.pop.pi1 ? 1 : 2;
            const Eigen::VectorXd z = draw_scores(rule.pop, label, rng);
            if (classify_bayes(trunc, z.head(rule.j_trunc)) != label) ++local;
        }
        errors += local;
    }
    RiskEstimate est;
    est.risk = static_cast<double>(errors) / static_cast<double>(n_test);
    est.se = std::sqrt(est.risk * (1.0 - est.risk) / static_cast<double>(n_test));
    return est;
}

double excess_risk(double classifier_risk, double bayes_risk) {
    return classifier_risk - bayes_risk;
}

}  // namespace fdc
