#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "fdc/model.hpp"
#include "fdc/rng.hpp"

namespace fdc {

/// Functional Bayes rule for a known population, truncated at j_trunc terms.
struct BayesRule {
    PopulationPair pop;
    int j_trunc = 0;

    static BayesRule full(const PopulationPair& pop) { return {pop, pop.j_model()}; }
    void validate() const;
};

/// Quadratic discriminant Q*(z) = (z-mu1)'D(z-mu1) + 2(mu1-mu2)'S2^-1(z-mubar)
/// - sum_j log(l1j/l2j) + 2 log(pi1/pi2), D = S2^-1 - S1^-1 diagonal.
/// Equals 2 log(pi1 f1(z) / pi2 f2(z)) under the Gaussian model.
double q_star(const BayesRule& rule, const Eigen::VectorXd& z);

/// Class 1 iff Q*(z) >= 0 (ties to class 1).
int classify_oracle(const BayesRule& rule, const Eigen::VectorXd& z);

/// log(pi1 f1(z)) - log(pi2 f2(z)) with f2 per the population's score law;
/// the exact Bayes statistic for Student-t class-2 populations.
double log_density_ratio(const PopulationPair& pop, const Eigen::VectorXd& z);

/// Bayes classifier dispatching on the score law: q_star for Gaussian pairs,
/// density ratio otherwise. Class 1 on ties.
int classify_bayes(const PopulationPair& pop, const Eigen::VectorXd& z);

struct RiskEstimate {
    double risk = 0.0;
    double se = 0.0;
};

/// Monte Carlo misclassification risk of the Bayes rule: labels drawn from the
/// priors, scores from the class law, binomial standard error. Deterministic
/// for a given stream seed regardless of thread count (block-indexed streams).
RiskEstimate mc_bayes_risk(const BayesRule& rule, std::int64_t n_test, const RngStream& stream,
                           int threads = 1);

/// Raw difference, may be slightly negative under MC noise (not clamped).
double excess_risk(double classifier_risk, double bayes_risk);

}  // namespace fdc
