#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <vector>

#include "fdc/basis.hpp"
#include "fdc/model.hpp"
#include "fdc/oracle.hpp"
#include "fdc/rng.hpp"

namespace fdc {

inline constexpr double kVarFloor = 1e-8;

enum class QdaMode { fqda, sfqda };

/// Fitted (s)FQDA parameters. Diagonal model throughout: d_hat is the diagonal
/// of Sigma2^-1 - Sigma1^-1, beta_hat = Sigma2^-1 (mu2 - mu1) (density-ratio
/// consistent sign).
struct QdaModel {
    Eigen::VectorXd mu_hat1, mu_hat2;
    Eigen::VectorXd lam_hat1, lam_hat2;  // floored at kVarFloor
    Eigen::VectorXd d_hat, beta_hat;
    double pi_hat1 = 0.5, pi_hat2 = 0.5;
    int j_used = 0;
    QdaMode mode = QdaMode::fqda;
    int floor_warnings = 0;  // coordinates where a variance estimate was floored
};

/// Core fit from per-class score matrices (rows = samples); uses the first j
/// columns. Sample means and biased 1/n_k variances, exactly the estimators
/// of the method.
QdaModel fit_qda_scores(const Eigen::MatrixXd& scores1, const Eigen::MatrixXd& scores2, int j,
                        QdaMode mode);

/// Fit from labeled CurveSamples. fqda mode requires ExactScores; sfqda mode
/// requires GridValues on a common grid and projects with the given design.
QdaModel fit(const std::vector<CurveSample>& train, int j, QdaMode mode,
             const DesignMatrix* design = nullptr,
             ProjectionMode projection = ProjectionMode::paper_faithful);

/// Q_hat(z); class 1 iff >= 0.
double discriminant(const QdaModel& model, const Eigen::VectorXd& z);
int classify(const QdaModel& model, const Eigen::VectorXd& z);

/// Misclassified fraction over labeled test scores (rows), binomial SE.
RiskEstimate risk(const QdaModel& model, const Eigen::MatrixXd& test_scores,
                  const Eigen::VectorXi& labels, int threads = 1);

/// QdaModel with the population's true parameters plugged in; its discriminant
/// coincides with q_star pointwise.
QdaModel plug_in_true(const PopulationPair& pop, int j);

enum class JMethod { theory_full, theory_sampled, cross_validation };

struct JSelection {
    JMethod method = JMethod::cross_validation;
    double nu1 = 1.0, nu2 = 1.0;  // theory modes
    int k_folds = 5;
    std::vector<int> j_grid;      // CV candidates; empty = 1..min(20, M, n/2) default
};

std::vector<int> default_j_grid(int n_total, std::optional<int> m, int j_available);

/// Truncation level: theorem formulas (rounded, clamped to [1, j_available]) or
/// stratified K-fold CV minimizing validation misclassification, ties to the
/// smallest candidate.
int select_j(const JSelection& sel, int n, std::optional<int> m, int j_available,
             const Eigen::MatrixXd* scores1 = nullptr, const Eigen::MatrixXd* scores2 = nullptr,
             RngStream* rng = nullptr);

void save_qda(const QdaModel& model, std::ostream& os);
QdaModel load_qda(std::istream& is);

}  // namespace fdc
