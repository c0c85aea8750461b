#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "fdc/basis.hpp"
#include "fdc/rng.hpp"

namespace fdc {

/// Law of the class-2 projection scores. Models 1-4 are Gaussian in both
/// classes; Model 5 draws class-2 scores from per-coordinate Student-t.
enum class ScoreLaw { gaussian, student_t };

/// Two-class Gaussian-process population in projection-score space,
/// truncated at j_model() terms (tails are exactly zero).
struct PopulationPair {
    double pi1 = 0.5;
    double pi2 = 0.5;
    Eigen::VectorXd mu1, mu2;          // mean projection scores
    Eigen::VectorXd lambda1, lambda2;  // score variances (eigenvalues), > 0
    BasisKind basis_kind = BasisKind::fourier;
    ScoreLaw score_law2 = ScoreLaw::gaussian;
    Eigen::VectorXi t_dof;             // per-coordinate dof when score_law2 == student_t

    int j_model() const { return static_cast<int>(mu1.size()); }
    void validate() const;  // throws std::invalid_argument on a broken invariant
};

/// One observed curve: exact projection scores or M grid samples.
struct CurveSample {
    enum class Kind { exact_scores, grid_values };
    Kind kind = Kind::exact_scores;
    Eigen::VectorXd values;
    std::optional<int> label;  // 1 or 2 when known
};

/// The paper's five simulation populations, verbatim parameters.
PopulationPair model_preset(int id);

/// One score vector for class k (1 or 2) drawn from the population's law.
Eigen::VectorXd draw_scores(const PopulationPair& pop, int k, RngStream& rng);

/// n x j_model score matrix for class k.
Eigen::MatrixXd draw_score_matrix(const PopulationPair& pop, int k, int n, RngStream& rng);

/// Synthesize grid observations X(t_m) = sum_j xi_j psi_j(t_m) for score rows.
Eigen::MatrixXd synthesize_curves(const PopulationPair& pop, const Eigen::MatrixXd& scores,
                                  const Eigen::VectorXd& grid);

/// Labeled dataset: n1 class-1 then n2 class-2 samples. With grid_m present the
/// samples carry GridValues on the offset grid t_m = (m-1)/M, else ExactScores.
/// Deterministic under a fixed seed.
std::vector<CurveSample> sample_dataset(const PopulationPair& pop, int n1, int n2,
                                        std::optional<int> grid_m, std::uint64_t seed,
                                        GridKind grid_kind = GridKind::offset);

// --- parameter-space membership -------------------------------------------

enum class SpaceKind { hyperrectangle, sobolev_ball };

/// Parameter-space description: H^w(A)/S^w(A) sequence classes of orders
/// (nu1 for means/eigenvalues, nu2 for separations) plus the prior bound C0.
struct ParamSpaceSpec {
    SpaceKind kind = SpaceKind::hyperrectangle;
    double radius = 1.0;  // A > 0
    double nu1 = 1.0;
    double nu2 = 1.0;
    double c0 = 0.05;     // in (0, 1/2)
    void validate() const;
};

/// Minimal A with sup_j |a_j| j^(1+omega) <= A over the stored prefix.
double hyperrectangle_min_radius(const Eigen::VectorXd& seq, double omega);

/// Minimal A with sum_j |a_j| j^omega <= A over the stored prefix.
double sobolev_min_radius(const Eigen::VectorXd& seq, double omega);

struct MembershipCondition {
    std::string name;
    double min_radius = 0.0;  // smallest A making this condition pass
    bool pass = false;        // at the spec's radius, boundary inclusive
};

struct MembershipReport {
    std::vector<MembershipCondition> conditions;
    bool prior_ok = false;
    bool member = false;
};

/// Evaluates the four sequence conditions and the prior bound; tails beyond
/// j_model are treated as exactly zero. Boundary equalities are members.
MembershipReport check_membership(const PopulationPair& pop, const ParamSpaceSpec& spec);

/// (sum_j (mu1j-mu2j)^2/lambda2j, sum_j (lambda1j/lambda2j - 1)^2) over the
/// stored prefix; both finite iff the Bayes risk is nonvanishing.
struct SeparationDiagnostics {
    double mean_sep = 0.0;
    double cov_sep = 0.0;
};

SeparationDiagnostics separation_diagnostics(const PopulationPair& pop);

}  // namespace fdc
