#include "fdc/model.hpp"

#include <cmath>
#include <stdexcept>

namespace fdc {

void PopulationPair::validate() const {
    if (!(pi1 > 0.0 && pi1 < 1.0 && pi2 > 0.0 && pi2 < 1.0))
        throw std::invalid_argument("PopulationPair: priors must lie in (0, 1)");
    if (std::abs(pi1 + pi2 - 1.0) > 1e-12)
        throw std::invalid_argument("PopulationPair: priors must sum to 1");
    const auto j = mu1.size();
    if (mu2.size() != j || lambda1.size() != j || lambda2.size() != j)
        throw std::invalid_argument("PopulationPair: mu/lambda vectors must share length");
    if ((lambda1.array() <= 0.0).any() || (lambda2.array() <= 0.0).any())
        throw std::invalid_argument("PopulationPair: eigenvalues must be positive");
    if (score_law2 == ScoreLaw::student_t && t_dof.size() != j)
        throw std::invalid_argument("PopulationPair: t_dof length must equal j_model");
}

PopulationPair model_preset(int id) {
    PopulationPair p;
    auto vec = [](std::initializer_list<double> v) {
        Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
        Eigen::Index i = 0;
        for (double x : v) out[i++] = x;
        return out;
    };
    switch (id) {
        case 1:
            p.mu1 = vec({-1.0, 2.0, -3.0});
            p.lambda1 = vec({3.0 / 5, 2.0 / 5, 1.0 / 5});
            p.mu2 = vec({-0.5, 2.5, -2.5});
            p.lambda2 = vec({9.0 / 10, 1.0 / 2, 3.0 / 10});
            p.basis_kind = BasisKind::log_poly;
            break;
        case 2:
            p.mu1 = vec({-6.0, 12.0, -18.0});
            p.lambda1 = vec({3.0, 2.0, 1.0});
            p.mu2 = vec({-3.0, 9.0, -15.0});
            p.lambda2 = vec({9.0 / 2, 5.0 / 2, 3.0 / 2});
            p.basis_kind = BasisKind::log_poly;
            break;
        case 3:
            p.mu1 = vec({1.0, -1.0, 2.0, -3.0});
            p.lambda1 = vec({4.0 / 5, 3.0 / 5, 2.0 / 5, 1.0 / 5});
            p.mu2 = vec({0.5, -0.5, 2.5, -2.5});
            p.lambda2 = vec({1.0, 1.0, 1.0 / 2, 3.0 / 10});
            p.basis_kind = BasisKind::sin_log_poly;
            break;
        case 4:
            p.mu1 = vec({6.0, -6.0, 12.0, -18.0});
            p.lambda1 = vec({4.0, 3.0, 2.0, 1.0});
            p.mu2 = vec({3.0, -3.0, 9.0, -15.0});
            p.lambda2 = vec({5.0, 5.0, 5.0 / 2, 3.0 / 2});
            p.basis_kind = BasisKind::sin_log_poly;
            break;
        case 5:
            // Class 2 scores are raw t_{7-2j} variates (t5, t3, t1). The stored
            // mu2/lambda2 are the nominal location/scale of those densities, not
            // moments (the t1 coordinate has none); diagnostics use them as-is.
            p.mu1 = vec({-1.0, 2.0, -3.0});
            p.lambda1 = vec({3.0, 2.0, 1.0});
            p.mu2 = vec({0.0, 0.0, 0.0});
            p.lambda2 = vec({1.0, 1.0, 1.0});
            p.basis_kind = BasisKind::log_poly;
            p.score_law2 = ScoreLaw::student_t;
            p.t_dof = Eigen::Vector3i(5, 3, 1);
            break;
        default:
            throw std::invalid_argument("model_preset: id must be in 1..5");
    }
    p.pi1 = p.pi2 = 0.5;
    p.validate();
    return p;
}

Eigen::VectorXd draw_scores(const PopulationPair& pop, int k, RngStream& rng) {
    if (k != 1 && k != 2) throw std::invalid_argument("draw_scores: class must be 1 or 2");
    const int j_model = pop.j_model();
    Eigen::VectorXd x(j_model);
    if (k == 2 && pop.score_law2 == ScoreLaw::student_t) {
        for (int j = 0; j < j_model; ++j) x[j] = rng.student_t(pop.t_dof[j]);
        return x;
    }
    const auto& mu = (k == 1) ? pop.mu1 : pop.mu2;
    const auto& lam = (k == 1) ? pop.lambda1 : pop.lambda2;
    for (int j = 0; j < j_model; ++j) x[j] = rng.normal(mu[j], std::sqrt(lam[j]));
    return x;
}

Eigen::MatrixXd draw_score_matrix(const PopulationPair& pop, int k, int n, RngStream& rng) {
    Eigen::MatrixXd out(n, pop.j_model());
    for (int i = 0; i < n; ++i) out.row(i) = draw_scores(pop, k, rng).transpose();
    return out;
}

Eigen::MatrixXd synthesize_curves(const PopulationPair& pop, const Eigen::MatrixXd& scores,
                                  const Eigen::VectorXd& grid) {
    if (scores.cols() != pop.j_model())
        throw std::invalid_argument("synthesize_curves: score width must equal j_model");
    const auto design = build_design_on_grid(grid, pop.j_model(), pop.basis_kind);
    return scores * design.b.transpose();
}

std::vector<CurveSample> sample_dataset(const PopulationPair& pop, int n1, int n2,
                                        std::optional<int> grid_m, std::uint64_t seed,
                                        GridKind grid_kind) {
    if (n1 < 1 || n2 < 1) throw std::invalid_argument("sample_dataset: n1, n2 must be >= 1");
    if (grid_m && *grid_m < 1) throw std::invalid_argument("sample_dataset: grid_m must be >= 1");
    pop.validate();
    RngStream rng(seed);
    std::vector<CurveSample> out;
    out.reserve(static_cast<std::size_t>(n1) + n2);
    Eigen::VectorXd grid;
    std::optional<DesignMatrix> design;
    if (grid_m) {
        grid = make_grid(*grid_m, grid_kind);
        design = build_design_on_grid(grid, pop.j_model(), pop.basis_kind);
    }
    for (int k = 1; k <= 2; ++k) {
        const int nk = (k == 1) ? n1 : n2;
        for (int i = 0; i < nk; ++i) {
            CurveSample s;
            const Eigen::VectorXd xi = draw_scores(pop, k, rng);
            if (design) {
                s.kind = CurveSample::Kind::grid_values;
                s.values = design->b * xi;
            } else {
                s.kind = CurveSample::Kind::exact_scores;
                s.values = xi;
            }
            s.label = k;
            out.push_back(std::move(s));
        }
    }
    return out;
}

void ParamSpaceSpec::validate() const {
    if (!(radius > 0.0)) throw std::invalid_argument("ParamSpaceSpec: radius must be > 0");
    if (!(nu1 > 0.0 && nu2 > 0.0)) throw std::invalid_argument("ParamSpaceSpec: orders must be > 0");
    if (!(c0 > 0.0 && c0 < 0.5)) throw std::invalid_argument("ParamSpaceSpec: C0 must be in (0, 1/2)");
}

double hyperrectangle_min_radius(const Eigen::VectorXd& seq, double omega) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < seq.size(); ++j)
        worst = std::max(worst, std::abs(seq[j]) * std::pow(static_cast<double>(j + 1), 1.0 + omega));
    return worst;
}

double sobolev_min_radius(const Eigen::VectorXd& seq, double omega) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < seq.size(); ++j)
        total += std::abs(seq[j]) * std::pow(static_cast<double>(j + 1), omega);
    return total;
}

MembershipReport check_membership(const PopulationPair& pop, const ParamSpaceSpec& spec) {
    pop.validate();
    spec.validate();
    const int j_model = pop.j_model();
    Eigen::VectorXd mu_sq(j_model), lam_max(j_model), mean_sep(j_model), cov_sep(j_model);
    for (int j = 0; j < j_model; ++j) {
        mu_sq[j] = std::max(pop.mu1[j] * pop.mu1[j], pop.mu2[j] * pop.mu2[j]);
        lam_max[j] = std::max(pop.lambda1[j], pop.lambda2[j]);
        const double d = pop.mu1[j] - pop.mu2[j];
        mean_sep[j] = d * d / pop.lambda2[j];
        const double r = pop.lambda1[j] / pop.lambda2[j] - 1.0;
        cov_sep[j] = r * r;
    }
    auto min_radius = [&](const Eigen::VectorXd& seq, double omega) {
        return spec.kind == SpaceKind::hyperrectangle ? hyperrectangle_min_radius(seq, omega)
                                                      : sobolev_min_radius(seq, omega);
    };
    MembershipReport report;
    const struct {
        const char* name;
        const Eigen::VectorXd* seq;
        double omega;
    } conds[] = {
        {"mu_sq_max", &mu_sq, spec.nu1},
        {"lambda_max", &lam_max, spec.nu1},
        {"mean_separation", &mean_sep, spec.nu2},
        {"cov_separation", &cov_sep, spec.nu2},
    };
    report.member = true;
    for (const auto& c : conds) {
        MembershipCondition mc;
        mc.name = c.name;
        mc.min_radius = min_radius(*c.seq, c.omega);
        mc.pass = mc.min_radius <= spec.radius;  // boundary inclusive
        report.member = report.member && mc.pass;
        report.conditions.push_back(std::move(mc));
    }
    report.prior_ok = pop.pi1 >= spec.c0 && pop.pi1 <= 1.0 - spec.c0 && pop.pi2 >= spec.c0 &&
                      pop.pi2 <= 1.0 - spec.c0;
    report.member = report.member && report.prior_ok;
    return report;
}

SeparationDiagnostics separation_diagnostics(const PopulationPair& pop) {
    SeparationDiagnostics d;
    for (int j = 0; j < pop.j_model(); ++j) {
        const double dm = pop.mu1[j] - pop.mu2[j];
        d.mean_sep += dm * dm / pop.lambda2[j];
        const double r = pop.lambda1[j] / pop.lambda2[j] - 1.0;
        d.cov_sep += r * r;
    }
    return d;
}

}  // namespace fdc
