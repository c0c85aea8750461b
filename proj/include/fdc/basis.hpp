#pragma once

#include <Eigen/Dense>

#include "fdc/errors.hpp"

namespace fdc {

/// Expansion bases used by the population presets. `fourier` is the
/// trigonometric basis of the sampled-data theory; the other two are the
/// fixed function sets the simulation models expand in.
enum class BasisKind {
    fourier,        // 1, sqrt2 cos(2pi t), sqrt2 sin(2pi t), sqrt2 cos(4pi t), ...
    log_poly,       // log(t+2), t, t^3
    sin_log_poly,   // sin(2pi t), log(t+2), t, t^3
};

const char* basis_name(BasisKind kind);
BasisKind basis_from_name(const std::string& name);

/// Number of functions in a finite basis; 0 means unbounded (Fourier).
int basis_dimension(BasisKind kind);

/// Fourier basis function, 1-based index. psi_1 = 1, psi_{2m} = sqrt2 cos(2m pi t),
/// psi_{2m+1} = sqrt2 sin(2m pi t). Rejects j < 1.
double fourier_eval(int j, double t);

/// Evaluate basis function j (1-based) of the given family at t.
double basis_eval(BasisKind kind, int j, double t);

enum class GridKind {
    offset,     // t_m = (m-1)/M — exact discrete Fourier orthogonality
    inclusive,  // t_m = (m-1)/(M-1) — endpoints 0 and 1 included
};

const char* grid_name(GridKind kind);
GridKind grid_from_name(const std::string& name);

Eigen::VectorXd make_grid(int m_count, GridKind kind);

/// M x J matrix of basis values on a sampling grid, entry (m, j) = psi_j(t_m).
struct DesignMatrix {
    Eigen::MatrixXd b;
    Eigen::VectorXd grid;
    int j_count = 0;
    BasisKind kind = BasisKind::fourier;
};

/// Design on the offset grid t_m = (m-1)/M. Requires 1 <= J <= M; for the
/// Fourier basis with J < M this satisfies B^T B = M I_J to 1e-9.
DesignMatrix build_design(int m_count, int j_count, BasisKind kind);

/// Design on an arbitrary grid (inclusive-grid experiments, CSV datasets).
DesignMatrix build_design_on_grid(const Eigen::VectorXd& grid, int j_count, BasisKind kind);

enum class ProjectionMode {
    paper_faithful,  // zeta = M^-1 B^T x; unbiased only for grid-orthonormal bases
    least_squares,   // (B^T B)^-1 B^T x
};

const char* projection_name(ProjectionMode mode);
ProjectionMode projection_from_name(const std::string& name);

/// Score estimate for one curve sampled on the design's grid.
Eigen::VectorXd project_scores(const Eigen::VectorXd& grid_values, const DesignMatrix& design,
                               ProjectionMode mode = ProjectionMode::paper_faithful);

/// Row-wise projection of a curve matrix (rows = curves sampled on the grid).
Eigen::MatrixXd project_scores_rows(const Eigen::MatrixXd& curves, const DesignMatrix& design,
                                    ProjectionMode mode = ProjectionMode::paper_faithful);

inline constexpr double kOrthoTol = 1e-9;
inline constexpr double kRecoveryTol = 1e-9;

}  // namespace fdc
