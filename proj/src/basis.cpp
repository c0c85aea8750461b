#include "fdc/basis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fdc {

const char* basis_name(BasisKind kind) {
    switch (kind) {
        case BasisKind::fourier: return "fourier";
        case BasisKind::log_poly: return "log_poly";
        case BasisKind::sin_log_poly: return "sin_log_poly";
    }
    return "?";
}

BasisKind basis_from_name(const std::string& name) {
    if (name == "fourier") return BasisKind::fourier;
    if (name == "log_poly") return BasisKind::log_poly;
    if (name == "sin_log_poly") return BasisKind::sin_log_poly;
    throw std::invalid_argument("unknown basis: " + name);
}

int basis_dimension(BasisKind kind) {
    switch (kind) {
        case BasisKind::fourier: return 0;
        case BasisKind::log_poly: return 3;
        case BasisKind::sin_log_poly: return 4;
    }
    return 0;
}

double fourier_eval(int j, double t) {
    if (j < 1) throw std::invalid_argument("fourier_eval: index must be >= 1");
    if (j == 1) return 1.0;
    const int m = j / 2;
    const double a = 2.0 * M_PI * m * t;
    return std::sqrt(2.0) * (j % 2 == 0 ? std::cos(a) : std::sin(a));
}

double basis_eval(BasisKind kind, int j, double t) {
    if (j < 1) throw std::invalid_argument("basis_eval: index must be >= 1");
    switch (kind) {
        case BasisKind::fourier:
            return fourier_eval(j, t);
        case BasisKind::log_poly:
            switch (j) {
                case 1: return std::log(t + 2.0);
                case 2: return t;
                case 3: return t * t * t;
            }
            break;
        case BasisKind::sin_log_poly:
            switch (j) {
                case 1: return std::sin(2.0 * M_PI * t);
                case 2: return std::log(t + 2.0);
                case 3: return t;
                case 4: return t * t * t;
            }
            break;
    }
    throw std::invalid_argument("basis_eval: index " + std::to_string(j) + " out of range for " +
                                basis_name(kind));
}

const char* grid_name(GridKind kind) {
    return kind == GridKind::offset ? "offset" : "inclusive";
}

GridKind grid_from_name(const std::string& name) {
    if (name == "offset") return GridKind::offset;
    if (name == "inclusive") return GridKind::inclusive;
    throw std::invalid_argument("unknown grid kind: " + name);
}

Eigen::VectorXd make_grid(int m_count, GridKind kind) {
    if (m_count < 1) throw std::invalid_argument("make_grid: M must be >= 1");
    Eigen::VectorXd t(m_count);
    if (kind == GridKind::offset) {
        for (int m = 0; m < m_count; ++m) t[m] = static_cast<double>(m) / m_count;
    } else {
        if (m_count == 1) {
            t[0] = 0.0;
        } else {
            for (int m = 0; m < m_count; ++m)
                t[m] = static_cast<double>(m) / (m_count - 1);
        }
    }
    return t;
}

DesignMatrix build_design_on_grid(const Eigen::VectorXd& grid, int j_count, BasisKind kind) {
    const int m_count = static_cast<int>(grid.size());
    if (j_count < 1 || j_count > m_count)
        throw std::invalid_argument("build_design: need 1 <= J <= M");
    const int dim = basis_dimension(kind);
    if (dim > 0 && j_count > dim)
        throw std::invalid_argument("build_design: J exceeds basis dimension");
    DesignMatrix d;
    d.b.resize(m_count, j_count);
    for (int m = 0; m < m_count; ++m)
        for (int j = 0; j < j_count; ++j) d.b(m, j) = basis_eval(kind, j + 1, grid[m]);
    d.grid = grid;
    d.j_count = j_count;
    d.kind = kind;
    return d;
}

DesignMatrix build_design(int m_count, int j_count, BasisKind kind) {
    return build_design_on_grid(make_grid(m_count, GridKind::offset), j_count, kind);
}

const char* projection_name(ProjectionMode mode) {
    return mode == ProjectionMode::paper_faithful ? "paper_faithful" : "least_squares";
}

ProjectionMode projection_from_name(const std::string& name) {
    if (name == "paper_faithful") return ProjectionMode::paper_faithful;
    if (name == "least_squares") return ProjectionMode::least_squares;
    throw std::invalid_argument("unknown projection mode: " + name);
}

Eigen::VectorXd project_scores(const Eigen::VectorXd& grid_values, const DesignMatrix& design,
                               ProjectionMode mode) {
    if (grid_values.size() != design.b.rows())
        throw std::invalid_argument("project_scores: curve length does not match design grid");
    if (mode == ProjectionMode::paper_faithful)
        return design.b.transpose() * grid_values / static_cast<double>(design.b.rows());
    return design.b.colPivHouseholderQr().solve(grid_values);
}

Eigen::MatrixXd project_scores_rows(const Eigen::MatrixXd& curves, const DesignMatrix& design,
                                    ProjectionMode mode) {
    if (curves.cols() != design.b.rows())
        throw std::invalid_argument("project_scores_rows: curve length does not match design grid");
    if (mode == ProjectionMode::paper_faithful)
        return curves * design.b / static_cast<double>(design.b.rows());
    // solve once, reuse factorization across curves
    const auto qr = design.b.colPivHouseholderQr();
    Eigen::MatrixXd out(curves.rows(), design.j_count);
    for (Eigen::Index i = 0; i < curves.rows(); ++i)
        out.row(i) = qr.solve(curves.row(i).transpose()).transpose();
    return out;
}

}  // namespace fdc
