#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "fdc/oracle.hpp"
#include "fdc/rng.hpp"

namespace fdc {

/// Sparse feedforward ReLU architecture F(L, J, p, s, B).
struct NetArch {
    int depth = 1;                 // hidden-layer count L
    int input_dim = 1;             // J
    std::vector<int> widths;       // p_0 = J, p_1..p_L, p_{L+1} = 1
    std::int64_t sparsity = 1;     // s: max nonzero parameters, >= L+1
    double weight_bound = 1.0;     // B: max |weight or shift|

    static NetArch uniform(int depth, int input_dim, int width, std::int64_t sparsity,
                           double weight_bound);
    std::int64_t parameter_count() const;
    void validate() const;
};

enum class ArchMode { theory51, theory52, practical6 };

/// Architecture scalings: the fully-observed theorem (unit constants), the
/// sampled-data theorem with critical frequency M* = (n/log^4 n)^{1/nu1}, and
/// the practical tuning rules (natural log, ceilings applied after).
NetArch size_arch(ArchMode mode, int n, std::optional<int> m, double nu2,
                  std::optional<double> nu1 = std::nullopt, int c = 1);

struct TrainConfig {
    int epochs = 200;
    int batch = 32;
    double lr = 1e-2;
    double lr_decay = 0.5;       // multiplier on plateau
    int plateau_patience = 10;   // epochs without improvement before decay
    int projection_period = 10;  // epochs between top-s projections
    std::uint64_t seed = 0;
    void validate() const;
};

/// Network state: weights W_0..W_L (W_l maps p_l -> p_{l+1}) and shifts
/// V_1..V_L. Forward output is clamped to [-1, 1].
struct DnnModel {
    NetArch arch;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> shifts;

    double forward(const Eigen::VectorXd& z) const;
    Eigen::VectorXd forward_batch(const Eigen::MatrixXd& z_rows) const;
    std::int64_t nonzero_count() const;
    double max_abs_param() const;
};

double hinge(double x);  // (1 - x)_+

DnnModel init_net(const NetArch& arch, RngStream& rng);

/// Mean hinge loss over (X rows, y in {+1,-1}) and, when grads != nullptr, its
/// subgradient (0 at the hinge and ReLU kinks; clamp treated as identity
/// inside (-1,1), zero outside).
struct Gradients {
    std::vector<Eigen::MatrixXd> d_weights;
    std::vector<Eigen::VectorXd> d_shifts;
};

double hinge_loss(const DnnModel& model, const Eigen::MatrixXd& x_rows, const Eigen::VectorXi& y,
                  Gradients* grads = nullptr);

/// Zero all but the s largest-magnitude parameters (deterministic tie-break).
void project_top_s(DnnModel& model, std::int64_t s);

struct TrainResult {
    DnnModel model;
    std::vector<double> best_loss_trace;  // best-so-far full-data loss per epoch
    double final_loss = 0.0;
    int epochs_run = 0;
};

/// Mini-batch projected subgradient descent on mean hinge loss. Labels: class 1
/// -> +1, class 2 -> -1. Weights clipped to [-B, B] after every step; top-s
/// projection every projection_period epochs and at termination; returns the
/// best-running-loss parameter state. Throws NumericalError on divergence.
TrainResult train(const Eigen::MatrixXd& x_rows, const Eigen::VectorXi& y, const NetArch& arch,
                  const TrainConfig& cfg);

/// Class 1 iff forward >= 0.
int classify_dnn(const DnnModel& model, const Eigen::VectorXd& z);

RiskEstimate dnn_risk(const DnnModel& model, const Eigen::MatrixXd& test_scores,
                      const Eigen::VectorXi& labels, int threads = 1);

/// Versioned text serialization (dimension header + row-major blocks, decimal).
void save_dnn(const DnnModel& model, std::ostream& os);
DnnModel load_dnn(std::istream& is);

}  // namespace fdc
