#pragma once
// Bias-free two-layer ReLU network Φ(x) = Σ_j v_j · relu(w_jᵀx), trained
// with full-batch gradient descent on the logistic loss.

#include "flame/numerics/point_set.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace flame::classifier {

struct MlpModel {
    std::size_t input_dim = 0;
    std::size_t hidden = 0;
    PointSet first_layer;  // hidden × input_dim
    Vector second_layer;   // hidden

    std::size_t parameter_count() const noexcept { return hidden * input_dim + hidden; }

    /// First layer row-major, then the second layer.
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> theta);

    /// N(0, 1/√fan_in) weights for both layers.
    static MlpModel initialize(std::size_t input_dim, std::size_t hidden, std::uint64_t seed);
};

/// Φ(x).
double mlp_forward(const MlpModel& model, std::span<const double> x);

std::vector<double> mlp_forward_batch(const MlpModel& model, const PointSet& X);

struct LossGradient {
    double loss = 0.0;
    std::vector<double> gradient;  // same layout as MlpModel::parameters()
};

/// Mean logistic loss log(1 + exp(−y±·Φ(x))) with y± = 2y − 1, i.e. binary
/// cross-entropy on sigmoid(Φ). Labels are 0/1.
LossGradient mlp_loss_gradient(const MlpModel& model, const PointSet& X, std::span<const int> labels);

struct MlpOptions {
    std::size_t hidden = 16;
    std::size_t epochs = 2000;
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
};

struct MlpTrainResult {
    MlpModel model;
    std::vector<double> loss_trace;  // loss before each step, then the final loss
};

/// Throws DivergenceError when the loss becomes non-finite, SingleClassError
/// when only one class is present, ConfigError on bad options.
MlpTrainResult train_mlp(const PointSet& X, std::span<const int> labels, const MlpOptions& options);

/// Numerically stable log(1 + exp(z)).
double softplus(double z);

double sigmoid(double z);

}  // namespace flame::classifier
