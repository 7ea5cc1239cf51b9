#pragma once
// Gradient-descent experiment on the bias-free ReLU network, which is
// positively homogeneous of degree 2 in its parameters.

#include "flame/classifier/mlp.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace flame::theory {

inline constexpr int kNetworkDegree = 2;

struct HomogeneousOptions {
    std::size_t hidden = 16;
    std::size_t steps = 50000;
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
    double margin_tol = 0.1;
    std::size_t growth_interval = 500;  // steps between loss-based learning-rate updates
    double max_growth = 1e6;            // cap on lr / learning_rate
};

struct HomogeneousTrainResult {
    classifier::MlpModel model;
    std::vector<double> loss_trace;  // sampled every growth_interval steps
    double final_learning_rate = 0.0;
};

/// Gradient descent on the mean logistic loss. Every `growth_interval` steps
/// the step size is reset to learning_rate · (initial loss / current loss),
/// capped at max_growth, so progress does not stall as the loss decays. A
/// step that raises the loss is undone and the step size halved.
HomogeneousTrainResult train_homogeneous(const PointSet& X, std::span<const int> labels,
                                         const HomogeneousOptions& options);

/// y_i Φ(θ; x_i) / ‖θ‖^2 with y_i ∈ {−1, +1} derived from 0/1 labels.
std::vector<double> normalized_margins(const classifier::MlpModel& model, const PointSet& X,
                                       std::span<const int> labels);

/// Indices whose normalized margin is within (1 + margin_tol) of the minimum.
std::vector<std::size_t> inferred_support(std::span<const double> margins, double margin_tol);

/// Largest |Φ(cθ; x) − c²Φ(θ; x)| / |c²Φ(θ; x)| over the given points and scales.
double homogeneity_error(const classifier::MlpModel& model, const PointSet& X, std::span<const double> scales);

/// Largest change of any normalized margin when θ is rescaled by each c.
double margin_scale_error(const classifier::MlpModel& model, const PointSet& X, std::span<const int> labels,
                          std::span<const double> scales);

struct HomogeneousRunReport {
    std::vector<double> normalized_margins;
    std::vector<std::size_t> inferred_support_set;
    double direction_cosine = 0.0;
    double prediction_agreement = 0.0;
    std::size_t probe_count = 0;
    double training_accuracy = 0.0;
    double support_training_accuracy = 0.0;
    double homogeneity_error = 0.0;
    double final_loss = 0.0;
};

nlohmann::json to_json(const HomogeneousRunReport& r);

/// Trains on all data, infers the support set from normalized margins,
/// retrains on it from the same initialization and compares the two networks
/// on the probe grid. NotSeparableError if the full run misclassifies any
/// training point.
HomogeneousRunReport homogeneous_gradient_flow_experiment(const PointSet& X, std::span<const int> labels,
                                                          const HomogeneousOptions& options = {});

}  // namespace flame::theory
