#pragma once

#include "flame/numerics/point_set.hpp"
#include "flame/sampler/config.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace flame::classifier {

using sampler::KernelKind;

struct KernelSpec {
    KernelKind kind = KernelKind::rbf;
    double gamma = 1.0;  // rbf only

    static KernelSpec linear() { return {KernelKind::linear, 0.0}; }
    static KernelSpec rbf(double gamma) { return {KernelKind::rbf, gamma}; }

    /// ConfigError when an rbf kernel has a non-positive gamma.
    void validate() const;

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// linear: xᵀy; rbf: exp(−γ‖x − y‖²). DimensionError on size mismatch.
double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

/// 1 / (dim · median pairwise squared distance); 1/dim if the median is 0.
double default_gamma(const PointSet& X);

struct SmoOptions {
    double tolerance = 1e-5;                // stop when the maximal KKT violation drops below this
    std::size_t max_updates = 1'000'000;    // pair updates before ConvergenceError
    double support_tolerance = 1e-8;        // α above this marks a support vector
    bool record_objective = false;          // fill SvmModel::objective_trace (O(n) per update)
};

/// Soft-margin SVM dual solution. Only support vectors (α > support
/// tolerance) are stored; every other training multiplier is zero.
struct SvmModel {
    KernelSpec kernel;
    double C = 1.0;
    double bias = 0.0;
    std::size_t dim = 0;
    std::size_t training_size = 0;

    PointSet support_vectors;
    std::vector<int> support_labels;             // ±1
    std::vector<double> alphas;                  // in (0, C]
    std::vector<std::size_t> support_indices;    // positions in the training data, ascending

    std::size_t updates = 0;
    double final_violation = 0.0;
    std::vector<double> objective_trace;  // dual objective Σα − ½αᵀQα after each update

    std::size_t support_count() const noexcept { return alphas.size(); }

    /// Multipliers for all training points (zeros outside the support set).
    std::vector<double> full_alphas() const;
};

/// SMO with maximal-violating-pair working set selection. Labels must be ±1
/// and both classes present (SingleClassError otherwise). Throws
/// ConvergenceError carrying the final violation when `max_updates` runs out.
/// The solver is deterministic; no randomness is involved.
SvmModel train_svm(const PointSet& X, std::span<const int> labels, double C, const KernelSpec& kernel,
                   const SmoOptions& options = {});

/// Σ α_i y_i k(x_i, x) + b.
double svm_decision(const SvmModel& model, std::span<const double> x);

std::vector<double> svm_decision_batch(const SvmModel& model, const PointSet& X);

/// w = Σ α_i y_i x_i (linear kernels only; ConfigError otherwise).
Vector linear_weights(const SvmModel& model);

}  // namespace flame::classifier
