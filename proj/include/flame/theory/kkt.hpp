#pragma once
// KKT residual reports for trained SVM models.

#include "flame/classifier/svm.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <vector>

namespace flame::theory {

struct KktReport {
    double stationarity_residual = 0.0;  // |Σ α_i y_i| plus ‖w − Σ α_i y_i x_i‖ when w is explicit
    double primal_violation = 0.0;       // max(1 − ξ_i − y_i f(x_i), ξ_i < 0)
    double dual_violation = 0.0;         // max negative α_i or β_i
    double slackness_residual = 0.0;     // max |α_i (y_i f(x_i) − 1 + ξ_i)| and |β_i ξ_i|
    double tolerance = 0.0;
    bool passed = false;

    double max_residual() const;
    /// Re-evaluates `passed` at another tolerance.
    bool passes_at(double tol) const { return max_residual() <= tol; }
};

nlohmann::json to_json(const KktReport& r);

/// Multipliers and slacks for every training point, plus the decision values
/// they are checked against.
struct KktSystem {
    std::vector<double> alpha;
    std::vector<double> beta;  // empty for the hard-margin system
    std::vector<double> xi;    // empty for the hard-margin system
    std::vector<double> decision;
    std::vector<int> labels;
    double weight_residual = 0.0;  // ‖w − Σ α_i y_i x_i‖ where an explicit w exists
};

KktReport evaluate_kkt(const KktSystem& system, double tolerance);

/// Largest slack max(0, 1 − y_i f(x_i)) of the model on its training data.
double max_slack(const classifier::SvmModel& model, const PointSet& X, std::span<const int> labels);

/// Hard-margin system: stationarity, primal and dual feasibility and
/// complementary slackness with w rebuilt from the duals. Linear kernels
/// only (ConfigError otherwise). NotSeparableError when a multiplier sits at
/// the box bound C, which only happens when the data are not separable.
KktReport kkt_check_hard_margin(const classifier::SvmModel& model, const PointSet& X, std::span<const int> labels,
                                double tolerance = 1e-4);

/// Soft-margin system with ξ_i = max(0, 1 − y_i f(x_i)) and β_i = C − α_i.
KktReport kkt_check_soft_margin(const classifier::SvmModel& model, const PointSet& X, std::span<const int> labels,
                                double C, double tolerance = 1e-3);

/// Checks a model trained on the subset `support` (indices into X) against the
/// full data after extending its multipliers with α_i = 0, β_i = C, ξ_i = 0
/// for every point outside the subset.
KktReport kkt_check_extended(const classifier::SvmModel& reduced, const PointSet& X, std::span<const int> labels,
                             std::span<const std::size_t> support, double C, double tolerance = 1e-3);

}  // namespace flame::theory
