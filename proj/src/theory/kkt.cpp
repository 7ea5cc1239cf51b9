#include "flame/theory/kkt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace flame::theory {

using classifier::SvmModel;

double KktReport::max_residual() const {
    return std::max({stationarity_residual, primal_violation, dual_violation, slackness_residual});
}

nlohmann::json to_json(const KktReport& r) {
    return {{"stationarity_residual", r.stationarity_residual},
            {"primal_violation", r.primal_violation},
            {"dual_violation", r.dual_violation},
            {"slackness_residual", r.slackness_residual},
            {"max_residual", r.max_residual()},
            {"tolerance", r.tolerance},
            {"passed", r.passed}};
}

KktReport evaluate_kkt(const KktSystem& s, double tolerance) {
    const std::size_t n = s.alpha.size();
    const bool soft = !s.xi.empty();
    KktReport r;
    r.tolerance = tolerance;

    double equality = 0.0;
    for (std::size_t i = 0; i < n; ++i) equality += s.alpha[i] * static_cast<double>(s.labels[i]);
    r.stationarity_residual = std::abs(equality) + s.weight_residual;

    for (std::size_t i = 0; i < n; ++i) {
        const double xi = soft ? s.xi[i] : 0.0;
        const double margin = static_cast<double>(s.labels[i]) * s.decision[i];
        r.primal_violation = std::max({r.primal_violation, 1.0 - xi - margin, -xi});
        r.dual_violation = std::max(r.dual_violation, -s.alpha[i]);
        r.slackness_residual = std::max(r.slackness_residual, std::abs(s.alpha[i] * (margin - 1.0 + xi)));
        if (soft) {
            r.dual_violation = std::max(r.dual_violation, -s.beta[i]);
            r.slackness_residual = std::max(r.slackness_residual, std::abs(s.beta[i] * xi));
        }
    }
    r.passed = r.max_residual() <= tolerance;
    return r;
}

double max_slack(const SvmModel& model, const PointSet& X, std::span<const int> labels) {
    double worst = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        worst = std::max(worst, 1.0 - static_cast<double>(labels[i]) * classifier::svm_decision(model, X.row(i)));
    }
    return worst;
}

namespace {

void require_training_shape(const SvmModel& model, const PointSet& X, std::span<const int> labels) {
    if (labels.size() != X.size() || model.training_size != X.size()) {
        throw DimensionError("KKT check needs the model's own training data",
                             {{"points", X.size()}, {"labels", labels.size()}, {"training_size", model.training_size}});
    }
}

}  // namespace

KktReport kkt_check_hard_margin(const SvmModel& model, const PointSet& X, std::span<const int> labels,
                                double tolerance) {
    if (model.kernel.kind != classifier::KernelKind::linear) {
        throw ConfigError("hard-margin KKT check needs a linear kernel");
    }
    require_training_shape(model, X, labels);
    for (double a : model.alphas) {
        if (a >= model.C) {
            throw NotSeparableError("a multiplier reached the box bound C; the data are not linearly separable",
                                    {{"C", model.C}});
        }
    }

    KktSystem s;
    s.alpha = model.full_alphas();
    s.labels.assign(labels.begin(), labels.end());
    // Rebuild w from the duals over the full training set and compare it with the stored expansion.
    const Vector w_model = classifier::linear_weights(model);
    Vector w(X.dim(), 0.0);
    for (std::size_t i = 0; i < X.size(); ++i) {
        const auto x = X.row(i);
        for (std::size_t d = 0; d < X.dim(); ++d) w[d] += s.alpha[i] * labels[i] * x[d];
    }
    double diff = 0.0;
    for (std::size_t d = 0; d < w.size(); ++d) diff += (w[d] - w_model[d]) * (w[d] - w_model[d]);
    s.weight_residual = std::sqrt(diff);

    s.decision.resize(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        const auto x = X.row(i);
        double f = model.bias;
        for (std::size_t d = 0; d < X.dim(); ++d) f += w[d] * x[d];
        s.decision[i] = f;
    }
    return evaluate_kkt(s, tolerance);
}

KktReport kkt_check_soft_margin(const SvmModel& model, const PointSet& X, std::span<const int> labels, double C,
                                double tolerance) {
    require_training_shape(model, X, labels);
    KktSystem s;
    s.alpha = model.full_alphas();
    s.labels.assign(labels.begin(), labels.end());
    s.decision = classifier::svm_decision_batch(model, X);
    s.xi.resize(X.size());
    s.beta.resize(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        s.xi[i] = std::max(0.0, 1.0 - labels[i] * s.decision[i]);
        s.beta[i] = C - s.alpha[i];
    }
    return evaluate_kkt(s, tolerance);
}

KktReport kkt_check_extended(const SvmModel& reduced, const PointSet& X, std::span<const int> labels,
                             std::span<const std::size_t> support, double C, double tolerance) {
    if (labels.size() != X.size()) throw DimensionError("label count differs from point count");
    if (reduced.training_size != support.size()) {
        throw DimensionError("reduced model was not trained on the given subset",
                             {{"subset", support.size()}, {"training_size", reduced.training_size}});
    }
    const auto reduced_alpha = reduced.full_alphas();
    KktSystem s;
    s.alpha.assign(X.size(), 0.0);
    s.labels.assign(labels.begin(), labels.end());
    s.decision = classifier::svm_decision_batch(reduced, X);
    s.xi.assign(X.size(), 0.0);
    s.beta.assign(X.size(), C);
    for (std::size_t k = 0; k < support.size(); ++k) {
        const std::size_t i = support[k];
        if (i >= X.size()) throw DimensionError("subset index " + std::to_string(i) + " out of range");
        s.alpha[i] = reduced_alpha[k];
        s.xi[i] = std::max(0.0, 1.0 - labels[i] * s.decision[i]);
        s.beta[i] = C - s.alpha[i];
    }
    return evaluate_kkt(s, tolerance);
}

}  // namespace flame::theory
