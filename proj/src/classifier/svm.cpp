#include "flame/classifier/svm.hpp"

#include "flame/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace flame::classifier {

void KernelSpec::validate() const {
    if (kind == KernelKind::rbf && !(gamma > 0.0 && std::isfinite(gamma))) {
        throw ConfigError("rbf kernel needs gamma > 0", {{"field", "svm_gamma"}, {"value", gamma}});
    }
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw DimensionError("kernel arguments differ in dimension: " + std::to_string(x.size()) + " vs " +
                             std::to_string(y.size()));
    }
    const auto& k = simd::kernels();
    if (spec.kind == KernelKind::linear) return k.dot(x.data(), y.data(), x.size());
    return std::exp(-spec.gamma * k.squared_distance(x.data(), y.data(), x.size()));
}

double default_gamma(const PointSet& X) {
    const auto& k = simd::kernels();
    std::vector<double> d;
    d.reserve(X.size() * (X.size() - (X.size() > 0 ? 1 : 0)) / 2);
    for (std::size_t i = 0; i < X.size(); ++i) {
        for (std::size_t j = i + 1; j < X.size(); ++j) d.push_back(k.squared_distance(X.row(i).data(), X.row(j).data(), X.dim()));
    }
    const double dim = static_cast<double>(std::max<std::size_t>(X.dim(), 1));
    if (d.empty()) return 1.0 / dim;
    auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    double median = *mid;
    if (d.size() % 2 == 0) median = 0.5 * (median + *std::max_element(d.begin(), mid));
    return median > 0.0 ? 1.0 / (dim * median) : 1.0 / dim;
}

std::vector<double> SvmModel::full_alphas() const {
    std::vector<double> out(training_size, 0.0);
    for (std::size_t s = 0; s < support_indices.size(); ++s) out[support_indices[s]] = alphas[s];
    return out;
}

namespace {

constexpr double kTau = 1e-12;

double dual_objective(const std::vector<double>& alpha, const std::vector<double>& grad) {
    // f(α) = ½αᵀQα − eᵀα with G = Qα − e gives f = ½ Σ α_i (G_i − 1); the dual objective is −f.
    double f = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) f += alpha[i] * (grad[i] - 1.0);
    return -0.5 * f;
}

}  // namespace

SvmModel train_svm(const PointSet& X, std::span<const int> labels, double C, const KernelSpec& kernel,
                   const SmoOptions& options) {
    const std::size_t n = X.size();
    if (labels.size() != n) {
        throw DimensionError("got " + std::to_string(labels.size()) + " labels for " + std::to_string(n) + " points");
    }
    if (!(C > 0.0) || !std::isfinite(C)) throw ConfigError("C must be positive", {{"field", "svm_c"}, {"value", C}});
    kernel.validate();
    std::size_t positives = 0;
    for (int y : labels) {
        if (y != 1 && y != -1) throw FormatError("SVM labels must be +1 or -1", {{"label", y}});
        positives += y == 1;
    }
    if (n < 2 || positives == 0 || positives == n) {
        throw SingleClassError("SVM training needs both classes", {{"positives", positives}, {"negatives", n - positives}});
    }

    // Dense Gram matrix; the few-shot and verification workloads stay small.
    std::vector<double> gram(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = kernel_eval(kernel, X.row(i), X.row(j));
            gram[i * n + j] = v;
            gram[j * n + i] = v;
        }
    }
    const auto Q = [&](std::size_t i, std::size_t j) {
        return static_cast<double>(labels[i] * labels[j]) * gram[i * n + j];
    };

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);

    const auto in_up = [&](std::size_t t) { return labels[t] == 1 ? alpha[t] < C : alpha[t] > 0.0; };
    const auto in_low = [&](std::size_t t) { return labels[t] == 1 ? alpha[t] > 0.0 : alpha[t] < C; };

    SvmModel model;
    model.kernel = kernel;
    model.C = C;
    model.dim = X.dim();
    model.training_size = n;
    if (options.record_objective) model.objective_trace.push_back(0.0);

    double violation = std::numeric_limits<double>::infinity();
    std::size_t updates = 0;
    for (;;) {
        std::size_t i = n;
        std::size_t j = n;
        double m = -std::numeric_limits<double>::infinity();
        double M = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -static_cast<double>(labels[t]) * grad[t];
            if (in_up(t) && v > m) {
                m = v;
                i = t;
            }
            if (in_low(t) && v < M) {
                M = v;
                j = t;
            }
        }
        violation = (i == n || j == n) ? 0.0 : m - M;
        if (violation < options.tolerance) break;
        if (updates >= options.max_updates) {
            throw ConvergenceError("SMO did not converge within " + std::to_string(options.max_updates) + " pair updates",
                                   {{"final_violation", violation}, {"updates", updates}});
        }

        const double old_ai = alpha[i];
        const double old_aj = alpha[j];
        const double qii = gram[i * n + i];
        const double qjj = gram[j * n + j];
        if (labels[i] != labels[j]) {
            double quad = qii + qjj + 2.0 * Q(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
            } else {
                if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
            }
            if (diff > 0.0) {
                if (alpha[i] > C) { alpha[i] = C; alpha[j] = C - diff; }
            } else {
                if (alpha[j] > C) { alpha[j] = C; alpha[i] = C + diff; }
            }
        } else {
            double quad = qii + qjj - 2.0 * Q(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) { alpha[i] = C; alpha[j] = sum - C; }
            } else {
                if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
            }
            if (sum > C) {
                if (alpha[j] > C) { alpha[j] = C; alpha[i] = sum - C; }
            } else {
                if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
            }
        }

        const double dai = alpha[i] - old_ai;
        const double daj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t) grad[t] += Q(i, t) * dai + Q(j, t) * daj;
        ++updates;
        if (options.record_objective) model.objective_trace.push_back(dual_objective(alpha, grad));
    }

    // Bias from free support vectors; midpoint of the feasible interval otherwise.
    double upper = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = static_cast<double>(labels[t]) * grad[t];
        if (alpha[t] >= C) {
            if (labels[t] == -1) upper = std::min(upper, yg);
            else lower = std::max(lower, yg);
        } else if (alpha[t] <= 0.0) {
            if (labels[t] == 1) upper = std::min(upper, yg);
            else lower = std::max(lower, yg);
        } else {
            free_sum += yg;
            ++free_count;
        }
    }
    const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (upper + lower);
    model.bias = -rho;
    model.updates = updates;
    model.final_violation = violation;

    model.support_vectors = PointSet(0, X.dim());
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > options.support_tolerance) {
            model.support_vectors.push_back(X.row(t));
            model.support_labels.push_back(labels[t]);
            model.alphas.push_back(alpha[t]);
            model.support_indices.push_back(t);
        }
    }
    return model;
}

double svm_decision(const SvmModel& model, std::span<const double> x) {
    if (x.size() != model.dim) {
        throw DimensionError("decision input has dimension " + std::to_string(x.size()) + ", model expects " +
                             std::to_string(model.dim));
    }
    const auto& k = simd::kernels();
    const std::size_t s = model.support_count();
    std::vector<double> coef(s);
    for (std::size_t i = 0; i < s; ++i) coef[i] = model.alphas[i] * static_cast<double>(model.support_labels[i]);

    if (model.kernel.kind == KernelKind::linear) {
        double acc = 0.0;
        for (std::size_t i = 0; i < s; ++i) acc += coef[i] * k.dot(model.support_vectors.row(i).data(), x.data(), x.size());
        return acc + model.bias;
    }
    std::vector<double> d2(s);
    for (std::size_t i = 0; i < s; ++i) d2[i] = k.squared_distance(model.support_vectors.row(i).data(), x.data(), x.size());
    return k.exp_weighted_sum(d2.data(), coef.data(), s, model.kernel.gamma) + model.bias;
}

std::vector<double> svm_decision_batch(const SvmModel& model, const PointSet& X) {
    std::vector<double> out(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) out[i] = svm_decision(model, X.row(i));
    return out;
}

Vector linear_weights(const SvmModel& model) {
    if (model.kernel.kind != KernelKind::linear) throw ConfigError("weight vector requested for a non-linear kernel");
    Vector w(model.dim, 0.0);
    for (std::size_t i = 0; i < model.support_count(); ++i) {
        const double c = model.alphas[i] * static_cast<double>(model.support_labels[i]);
        const auto sv = model.support_vectors.row(i);
        for (std::size_t d = 0; d < model.dim; ++d) w[d] += c * sv[d];
    }
    return w;
}

}  // namespace flame::classifier
