#include "flame/theory/homogeneous.hpp"

#include "flame/theory/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flame::theory {

using classifier::MlpModel;

namespace {

double squared_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

double accuracy(const MlpModel& model, const PointSet& X, std::span<const int> labels) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < X.size(); ++i) ok += (classifier::mlp_forward(model, X.row(i)) > 0.0) == (labels[i] == 1);
    return X.empty() ? 1.0 : static_cast<double>(ok) / static_cast<double>(X.size());
}

MlpModel scaled(const MlpModel& model, double c) {
    auto theta = model.parameters();
    for (auto& t : theta) t *= c;
    MlpModel out = model;
    out.set_parameters(theta);
    return out;
}

}  // namespace

HomogeneousTrainResult train_homogeneous(const PointSet& X, std::span<const int> labels,
                                         const HomogeneousOptions& options) {
    if (options.hidden == 0 || options.growth_interval == 0 || !(options.learning_rate > 0.0)) {
        throw ConfigError("homogeneous run needs positive hidden width, growth interval and learning rate");
    }
    HomogeneousTrainResult out;
    out.model = MlpModel::initialize(X.dim(), options.hidden, options.seed);
    auto theta = out.model.parameters();
    auto lg = classifier::mlp_loss_gradient(out.model, X, labels);
    const double initial_loss = lg.loss;
    double lr = options.learning_rate;
    out.loss_trace.push_back(lg.loss);

    MlpModel trial = out.model;
    std::vector<double> next(theta.size());
    for (std::size_t step = 1; step <= options.steps; ++step) {
        for (;;) {
            for (std::size_t p = 0; p < theta.size(); ++p) next[p] = theta[p] - lr * lg.gradient[p];
            trial.set_parameters(next);
            auto candidate = classifier::mlp_loss_gradient(trial, X, labels);
            if (!std::isfinite(candidate.loss)) throw DivergenceError("loss became non-finite", {{"step", step}});
            if (candidate.loss <= lg.loss || lr < 1e-300) {
                theta.swap(next);
                lg = std::move(candidate);
                break;
            }
            lr *= 0.5;
        }
        if (step % options.growth_interval == 0) {
            out.loss_trace.push_back(lg.loss);
            const double ratio = lg.loss > 0.0 ? initial_loss / lg.loss : options.max_growth;
            lr = std::max(lr, options.learning_rate * std::min(ratio, options.max_growth));
        }
        if (lg.loss == 0.0) break;
    }
    out.model.set_parameters(theta);
    out.final_learning_rate = lr;
    return out;
}

std::vector<double> normalized_margins(const MlpModel& model, const PointSet& X, std::span<const int> labels) {
    const double norm_l = std::pow(squared_norm(model.parameters()), kNetworkDegree / 2.0);
    std::vector<double> out(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double y = labels[i] == 1 ? 1.0 : -1.0;
        out[i] = y * classifier::mlp_forward(model, X.row(i)) / norm_l;
    }
    return out;
}

std::vector<std::size_t> inferred_support(std::span<const double> margins, double margin_tol) {
    if (margins.empty()) return {};
    const double lo = *std::min_element(margins.begin(), margins.end());
    const double cut = lo >= 0.0 ? lo * (1.0 + margin_tol) : lo * (1.0 - margin_tol);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < margins.size(); ++i) {
        if (margins[i] <= cut) out.push_back(i);
    }
    return out;
}

double homogeneity_error(const MlpModel& model, const PointSet& X, std::span<const double> scales) {
    double worst = 0.0;
    for (double c : scales) {
        const MlpModel m = scaled(model, c);
        const double factor = std::pow(c, kNetworkDegree);
        for (std::size_t i = 0; i < X.size(); ++i) {
            const double expect = factor * classifier::mlp_forward(model, X.row(i));
            const double got = classifier::mlp_forward(m, X.row(i));
            if (expect == 0.0) {
                worst = std::max(worst, std::abs(got));
            } else {
                worst = std::max(worst, std::abs(got - expect) / std::abs(expect));
            }
        }
    }
    return worst;
}

double margin_scale_error(const MlpModel& model, const PointSet& X, std::span<const int> labels,
                          std::span<const double> scales) {
    const auto base = normalized_margins(model, X, labels);
    double worst = 0.0;
    for (double c : scales) {
        const auto m = normalized_margins(scaled(model, c), X, labels);
        for (std::size_t i = 0; i < m.size(); ++i) {
            worst = std::max(worst, std::abs(m[i] - base[i]) / std::max(std::abs(base[i]), 1e-300));
        }
    }
    return worst;
}

nlohmann::json to_json(const HomogeneousRunReport& r) {
    return {{"normalized_margins", r.normalized_margins},
            {"inferred_support_set", r.inferred_support_set},
            {"direction_cosine", r.direction_cosine},
            {"prediction_agreement", r.prediction_agreement},
            {"probe_count", r.probe_count},
            {"training_accuracy", r.training_accuracy},
            {"support_training_accuracy", r.support_training_accuracy},
            {"homogeneity_error", r.homogeneity_error},
            {"final_loss", r.final_loss}};
}

HomogeneousRunReport homogeneous_gradient_flow_experiment(const PointSet& X, std::span<const int> labels,
                                                          const HomogeneousOptions& options) {
    const auto full = train_homogeneous(X, labels, options);
    HomogeneousRunReport r;
    r.training_accuracy = accuracy(full.model, X, labels);
    if (r.training_accuracy < 1.0) {
        throw NotSeparableError("network did not separate the training data",
                                {{"training_accuracy", r.training_accuracy}});
    }
    r.final_loss = full.loss_trace.back();
    r.normalized_margins = normalized_margins(full.model, X, labels);
    r.inferred_support_set = inferred_support(r.normalized_margins, options.margin_tol);

    const PointSet XS = X.subset(r.inferred_support_set);
    std::vector<int> yS;
    for (auto i : r.inferred_support_set) yS.push_back(labels[i]);
    const auto reduced = train_homogeneous(XS, yS, options);
    r.support_training_accuracy = accuracy(reduced.model, XS, yS);

    const auto a = full.model.parameters();
    const auto b = reduced.model.parameters();
    double dot = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) dot += a[p] * b[p];
    r.direction_cosine = dot / std::sqrt(squared_norm(a) * squared_norm(b));

    const PointSet probes = probe_set(X, 50, 0.2, options.seed);
    r.probe_count = probes.size();
    r.prediction_agreement = sign_agreement(classifier::mlp_forward_batch(full.model, probes),
                                            classifier::mlp_forward_batch(reduced.model, probes));
    const double scales[] = {0.5, 2.0, 10.0};
    r.homogeneity_error = homogeneity_error(full.model, X, scales);
    return r;
}

}  // namespace flame::theory
