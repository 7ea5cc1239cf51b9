#include "flame/classifier/mlp.hpp"

#include "flame/numerics/random.hpp"
#include "flame/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace flame::classifier {

double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<double> MlpModel::parameters() const {
    std::vector<double> theta(first_layer.data().begin(), first_layer.data().end());
    theta.insert(theta.end(), second_layer.begin(), second_layer.end());
    return theta;
}

void MlpModel::set_parameters(std::span<const double> theta) {
    if (theta.size() != parameter_count()) {
        throw DimensionError("parameter vector has " + std::to_string(theta.size()) + " entries, expected " +
                             std::to_string(parameter_count()));
    }
    PointSet w(hidden, input_dim);
    std::copy(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(hidden * input_dim), w.data().begin());
    first_layer = std::move(w);
    second_layer.assign(theta.end() - static_cast<std::ptrdiff_t>(hidden), theta.end());
}

MlpModel MlpModel::initialize(std::size_t input_dim, std::size_t hidden, std::uint64_t seed) {
    if (input_dim == 0 || hidden == 0) throw ConfigError("network needs non-zero input and hidden sizes");
    numerics::Rng rng(seed, 0x6d6c70ULL);
    MlpModel m;
    m.input_dim = input_dim;
    m.hidden = hidden;
    m.first_layer = PointSet(hidden, input_dim);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
    for (auto& w : m.first_layer.data()) w = rng.normal(0.0, s1);
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    m.second_layer.resize(hidden);
    for (auto& v : m.second_layer) v = rng.normal(0.0, s2);
    return m;
}

double mlp_forward(const MlpModel& model, std::span<const double> x) {
    if (x.size() != model.input_dim) {
        throw DimensionError("network input has dimension " + std::to_string(x.size()) + ", expected " +
                             std::to_string(model.input_dim));
    }
    const auto& k = simd::kernels();
    double out = 0.0;
    for (std::size_t j = 0; j < model.hidden; ++j) {
        const double h = k.dot(model.first_layer.row(j).data(), x.data(), x.size());
        if (h > 0.0) out += model.second_layer[j] * h;
    }
    return out;
}

std::vector<double> mlp_forward_batch(const MlpModel& model, const PointSet& X) {
    std::vector<double> out(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) out[i] = mlp_forward(model, X.row(i));
    return out;
}

LossGradient mlp_loss_gradient(const MlpModel& model, const PointSet& X, std::span<const int> labels) {
    if (labels.size() != X.size()) throw DimensionError("label count differs from sample count");
    if (X.dim() != model.input_dim) throw DimensionError("sample dimension differs from network input dimension");
    const auto& k = simd::kernels();
    const std::size_t n = X.size();
    const std::size_t d = model.input_dim;
    const std::size_t H = model.hidden;
    LossGradient out;
    out.gradient.assign(model.parameter_count(), 0.0);
    if (n == 0) return out;
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> pre(H);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = X.row(i);
        double phi = 0.0;
        for (std::size_t j = 0; j < H; ++j) {
            pre[j] = k.dot(model.first_layer.row(j).data(), x.data(), d);
            if (pre[j] > 0.0) phi += model.second_layer[j] * pre[j];
        }
        const double ypm = labels[i] == 1 ? 1.0 : -1.0;
        out.loss += softplus(-ypm * phi) * inv_n;
        const double dphi = (sigmoid(phi) - static_cast<double>(labels[i] == 1)) * inv_n;
        for (std::size_t j = 0; j < H; ++j) {
            if (pre[j] <= 0.0) continue;
            out.gradient[H * d + j] += dphi * pre[j];
            const double g = dphi * model.second_layer[j];
            double* row = out.gradient.data() + j * d;
            for (std::size_t c = 0; c < d; ++c) row[c] += g * x[c];
        }
    }
    return out;
}

MlpTrainResult train_mlp(const PointSet& X, std::span<const int> labels, const MlpOptions& options) {
    if (options.hidden == 0) throw ConfigError("hidden width must be positive", {{"field", "mlp_hidden"}});
    if (!(options.learning_rate > 0.0) || !std::isfinite(options.learning_rate)) {
        throw ConfigError("learning rate must be positive", {{"field", "mlp_learning_rate"}});
    }
    if (labels.size() != X.size()) throw DimensionError("label count differs from sample count");
    std::size_t positives = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw FormatError("network labels must be 0 or 1", {{"label", y}});
        positives += y == 1;
    }
    if (positives == 0 || positives == X.size()) {
        throw SingleClassError("network training needs both classes",
                               {{"positives", positives}, {"negatives", X.size() - positives}});
    }

    MlpTrainResult result;
    result.model = MlpModel::initialize(X.dim(), options.hidden, options.seed);
    auto theta = result.model.parameters();
    result.loss_trace.reserve(options.epochs + 1);
    for (std::size_t epoch = 0;; ++epoch) {
        const auto lg = mlp_loss_gradient(result.model, X, labels);
        if (!std::isfinite(lg.loss)) {
            throw DivergenceError("training loss became non-finite", {{"epoch", epoch}});
        }
        result.loss_trace.push_back(lg.loss);
        if (epoch == options.epochs) break;
        for (std::size_t p = 0; p < theta.size(); ++p) theta[p] -= options.learning_rate * lg.gradient[p];
        result.model.set_parameters(theta);
    }
    return result;
}

}  // namespace flame::classifier
