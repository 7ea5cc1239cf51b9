#include "flame/theory/equivalence.hpp"

#include "flame/numerics/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flame::theory {

using classifier::SvmModel;

PointSet probe_set(const PointSet& X, std::size_t per_axis, double inflation, std::uint64_t seed) {
    if (X.empty()) throw EmptyPoolError("probe set of an empty point set");
    const std::size_t dim = X.dim();
    Vector lo(dim, std::numeric_limits<double>::infinity());
    Vector hi(dim, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < X.size(); ++i) {
        const auto x = X.row(i);
        for (std::size_t d = 0; d < dim; ++d) {
            lo[d] = std::min(lo[d], x[d]);
            hi[d] = std::max(hi[d], x[d]);
        }
    }
    for (std::size_t d = 0; d < dim; ++d) {
        const double pad = 0.5 * inflation * std::max(hi[d] - lo[d], 1e-12);
        lo[d] -= pad;
        hi[d] += pad;
    }

    PointSet out(0, dim);
    if (dim == 2) {
        const double denom = static_cast<double>(std::max<std::size_t>(per_axis, 2) - 1);
        for (std::size_t a = 0; a < per_axis; ++a) {
            for (std::size_t b = 0; b < per_axis; ++b) {
                const double p[2] = {lo[0] + (hi[0] - lo[0]) * static_cast<double>(a) / denom,
                                     lo[1] + (hi[1] - lo[1]) * static_cast<double>(b) / denom};
                out.push_back(p);
            }
        }
        return out;
    }
    numerics::Rng rng(seed, 0x70726f6265ULL);
    Vector p(dim);
    for (std::size_t k = 0; k < per_axis * per_axis; ++k) {
        for (std::size_t d = 0; d < dim; ++d) p[d] = rng.uniform(lo[d], hi[d]);
        out.push_back(p);
    }
    return out;
}

double sign_agreement(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("score vectors differ in length");
    if (a.empty()) return 1.0;
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.size(); ++i) same += (a[i] > 0.0) == (b[i] > 0.0);
    return static_cast<double>(same) / static_cast<double>(a.size());
}

nlohmann::json to_json(const EquivalenceReport& r) {
    nlohmann::json j = {{"bias_error", r.bias_error},
                        {"prediction_agreement", r.prediction_agreement},
                        {"max_decision_difference", r.max_decision_difference},
                        {"probe_count", r.probe_count},
                        {"support_set_before", r.support_set_before},
                        {"support_set_after", r.support_set_after},
                        {"degenerate", r.degenerate},
                        {"diagnostics", r.diagnostics}};
    j["weight_relative_error"] = r.weight_relative_error ? nlohmann::json(*r.weight_relative_error) : nlohmann::json();
    return j;
}

RetrainResult retrain_on_support(const PointSet& X, std::span<const int> labels, double C,
                                 const classifier::KernelSpec& kernel, const classifier::SmoOptions& options,
                                 std::uint64_t probe_seed) {
    RetrainResult out;
    out.full = classifier::train_svm(X, labels, C, kernel, options);
    auto& report = out.report;
    report.support_set_before = out.full.support_indices;

    const auto& S = out.full.support_indices;
    const PointSet XS = X.subset(S);
    std::vector<int> yS;
    yS.reserve(S.size());
    for (auto i : S) yS.push_back(labels[i]);
    const bool has_pos = std::find(yS.begin(), yS.end(), 1) != yS.end();
    const bool has_neg = std::find(yS.begin(), yS.end(), -1) != yS.end();
    if (!has_pos || !has_neg) {
        report.degenerate = true;
        report.diagnostics = "support set holds a single class (" + std::to_string(S.size()) + " points)";
        return out;
    }

    out.reduced = classifier::train_svm(XS, yS, C, kernel, options);
    for (auto k : out.reduced.support_indices) report.support_set_after.push_back(S[k]);

    if (kernel.kind == classifier::KernelKind::linear) {
        const auto w = classifier::linear_weights(out.full);
        const auto w2 = classifier::linear_weights(out.reduced);
        double num = 0.0;
        double den = 0.0;
        for (std::size_t d = 0; d < w.size(); ++d) {
            num += (w[d] - w2[d]) * (w[d] - w2[d]);
            den += w[d] * w[d];
        }
        report.weight_relative_error = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    }
    report.bias_error = std::abs(out.full.bias - out.reduced.bias);

    const PointSet probes = probe_set(X, 50, 0.2, probe_seed);
    const auto a = classifier::svm_decision_batch(out.full, probes);
    const auto b = classifier::svm_decision_batch(out.reduced, probes);
    report.probe_count = probes.size();
    report.prediction_agreement = sign_agreement(a, b);
    for (std::size_t i = 0; i < a.size(); ++i) {
        report.max_decision_difference = std::max(report.max_decision_difference, std::abs(a[i] - b[i]));
    }
    return out;
}

}  // namespace flame::theory
