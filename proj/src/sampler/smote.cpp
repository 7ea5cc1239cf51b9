#include "flame/numerics/random.hpp"
#include "flame/numerics/vector_ops.hpp"
#include "flame/sampler/sampler.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace flame::sampler {

namespace {

struct ClassCounts {
    std::size_t negatives = 0;
    std::size_t positives = 0;
};

ClassCounts count_labels(std::span<const int> labels) {
    ClassCounts c;
    for (int y : labels) {
        if (y == 1) ++c.positives;
        else if (y == 0) ++c.negatives;
        else throw FormatError("label " + std::to_string(y) + " is not binary", {{"label", y}});
    }
    return c;
}

std::vector<int> labels_of(std::span<const LabeledShot> shots) {
    std::vector<int> out;
    out.reserve(shots.size());
    for (const auto& s : shots) out.push_back(s.label);
    return out;
}

}  // namespace

double imbalance_ratio(std::span<const int> labels) {
    const auto c = count_labels(labels);
    if (c.positives == 0 || c.negatives == 0) {
        throw SingleClassError("labels contain a single class; label more shots before training",
                               {{"positives", c.positives}, {"negatives", c.negatives}});
    }
    return static_cast<double>(std::max(c.positives, c.negatives)) /
           static_cast<double>(std::min(c.positives, c.negatives));
}

std::vector<LabeledShot> smote(std::span<const LabeledShot> labeled, std::size_t k_neighbors,
                               std::size_t target_count, std::uint64_t seed, double jitter_sigma) {
    const auto labels = labels_of(labeled);
    const auto counts = count_labels(labels);
    const int minority_label = counts.positives <= counts.negatives ? 1 : 0;

    std::vector<std::size_t> minority;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        if (labeled[i].label == minority_label) minority.push_back(i);
    }
    if (minority.empty()) throw SingleClassError("minority class is empty; nothing to oversample");

    numerics::Rng rng(seed, 0x736d6f7465ULL);
    std::vector<LabeledShot> out;
    out.reserve(target_count);

    if (minority.size() == 1) {
        const auto& base = labeled[minority.front()].augmented;
        for (std::size_t s = 0; s < target_count; ++s) {
            LabeledShot synth{std::nullopt, base, minority_label, true};
            for (auto& v : synth.augmented) v += rng.normal(0.0, jitter_sigma);
            out.push_back(std::move(synth));
        }
        return out;
    }

    // Nearest minority neighbours of every minority sample (ties by index).
    const std::size_t k = std::min(k_neighbors, minority.size() - 1);
    std::vector<std::vector<std::size_t>> neighbours(minority.size());
    for (std::size_t a = 0; a < minority.size(); ++a) {
        std::vector<std::pair<double, std::size_t>> d;
        for (std::size_t b = 0; b < minority.size(); ++b) {
            if (b == a) continue;
            d.emplace_back(numerics::squared_distance(labeled[minority[a]].augmented, labeled[minority[b]].augmented), b);
        }
        std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
        for (std::size_t j = 0; j < k; ++j) neighbours[a].push_back(d[j].second);
    }

    for (std::size_t s = 0; s < target_count; ++s) {
        const std::size_t a = rng.index(minority.size());
        const std::size_t b = neighbours[a][rng.index(k)];
        const double u = rng.uniform();
        const auto& xa = labeled[minority[a]].augmented;
        const auto& xb = labeled[minority[b]].augmented;
        LabeledShot synth{std::nullopt, Vector(xa.size()), minority_label, true};
        for (std::size_t d = 0; d < xa.size(); ++d) synth.augmented[d] = xa[d] + u * (xb[d] - xa[d]);
        out.push_back(std::move(synth));
    }
    return out;
}

std::vector<LabeledShot> build_training_set(std::span<const LabeledShot> labeled, const FlameConfig& config) {
    const auto labels = labels_of(labeled);
    const double rho = imbalance_ratio(labels);
    std::vector<LabeledShot> out(labeled.begin(), labeled.end());
    if (!(rho > config.imbalance_threshold)) return out;

    const auto counts = count_labels(labels);
    const std::size_t deficit = std::max(counts.positives, counts.negatives) - std::min(counts.positives, counts.negatives);
    auto synthetic = smote(labeled, config.smote_neighbors, deficit, config.seed, config.jitter_sigma);
    out.insert(out.end(), std::make_move_iterator(synthetic.begin()), std::make_move_iterator(synthetic.end()));
    return out;
}

}  // namespace flame::sampler
