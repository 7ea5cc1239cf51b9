#pragma once
// One-step marginal sampling: augment proposals with their zero-shot
// similarity, project, keep the density band below the mode, and pick one
// representative per k-means cluster of that band.

#include "flame/numerics/pca.hpp"
#include "flame/numerics/point_set.hpp"
#include "flame/sampler/config.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace flame::sampler {

/// Pool rows extended with their cosine similarity to the query:
/// row i of `augmented` is [x_i, c_i].
struct AugmentedPool {
    PointSet augmented;
    std::vector<double> similarity;

    std::size_t size() const noexcept { return augmented.size(); }
    std::size_t base_dim() const noexcept { return augmented.dim() - 1; }
    std::span<const double> base(std::size_t i) const { return augmented.row(i).first(base_dim()); }
};

/// Throws EmptyPoolError, DimensionError, or DegenerateVectorError.
AugmentedPool augment_pool(const PointSet& pool, std::span<const double> query);

struct MarginalBand {
    double mode_density = 0.0;
    std::size_t mode_index = 0;
    double lower_threshold = 0.0;  // r_l · f*
    double upper_threshold = 0.0;  // r_u · f*
    double bandwidth = 0.0;
    double min_density = 0.0;
    double max_density = 0.0;
    std::vector<std::size_t> members;  // indices into the projected set, ascending
    std::vector<double> densities;     // f̂ at every projected sample
};

/// Density level band {i : r_l·f* ≤ f̂(s_i) ≤ r_u·f*}.
/// Throws EmptyBandError (with f*, min/max density in details) if no sample qualifies.
MarginalBand marginal_band(const PointSet& projections, const FlameConfig& config);

struct Shot {
    std::size_t pool_index = 0;
    double density = 0.0;
    std::size_t cluster_id = 0;
    double distance_to_center = 0.0;
    double similarity = 0.0;
};

struct ShotSelection {
    std::vector<Shot> shots;  // ordered by cluster id
    std::size_t requested_k = 0;
    std::size_t effective_k = 0;
    std::size_t candidates = 0;  // pool entries surviving the similarity floor
    std::size_t band_size = 0;
    double bandwidth = 0.0;
    double mode_density = 0.0;
    double lower_threshold = 0.0;
    double upper_threshold = 0.0;
    std::vector<std::string> warnings;

    std::vector<std::size_t> pool_indices() const;
};

/// Full selection pipeline over an augmented pool. If the band holds fewer
/// than K points the effective K shrinks to the band size and a warning is
/// recorded. Throws InsufficientSamplesError when the pool is smaller than K.
ShotSelection select_shots(const AugmentedPool& pool, const FlameConfig& config);

/// A labeled training example. Synthetic rows come from oversampling and
/// have no pool index.
struct LabeledShot {
    std::optional<std::size_t> pool_index;
    Vector augmented;
    int label = 0;  // 0 or 1
    bool synthetic = false;
};

/// max class count / min class count. SingleClassError if either class is absent.
double imbalance_ratio(std::span<const int> labels);

/// `target_count` synthetic minority rows x_a + u·(x_b − x_a), with x_b drawn
/// from the k' = min(k_neighbors, m − 1) nearest minority neighbours of x_a.
/// A lone minority sample is replicated with Gaussian jitter instead.
/// The minority is the smaller class (label 1 on a tie).
std::vector<LabeledShot> smote(std::span<const LabeledShot> labeled, std::size_t k_neighbors,
                               std::size_t target_count, std::uint64_t seed, double jitter_sigma = 1e-3);

/// Appends minority synthetics until the classes balance when the imbalance
/// ratio exceeds τ; returns the input unchanged otherwise.
std::vector<LabeledShot> build_training_set(std::span<const LabeledShot> labeled, const FlameConfig& config);

}  // namespace flame::sampler
