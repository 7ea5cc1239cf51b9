#include "flame/sampler/sampler.hpp"

#include "flame/numerics/kde.hpp"
#include "flame/numerics/kmeans.hpp"
#include "flame/numerics/vector_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace flame::sampler {

AugmentedPool augment_pool(const PointSet& pool, std::span<const double> query) {
    if (pool.empty()) throw EmptyPoolError("cannot augment an empty pool");
    if (pool.dim() != query.size()) {
        throw DimensionError("pool dimension " + std::to_string(pool.dim()) + " differs from query dimension " +
                                 std::to_string(query.size()),
                             {{"pool_dim", pool.dim()}, {"query_dim", query.size()}});
    }
    AugmentedPool out;
    out.augmented = PointSet(pool.size(), pool.dim() + 1);
    out.similarity.resize(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto x = pool.row(i);
        const double c = numerics::cosine_similarity(x, query);
        auto row = out.augmented.row(i);
        std::copy(x.begin(), x.end(), row.begin());
        row[pool.dim()] = c;
        out.similarity[i] = c;
    }
    return out;
}

MarginalBand marginal_band(const PointSet& projections, const FlameConfig& config) {
    if (projections.empty()) throw EmptyPoolError("marginal band of an empty projection set");
    MarginalBand band;
    band.bandwidth = config.bandwidth_h > 0.0 ? config.bandwidth_h : numerics::scott_bandwidth(projections);

    const numerics::KdeModel kde(projections, band.bandwidth);
    band.densities = kde.sample_densities();
    const auto mode = numerics::kde_mode(kde, band.densities);
    band.mode_index = mode.index;
    band.mode_density = mode.density;
    band.lower_threshold = config.ratio_lower * mode.density;
    band.upper_threshold = config.ratio_upper * mode.density;

    const auto [lo, hi] = std::minmax_element(band.densities.begin(), band.densities.end());
    band.min_density = *lo;
    band.max_density = *hi;

    for (std::size_t i = 0; i < band.densities.size(); ++i) {
        const double f = band.densities[i];
        if (f >= band.lower_threshold && f <= band.upper_threshold) band.members.push_back(i);
    }
    if (band.members.empty()) {
        throw EmptyBandError("no sample has density within [r_l·f*, r_u·f*]; widen the ratio interval",
                             {{"mode_density", band.mode_density},
                              {"lower_threshold", band.lower_threshold},
                              {"upper_threshold", band.upper_threshold},
                              {"min_density", band.min_density},
                              {"max_density", band.max_density},
                              {"bandwidth", band.bandwidth}});
    }
    return band;
}

std::vector<std::size_t> ShotSelection::pool_indices() const {
    std::vector<std::size_t> out;
    out.reserve(shots.size());
    for (const auto& s : shots) out.push_back(s.pool_index);
    return out;
}

ShotSelection select_shots(const AugmentedPool& pool, const FlameConfig& config) {
    config.validate();
    if (pool.size() < config.shots_k) {
        throw InsufficientSamplesError("pool has " + std::to_string(pool.size()) + " entries, fewer than K=" +
                                           std::to_string(config.shots_k),
                                       {{"pool_size", pool.size()}, {"k", config.shots_k}});
    }

    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (!config.similarity_floor || pool.similarity[i] >= *config.similarity_floor) candidates.push_back(i);
    }
    if (candidates.size() < 2) {
        throw EmptyPoolError("fewer than 2 pool entries pass the similarity floor",
                             {{"candidates", candidates.size()}});
    }
    PointSet filtered;
    if (candidates.size() != pool.size()) filtered = pool.augmented.subset(candidates);
    const PointSet& candidate_rows = candidates.size() == pool.size() ? pool.augmented : filtered;

    const auto pca = numerics::fit_pca(candidate_rows, config.pca_dim);
    const auto projections = numerics::project_all(pca, candidate_rows);
    const auto band = marginal_band(projections, config);

    ShotSelection selection;
    selection.requested_k = config.shots_k;
    selection.candidates = candidates.size();
    selection.band_size = band.members.size();
    selection.bandwidth = band.bandwidth;
    selection.mode_density = band.mode_density;
    selection.lower_threshold = band.lower_threshold;
    selection.upper_threshold = band.upper_threshold;

    const PointSet marginal = candidate_rows.subset(band.members);
    std::size_t k = std::min(config.shots_k, marginal.size());
    if (k < config.shots_k) {
        selection.warnings.push_back("marginal band holds " + std::to_string(marginal.size()) +
                                     " points; K reduced from " + std::to_string(config.shots_k));
    }
    selection.effective_k = k;

    const auto clustering = numerics::kmeans(marginal, k, config.seed);
    const auto nearest = numerics::nearest_to_centers(clustering, marginal);
    for (std::size_t c = 0; c < nearest.size(); ++c) {
        const std::size_t local = nearest[c];
        const std::size_t candidate = band.members[local];
        Shot shot;
        shot.pool_index = candidates[candidate];
        shot.density = band.densities[candidate];
        shot.cluster_id = c;
        shot.distance_to_center = std::sqrt(numerics::squared_distance(marginal.row(local), clustering.centers.row(c)));
        shot.similarity = pool.similarity[shot.pool_index];
        selection.shots.push_back(shot);
    }
    return selection;
}

}  // namespace flame::sampler
