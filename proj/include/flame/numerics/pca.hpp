#pragma once

#include "flame/numerics/point_set.hpp"

#include <cstddef>
#include <span>

namespace flame::numerics {

/// Top-ℓ principal axes of a point cloud.
///
/// Component rows are orthonormal and sorted by explained variance
/// (descending). Each row's entry of largest magnitude is positive so the
/// fit is deterministic. When ℓ exceeds the numerical rank, the extra rows
/// are an orthonormal completion and their explained variance is exactly 0.
struct PcaModel {
    Vector mean;
    PointSet components;  // ℓ × dim
    Vector explained_variance;
    double total_variance = 0.0;

    std::size_t input_dim() const noexcept { return mean.size(); }
    std::size_t output_dim() const noexcept { return components.size(); }
};

/// Covariance (n−1 denominator) eigendecomposition. Requires |X| ≥ 2 and
/// 1 ≤ ℓ ≤ min(|X|−1, dim); otherwise ConfigError.
PcaModel fit_pca(const PointSet& X, std::size_t components);

/// components · (x − mean). DimensionError on size mismatch.
Vector project(const PcaModel& model, std::span<const double> x);

/// Projects every row of X; result is |X| × ℓ.
PointSet project_all(const PcaModel& model, const PointSet& X);

}  // namespace flame::numerics
