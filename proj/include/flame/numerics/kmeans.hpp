#pragma once

#include "flame/numerics/point_set.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace flame::numerics {

struct KMeansOptions {
    std::size_t max_iterations = 300;
    double shift_tolerance = 1e-8;  // max center displacement that counts as converged
};

struct Clustering {
    PointSet centers;
    std::vector<std::size_t> assignment;  // point → cluster id in [0, K)
    double inertia = 0.0;                 // Σ squared distance to assigned center
    std::vector<double> inertia_trace;    // inertia after each assignment step
    std::size_t iterations = 0;
    bool converged = false;

    std::size_t k() const noexcept { return centers.size(); }
};

/// Lloyd's algorithm with k-means++ seeding. Deterministic for a fixed seed.
/// Every returned cluster is non-empty: clusters that empty out are re-seeded
/// with the point farthest from its own center.
///
/// Throws ConfigError for K = 0 and InsufficientSamplesError when X has
/// fewer than K distinct points.
Clustering kmeans(const PointSet& X, std::size_t k, std::uint64_t seed, const KMeansOptions& options = {});

/// For each cluster, the member closest to its center (lowest index on ties).
std::vector<std::size_t> nearest_to_centers(const Clustering& clustering, const PointSet& X);

}  // namespace flame::numerics
