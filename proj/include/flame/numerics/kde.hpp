#pragma once

#include "flame/numerics/point_set.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace flame::numerics {

/// Isotropic Gaussian kernel density estimate over ℓ-dimensional samples.
/// Samples are kept in structure-of-arrays order for the SIMD distance pass.
class KdeModel {
public:
    /// Throws ConfigError for a non-positive bandwidth, EmptyPoolError for no samples.
    KdeModel(const PointSet& samples, double bandwidth);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return count_; }
    double bandwidth() const noexcept { return bandwidth_; }

    /// Coordinate k of sample i.
    double coordinate(std::size_t i, std::size_t k) const { return soa_[k * count_ + i]; }
    Vector sample(std::size_t i) const;

    /// f̂(s) = 1/(n (2π)^{ℓ/2} h^ℓ) · Σ_i exp(−‖s − s_i‖² / 2h²)
    double density(std::span<const double> s) const;

    /// f̂ evaluated at every sample, in sample order.
    std::vector<double> sample_densities() const;

private:
    double density_with(std::span<const double> s, std::vector<double>& scratch) const;

    std::size_t dim_ = 0;
    std::size_t count_ = 0;
    double bandwidth_ = 1.0;
    double normalizer_ = 1.0;
    std::vector<double> soa_;
};

struct KdeMode {
    std::size_t index = 0;  // sample achieving the maximum
    Vector point;
    double density = 0.0;
};

/// Highest-density sample (search restricted to the samples; lowest index wins ties).
KdeMode kde_mode(const KdeModel& model);

/// Same as kde_mode but reuses densities already computed by sample_densities().
KdeMode kde_mode(const KdeModel& model, std::span<const double> densities);

/// Scott's rule: n^(−1/(ℓ+4)) · σ, where σ² is the mean per-axis sample
/// variance. Falls back to σ = 1 for zero-spread data.
double scott_bandwidth(const PointSet& samples);

}  // namespace flame::numerics
