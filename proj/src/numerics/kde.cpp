#include "flame/numerics/kde.hpp"

#include "flame/simd/kernels.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace flame::numerics {

KdeModel::KdeModel(const PointSet& samples, double bandwidth)
    : dim_(samples.dim()), count_(samples.size()), bandwidth_(bandwidth) {
    if (count_ == 0) throw EmptyPoolError("KDE fitted on an empty sample set");
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        throw ConfigError("KDE bandwidth must be positive", {{"field", "bandwidth_h"}, {"value", bandwidth}});
    }
    soa_.resize(dim_ * count_);
    for (std::size_t i = 0; i < count_; ++i) {
        const auto r = samples.row(i);
        for (std::size_t k = 0; k < dim_; ++k) soa_[k * count_ + i] = r[k];
    }
    const double l = static_cast<double>(dim_);
    normalizer_ = 1.0 / (static_cast<double>(count_) * std::pow(2.0 * std::numbers::pi, l / 2.0) *
                         std::pow(bandwidth_, l));
}

Vector KdeModel::sample(std::size_t i) const {
    Vector out(dim_);
    for (std::size_t k = 0; k < dim_; ++k) out[k] = coordinate(i, k);
    return out;
}

double KdeModel::density_with(std::span<const double> s, std::vector<double>& scratch) const {
    if (s.size() != dim_) {
        throw DimensionError("KDE query of dimension " + std::to_string(s.size()) + ", model has " +
                             std::to_string(dim_));
    }
    const auto& k = simd::kernels();
    k.squared_distances_soa(soa_.data(), count_, dim_, s.data(), scratch.data());
    const double scale = 1.0 / (2.0 * bandwidth_ * bandwidth_);
    return normalizer_ * k.exp_weighted_sum(scratch.data(), nullptr, count_, scale);
}

double KdeModel::density(std::span<const double> s) const {
    std::vector<double> scratch(count_);
    return density_with(s, scratch);
}

std::vector<double> KdeModel::sample_densities() const {
    std::vector<double> scratch(count_);
    std::vector<double> out(count_);
    Vector query(dim_);
    for (std::size_t i = 0; i < count_; ++i) {
        for (std::size_t k = 0; k < dim_; ++k) query[k] = coordinate(i, k);
        out[i] = density_with(query, scratch);
    }
    return out;
}

KdeMode kde_mode(const KdeModel& model, std::span<const double> densities) {
    if (model.size() == 0 || densities.empty()) throw EmptyPoolError("mode of an empty KDE");
    std::size_t best = 0;
    for (std::size_t i = 1; i < densities.size(); ++i) {
        if (densities[i] > densities[best]) best = i;
    }
    return {best, model.sample(best), densities[best]};
}

KdeMode kde_mode(const KdeModel& model) {
    const auto densities = model.sample_densities();
    return kde_mode(model, densities);
}

double scott_bandwidth(const PointSet& samples) {
    const std::size_t n = samples.size();
    const std::size_t dim = samples.dim();
    if (n == 0) throw EmptyPoolError("bandwidth of an empty sample set");
    double mean_variance = 0.0;
    if (n > 1) {
        for (std::size_t k = 0; k < dim; ++k) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += samples.row(i)[k];
            mean /= static_cast<double>(n);
            double ss = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = samples.row(i)[k] - mean;
                ss += d * d;
            }
            mean_variance += ss / static_cast<double>(n - 1);
        }
        mean_variance /= static_cast<double>(dim);
    }
    const double sigma = mean_variance > 0.0 ? std::sqrt(mean_variance) : 1.0;
    return std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(dim) + 4.0)) * sigma;
}

}  // namespace flame::numerics
