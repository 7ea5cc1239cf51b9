#include "flame/simd/kernels.hpp"

#include <cmath>

namespace flame::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void squared_distances_soa_scalar(const double* soa, std::size_t n, std::size_t dims,
                                  const double* query, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
    for (std::size_t k = 0; k < dims; ++k) {
        const double* col = soa + k * n;
        const double q = query[k];
        for (std::size_t i = 0; i < n; ++i) {
            const double d = col[i] - q;
            out[i] += d * d;
        }
    }
}

double exp_weighted_sum_scalar(const double* v, const double* weights, std::size_t n, double scale) {
    double acc = 0.0;
    if (weights == nullptr) {
        for (std::size_t i = 0; i < n; ++i) acc += std::exp(-scale * v[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i) acc += weights[i] * std::exp(-scale * v[i]);
    }
    return acc;
}

void exp_scalar(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i]);
}

constexpr KernelTable kScalar{
    Isa::scalar,
    &dot_scalar,
    &squared_distance_scalar,
    &squared_distances_soa_scalar,
    &exp_weighted_sum_scalar,
    &exp_scalar,
};

}  // namespace

namespace detail {
const KernelTable& scalar_table() noexcept { return kScalar; }
}  // namespace detail

}  // namespace flame::simd
