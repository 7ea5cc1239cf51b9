// NEON kernel variants for aarch64. Advanced SIMD is mandatory on aarch64,
// so no runtime probe is needed beyond the compile-time target check.

#include "flame/simd/kernels.hpp"

#if !defined(FLAME_SCALAR_ONLY) && defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

namespace flame::simd {
namespace {

inline float64x2_t pow2_integral(float64x2_t m) {
    const int64x2_t e = vaddq_s64(vcvtnq_s64_f64(m), vdupq_n_s64(1023));
    return vreinterpretq_f64_s64(vshlq_n_s64(e, 52));
}

inline float64x2_t exp_pd(float64x2_t x) {
    x = vminq_f64(vmaxq_f64(x, vdupq_n_f64(-746.0)), vdupq_n_f64(709.78));
    const float64x2_t n = vrndnq_f64(vmulq_n_f64(x, 1.4426950408889634074));
    float64x2_t r = vfmsq_f64(x, n, vdupq_n_f64(6.93147180369123816490e-01));
    r = vfmsq_f64(r, n, vdupq_n_f64(1.90821492927058770002e-10));

    float64x2_t p = vdupq_n_f64(1.0 / 6227020800.0);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 479001600.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 39916800.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 3628800.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 362880.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 40320.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 5040.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 720.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 120.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 24.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0 / 6.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(0.5), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0), p, r);
    p = vfmaq_f64(vdupq_n_f64(1.0), p, r);

    const float64x2_t half_n = vrndmq_f64(vmulq_n_f64(n, 0.5));
    const float64x2_t rest = vsubq_f64(n, half_n);
    return vmulq_f64(vmulq_f64(p, pow2_integral(half_n)), pow2_integral(rest));
}

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double squared_distance_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        const float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
        acc0 = vfmaq_f64(acc0, d0, d0);
        acc1 = vfmaq_f64(acc1, d1, d1);
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void squared_distances_soa_neon(const double* soa, std::size_t n, std::size_t dims,
                                const double* query, double* out) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t acc = vdupq_n_f64(0.0);
        for (std::size_t k = 0; k < dims; ++k) {
            const float64x2_t d = vsubq_f64(vld1q_f64(soa + k * n + i), vdupq_n_f64(query[k]));
            acc = vfmaq_f64(acc, d, d);
        }
        vst1q_f64(out + i, acc);
    }
    for (; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < dims; ++k) {
            const double d = soa[k * n + i] - query[k];
            acc += d * d;
        }
        out[i] = acc;
    }
}

double exp_weighted_sum_neon(const double* v, const double* weights, std::size_t n, double scale) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t e = exp_pd(vmulq_n_f64(vld1q_f64(v + i), -scale));
        acc = weights == nullptr ? vaddq_f64(acc, e) : vfmaq_f64(acc, vld1q_f64(weights + i), e);
    }
    if (i < n) {
        const double tv[2] = {v[i], 0.0};
        const double tw[2] = {weights == nullptr ? 1.0 : weights[i], 0.0};
        acc = vfmaq_f64(acc, vld1q_f64(tw), exp_pd(vmulq_n_f64(vld1q_f64(tv), -scale)));
    }
    return vaddvq_f64(acc);
}

void exp_neon(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(out + i, exp_pd(vld1q_f64(x + i)));
    if (i < n) {
        double t[2] = {x[i], 0.0};
        vst1q_f64(t, exp_pd(vld1q_f64(t)));
        out[i] = t[0];
    }
}

constexpr KernelTable kNeon{
    Isa::neon,
    &dot_neon,
    &squared_distance_neon,
    &squared_distances_soa_neon,
    &exp_weighted_sum_neon,
    &exp_neon,
};

}  // namespace

namespace detail {
const KernelTable* neon_table() noexcept { return &kNeon; }
}  // namespace detail

}  // namespace flame::simd

#else

namespace flame::simd::detail {
const KernelTable* neon_table() noexcept { return nullptr; }
}  // namespace flame::simd::detail

#endif
