// AVX2 + FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma and only entered after a runtime CPUID check.

#include "flame/simd/kernels.hpp"

#if !defined(FLAME_SCALAR_ONLY) && defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

namespace flame::simd {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// 2^m for integral m in [-1022, 1023] held in double lanes.
inline __m256d pow2_integral(__m256d m) {
    const __m256d magic = _mm256_set1_pd(0x1.8p52);
    const __m256i bits = _mm256_castpd_si256(_mm256_add_pd(m, magic));
    return _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_add_epi64(bits, _mm256_set1_epi64x(1023)), 52));
}

// exp(x), accurate to ~2 ulp over the full double range. Results that
// underflow land in the subnormal range via a split 2^n scale.
inline __m256d exp_pd(__m256d x) {
    const __m256d magic = _mm256_set1_pd(0x1.8p52);
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
    const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);

    x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-746.0)), _mm256_set1_pd(709.78));

    const __m256d t = _mm256_fmadd_pd(x, log2e, magic);
    const __m256d n = _mm256_sub_pd(t, magic);
    __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
    r = _mm256_fnmadd_pd(n, ln2_lo, r);

    // Taylor series to r^13; |r| <= ln2/2 keeps the truncation below 1e-17.
    __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

    const __m256d half_n = _mm256_floor_pd(_mm256_mul_pd(n, _mm256_set1_pd(0.5)));
    const __m256d rest = _mm256_sub_pd(n, half_n);
    return _mm256_mul_pd(_mm256_mul_pd(p, pow2_integral(half_n)), pow2_integral(rest));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
        acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
        acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double squared_distance_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        acc1 = _mm256_fmadd_pd(d1, d1, acc1);
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc0 = _mm256_fmadd_pd(d, d, acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void squared_distances_soa_avx2(const double* soa, std::size_t n, std::size_t dims,
                                const double* query, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t k = 0; k < dims; ++k) {
            const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(soa + k * n + i), _mm256_set1_pd(query[k]));
            acc = _mm256_fmadd_pd(d, d, acc);
        }
        _mm256_storeu_pd(out + i, acc);
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

double exp_weighted_sum_avx2(const double* v, const double* weights, std::size_t n, double scale) {
    const __m256d neg_scale = _mm256_set1_pd(-scale);
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    if (weights == nullptr) {
        for (; i + 8 <= n; i += 8) {
            acc0 = _mm256_add_pd(acc0, exp_pd(_mm256_mul_pd(neg_scale, _mm256_loadu_pd(v + i))));
            acc1 = _mm256_add_pd(acc1, exp_pd(_mm256_mul_pd(neg_scale, _mm256_loadu_pd(v + i + 4))));
        }
    } else {
        for (; i + 8 <= n; i += 8) {
            acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(weights + i),
                                   exp_pd(_mm256_mul_pd(neg_scale, _mm256_loadu_pd(v + i))), acc0);
            acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(weights + i + 4),
                                   exp_pd(_mm256_mul_pd(neg_scale, _mm256_loadu_pd(v + i + 4))), acc1);
        }
    }
    if (i < n) {
        // Pad the tail with zero weights so it runs through the same exp.
        alignas(32) double tv[8] = {0, 0, 0, 0, 0, 0, 0, 0};
        alignas(32) double tw[8] = {0, 0, 0, 0, 0, 0, 0, 0};
        for (std::size_t j = 0; i + j < n; ++j) {
            tv[j] = v[i + j];
            tw[j] = weights == nullptr ? 1.0 : weights[i + j];
        }
        acc0 = _mm256_fmadd_pd(_mm256_load_pd(tw), exp_pd(_mm256_mul_pd(neg_scale, _mm256_load_pd(tv))), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_load_pd(tw + 4),
                               exp_pd(_mm256_mul_pd(neg_scale, _mm256_load_pd(tv + 4))), acc1);
    }
    return hsum(_mm256_add_pd(acc0, acc1));
}

void exp_avx2(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, exp_pd(_mm256_loadu_pd(x + i)));
    if (i < n) {
        alignas(32) double t[4] = {0, 0, 0, 0};
        for (std::size_t j = 0; i + j < n; ++j) t[j] = x[i + j];
        _mm256_store_pd(t, exp_pd(_mm256_load_pd(t)));
        for (std::size_t j = 0; i + j < n; ++j) out[i + j] = t[j];
    }
}

constexpr KernelTable kAvx2{
    Isa::avx2,
    &dot_avx2,
    &squared_distance_avx2,
    &squared_distances_soa_avx2,
    &exp_weighted_sum_avx2,
    &exp_avx2,
};

}  // namespace

namespace detail {
const KernelTable* avx2_table() noexcept { return &kAvx2; }
}  // namespace detail

}  // namespace flame::simd

#else

namespace flame::simd::detail {
const KernelTable* avx2_table() noexcept { return nullptr; }
}  // namespace flame::simd::detail

#endif
