#include "flame/simd/kernels.hpp"
#include "flame/numerics/random.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace flame;

namespace {

std::vector<double> random_vector(numerics::Rng& rng, std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = scale * rng.normal();
    return v;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

std::vector<const simd::KernelTable*> vector_tables() {
    std::vector<const simd::KernelTable*> out;
    if (simd::isa_available(simd::Isa::avx2) && simd::detail::avx2_table()) out.push_back(simd::detail::avx2_table());
    if (simd::isa_available(simd::Isa::neon) && simd::detail::neon_table()) out.push_back(simd::detail::neon_table());
    return out;
}

}  // namespace

TEST_CASE("unavailable ISAs fall back to the scalar table") {
    CHECK(simd::isa_available(simd::Isa::scalar));
    CHECK(simd::kernels_for(simd::Isa::scalar).isa == simd::Isa::scalar);
    for (auto isa : {simd::Isa::avx2, simd::Isa::neon}) {
        if (!simd::isa_available(isa)) CHECK(simd::kernels_for(isa).isa == simd::Isa::scalar);
    }
    CHECK(simd::isa_name(simd::kernels().isa).size() > 0);
}

TEST_CASE("scalar kernels match their definitions") {
    const auto& k = simd::detail::scalar_table();
    const double a[] = {1, 2, 3}, b[] = {4, -5, 6};
    CHECK(k.dot(a, b, 3) == 12.0);
    CHECK(k.squared_distance(a, b, 3) == 9.0 + 49.0 + 9.0);
    const double v[] = {0.0, 1.0, 2.0}, w[] = {1.0, 2.0, 3.0};
    CHECK(k.exp_weighted_sum(v, w, 3, 0.5) == doctest::Approx(1.0 + 2.0 * std::exp(-0.5) + 3.0 * std::exp(-1.0)).epsilon(1e-15));
    CHECK(k.exp_weighted_sum(v, nullptr, 3, 1.0) == doctest::Approx(1.0 + std::exp(-1.0) + std::exp(-2.0)).epsilon(1e-15));
    double out[3];
    k.exp(v, out, 3);
    CHECK(out[2] == doctest::Approx(std::exp(2.0)).epsilon(1e-15));
}

TEST_CASE("vector kernels agree with the scalar reference") {
    const auto tables = vector_tables();
    if (tables.empty()) {
        MESSAGE("no vector ISA available on this CPU; equivalence checks skipped");
        return;
    }
    const auto& ref = simd::detail::scalar_table();
    numerics::Rng rng(11);
    for (const auto* t : tables) {
        CAPTURE(simd::isa_name(t->isa));
        for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 31u, 64u, 67u, 1000u}) {
            CAPTURE(n);
            const auto a = random_vector(rng, n), b = random_vector(rng, n);
            const double d_ref = ref.dot(a.data(), b.data(), n);
            const double d_vec = t->dot(a.data(), b.data(), n);
            // Reassociated sums: bound by the condition Σ|a_i b_i|.
            double mag = 0.0;
            for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
            CHECK(std::abs(d_ref - d_vec) <= 1e-14 * std::max(mag, 1.0));
            CHECK(rel(ref.squared_distance(a.data(), b.data(), n), t->squared_distance(a.data(), b.data(), n)) <= 1e-14);

            std::vector<double> v(n), w(n);
            for (std::size_t i = 0; i < n; ++i) {
                v[i] = std::abs(a[i]) * 10.0;
                w[i] = std::abs(b[i]);
            }
            for (double scale : {0.1, 1.0, 7.5}) {
                CHECK(rel(ref.exp_weighted_sum(v.data(), w.data(), n, scale), t->exp_weighted_sum(v.data(), w.data(), n, scale)) <= 1e-13);
                CHECK(rel(ref.exp_weighted_sum(v.data(), nullptr, n, scale), t->exp_weighted_sum(v.data(), nullptr, n, scale)) <= 1e-13);
            }
            std::vector<double> e_ref(n), e_vec(n), x = random_vector(rng, n, 20.0);
            ref.exp(x.data(), e_ref.data(), n);
            t->exp(x.data(), e_vec.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(rel(e_ref[i], e_vec[i]) <= 1e-14);
        }
    }
}

TEST_CASE("SoA distances agree with the scalar reference for every layout") {
    const auto& ref = simd::detail::scalar_table();
    auto tables = vector_tables();
    tables.push_back(&ref);
    numerics::Rng rng(5);
    for (std::size_t dims : {1u, 2u, 3u, 5u}) {
        for (std::size_t n : {1u, 3u, 4u, 9u, 33u, 257u}) {
            const auto soa = random_vector(rng, n * dims);
            const auto q = random_vector(rng, dims);
            std::vector<double> expect(n);
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (std::size_t k = 0; k < dims; ++k) s += (soa[k * n + i] - q[k]) * (soa[k * n + i] - q[k]);
                expect[i] = s;
            }
            for (const auto* t : tables) {
                std::vector<double> got(n);
                t->squared_distances_soa(soa.data(), n, dims, q.data(), got.data());
                for (std::size_t i = 0; i < n; ++i) CHECK(rel(got[i], expect[i]) <= 1e-14);
            }
        }
    }
}

TEST_CASE("exp kernels handle range extremes") {
    auto tables = vector_tables();
    tables.push_back(&simd::detail::scalar_table());
    const std::vector<double> x = {-800.0, -745.0, -700.0, -1.0, 0.0, 1e-300, 1.0, 300.0, 709.0};
    for (const auto* t : tables) {
        std::vector<double> out(x.size());
        t->exp(x.data(), out.data(), x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double want = std::exp(x[i]);
            if (want < 1e-300) CHECK(out[i] <= 1e-300);
            else CHECK(rel(out[i], want) <= 1e-14);
        }
    }
}
