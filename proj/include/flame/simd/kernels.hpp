#pragma once
// Data-parallel inner loops shared by the numeric modules.
//
// Every kernel has a scalar reference implementation plus optional AVX2
// (x86-64) and NEON (aarch64) variants. The active table is picked once at
// first use from the CPU's capabilities; FLAME_SIMD=scalar|avx2|neon in the
// environment overrides the choice. The SIMD variants reorder reductions and
// use a polynomial exp, so they agree with the scalar reference to a few ulp
// rather than bit-for-bit; within one process the chosen table is fixed, so
// results are reproducible run to run on the same machine.

#include <cstddef>
#include <string_view>

namespace flame::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa) noexcept;

struct KernelTable {
    Isa isa;

    // Σ a[i]·b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);

    // Σ (a[i] − b[i])²
    double (*squared_distance)(const double* a, const double* b, std::size_t n);

    // Structure-of-arrays distances: coordinate k of point i lives at
    // soa[k * n + i]. Writes out[i] = Σ_k (soa[k*n+i] − query[k])².
    void (*squared_distances_soa)(const double* soa, std::size_t n, std::size_t dims,
                                  const double* query, double* out);

    // Σ w[i]·exp(−scale·v[i]); a null `weights` means all ones.
    double (*exp_weighted_sum)(const double* v, const double* weights, std::size_t n, double scale);

    // out[i] = exp(x[i]) elementwise.
    void (*exp)(const double* x, double* out, std::size_t n);
};

/// Kernel table in use for this process.
const KernelTable& kernels() noexcept;

/// Table for a specific ISA. Returns the scalar table when `isa` is not
/// available on this CPU or was not compiled in.
const KernelTable& kernels_for(Isa isa) noexcept;

bool isa_available(Isa isa) noexcept;

namespace detail {
const KernelTable& scalar_table() noexcept;
const KernelTable* avx2_table() noexcept;  // null when not compiled in
const KernelTable* neon_table() noexcept;  // null when not compiled in
}  // namespace detail

}  // namespace flame::simd
