#include "flame/simd/kernels.hpp"

#include <cstdlib>
#include <string>

namespace flame::simd {

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

bool isa_available(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
            if (detail::avx2_table() == nullptr) return false;
            __builtin_cpu_init();
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::neon: return detail::neon_table() != nullptr;
    }
    return false;
}

const KernelTable& kernels_for(Isa isa) noexcept {
    if (!isa_available(isa)) return detail::scalar_table();
    switch (isa) {
        case Isa::avx2: return *detail::avx2_table();
        case Isa::neon: return *detail::neon_table();
        case Isa::scalar: break;
    }
    return detail::scalar_table();
}

namespace {

const KernelTable& select() noexcept {
    if (const char* forced = std::getenv("FLAME_SIMD")) {
        const std::string name(forced);
        if (name == "scalar") return detail::scalar_table();
        if (name == "avx2") return kernels_for(Isa::avx2);
        if (name == "neon") return kernels_for(Isa::neon);
    }
    if (isa_available(Isa::avx2)) return *detail::avx2_table();
    if (isa_available(Isa::neon)) return *detail::neon_table();
    return detail::scalar_table();
}

}  // namespace

const KernelTable& kernels() noexcept {
    static const KernelTable& table = select();
    return table;
}

}  // namespace flame::simd
