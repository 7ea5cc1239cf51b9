#include "flame/numerics/vector_ops.hpp"

#include "flame/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace flame::numerics {

namespace {
void require_same_dim(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionError("dimension mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()),
                             {{"left", a.size()}, {"right", b.size()}});
    }
}
}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a, b);
    return simd::kernels().dot(a.data(), b.data(), a.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a, b);
    return simd::kernels().squared_distance(a.data(), b.data(), a.size());
}

double norm(std::span<const double> a) { return std::sqrt(simd::kernels().dot(a.data(), a.data(), a.size())); }

double cosine_similarity(std::span<const double> x, std::span<const double> t) {
    require_same_dim(x, t);
    const double nx = norm(x);
    const double nt = norm(t);
    if (!(nx > 0.0) || !(nt > 0.0)) {
        throw DegenerateVectorError("cosine similarity of a zero-norm vector",
                                    {{"norm_x", nx}, {"norm_t", nt}});
    }
    const double c = simd::kernels().dot(x.data(), t.data(), x.size()) / (nx * nt);
    return std::clamp(c, -1.0, 1.0);
}

}  // namespace flame::numerics
