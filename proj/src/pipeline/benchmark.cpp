#include "flame/pipeline/benchmark.hpp"

#include "flame/numerics/random.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <utility>

namespace flame::pipeline {

void SyntheticBenchmarkSpec::validate() const {
    const auto reject = [](const char* field, const std::string& msg) {
        throw ConfigError(std::string(field) + ": " + msg, {{"field", field}});
    };
    if (dim < 3) reject("dim", "must be at least 3");
    if (pool_size < 2) reject("pool_size", "must be at least 2");
    if (!(positive_fraction > 0.0 && positive_fraction < 1.0)) reject("positive_fraction", "must lie in (0, 1)");
    if (!(separation >= 0.0) || !std::isfinite(separation)) reject("separation", "must be >= 0");
    if (!(overlap >= 0.0 && overlap <= 1.0)) reject("overlap", "must lie in [0, 1]");
    if (!(cluster_std > 0.0) || !std::isfinite(cluster_std)) reject("cluster_std", "must be > 0");
}

nlohmann::json to_json(const SyntheticBenchmarkSpec& s) {
    return {{"dim", s.dim},
            {"pool_size", s.pool_size},
            {"positive_fraction", s.positive_fraction},
            {"separation", s.separation},
            {"overlap", s.overlap},
            {"cluster_std", s.cluster_std},
            {"seed", s.seed}};
}

namespace {

double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void normalize(Vector& v) {
    const double n = std::sqrt(dot(v, v));
    for (auto& x : v) x /= n;
}

// Removes the components along each (unit) basis vector.
void orthogonalize(Vector& v, std::initializer_list<const Vector*> basis) {
    for (const Vector* b : basis) {
        const double p = dot(v, *b);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * (*b)[i];
    }
}

Vector random_unit(numerics::Rng& rng, std::size_t dim, std::initializer_list<const Vector*> basis) {
    for (;;) {
        Vector v(dim);
        for (auto& x : v) x = rng.normal();
        orthogonalize(v, basis);
        if (dot(v, v) > 1e-6) {
            normalize(v);
            return v;
        }
    }
}

}  // namespace

SyntheticBenchmark generate_synthetic_benchmark(const SyntheticBenchmarkSpec& spec) {
    spec.validate();
    numerics::Rng rng(spec.seed, 0x62656e6368ULL);
    const std::size_t d = spec.dim;
    const Vector u = random_unit(rng, d, {});
    const Vector v = random_unit(rng, d, {&u});
    const Vector m = random_unit(rng, d, {&u, &v});

    const auto n_pos = static_cast<std::size_t>(std::llround(spec.positive_fraction * static_cast<double>(spec.pool_size)));
    std::vector<int> labels(spec.pool_size, 0);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_pos), 1);
    for (std::size_t i = labels.size(); i-- > 1;) std::swap(labels[i], labels[rng.index(i + 1)]);

    const double shift = 0.3 * (1.0 - spec.overlap);
    const double half_gap = 0.5 * spec.separation * spec.cluster_std;

    SyntheticBenchmark out;
    out.query = u;
    char id[32];
    Vector z(d);
    for (std::size_t i = 0; i < spec.pool_size; ++i) {
        const int y = labels[i];
        const double c = y == 1 ? rng.uniform(0.3 + shift, 0.6 + shift) : rng.uniform(0.3, 0.6);
        const double side = y == 1 ? 1.0 : -1.0;
        for (std::size_t k = 0; k < d; ++k) z[k] = m[k] + side * half_gap * v[k] + spec.cluster_std * rng.normal();
        orthogonalize(z, {&u});
        normalize(z);
        const double s = std::sqrt(1.0 - c * c);
        io::PoolRecord rec;
        std::snprintf(id, sizeof id, "p%06zu", i);
        rec.id = id;
        rec.vector.resize(d);
        for (std::size_t k = 0; k < d; ++k) rec.vector[k] = c * u[k] + s * z[k];
        out.truth.set(rec.id, y);
        out.pool.add(std::move(rec));
    }
    return out;
}

}  // namespace flame::pipeline
