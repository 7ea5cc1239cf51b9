#pragma once
// Synthetic ambiguous pool: a target and a confuser cluster that are
// separated along a direction orthogonal to the query but whose cosine
// similarities to the query overlap by a tunable amount.

#include "flame/io/pool.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>

namespace flame::pipeline {

struct SyntheticBenchmarkSpec {
    std::size_t dim = 64;
    std::size_t pool_size = 5000;
    double positive_fraction = 0.3;
    double separation = 6.0;    // distance between class centres, in cluster-std units
    double overlap = 0.8;       // 0: cosine scores separate the classes; 1: identical score distributions
    double cluster_std = 0.05;  // per-coordinate noise before normalisation
    std::uint64_t seed = 0;

    /// ConfigError naming the field.
    void validate() const;
};

nlohmann::json to_json(const SyntheticBenchmarkSpec& s);

struct SyntheticBenchmark {
    io::Pool pool;
    io::GroundTruth truth;
    Vector query;
};

/// Each record is x = c·u + √(1 − c²)·w with u the unit query, c its exact
/// cosine, and w the normalised component orthogonal to u of a Gaussian draw
/// around its class centre. Confuser cosines are U[0.3, 0.6]; target cosines
/// are the same interval shifted up by 0.3·(1 − overlap). Deterministic per seed.
SyntheticBenchmark generate_synthetic_benchmark(const SyntheticBenchmarkSpec& spec);

}  // namespace flame::pipeline
