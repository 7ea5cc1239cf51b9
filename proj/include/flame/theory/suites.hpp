#pragma once
// Seeded verification suites for the support-set results: hard-margin and
// soft-margin retraining on the support set, multiplier extension, and the
// homogeneous-network experiment.

#include "flame/theory/equivalence.hpp"
#include "flame/theory/homogeneous.hpp"
#include "flame/theory/kkt.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace flame::theory {

struct Instance {
    PointSet X;
    std::vector<int> labels;  // ±1 for SVM instances, 0/1 for network instances
};

/// n points in [−1, 1]², half per class, split by a random line and kept at
/// least `gap` away from it.
Instance separable_instance(std::size_t n, std::uint64_t seed, double gap = 0.05);

/// Two unit-variance Gaussians centred at (±separation/2, 0), n/2 points each.
Instance overlapping_instance(std::size_t n, std::uint64_t seed, double separation = 1.5);

/// Two tight blobs on either side of the line through the origin, labels 0/1.
Instance two_blob_instance(std::size_t n, std::uint64_t seed);

struct SuiteResult {
    std::string name;
    std::size_t instances = 0;
    std::size_t passed_instances = 0;
    double seconds = 0.0;
    nlohmann::json details = nlohmann::json::array();

    bool passed() const noexcept { return instances > 0 && passed_instances == instances; }
};

nlohmann::json to_json(const SuiteResult& r);

struct SuiteOptions {
    std::uint64_t seed = 0;
    double smo_tolerance = 1e-9;  // tighter than the pipeline default; the checks run at 1e-4
    std::size_t hard_instances = 100;
    std::size_t hard_points = 60;
    double hard_C = 1e6;
    double slack_limit = 1e-6;
    std::size_t soft_instances = 50;
    std::size_t soft_points = 80;
    std::vector<double> soft_C = {0.5, 1.0, 10.0};
    std::size_t homogeneous_runs = 5;
    std::size_t homogeneous_points = 40;
    HomogeneousOptions homogeneous;
};

SuiteResult run_hard_margin_suite(const SuiteOptions& options);
SuiteResult run_soft_margin_suite(const SuiteOptions& options);
SuiteResult run_multiplier_extension_suite(const SuiteOptions& options);
SuiteResult run_homogeneous_suite(const SuiteOptions& options);

/// All four suites in a fixed order.
std::vector<SuiteResult> run_all_suites(const SuiteOptions& options);

}  // namespace flame::theory
