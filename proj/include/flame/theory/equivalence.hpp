#pragma once

#include "flame/classifier/svm.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace flame::theory {

/// Probe points covering the bounding box of X inflated by `inflation`
/// (total, split evenly across both sides). Two-dimensional data get a
/// regular per_axis × per_axis grid; other dimensions get per_axis² uniform
/// points drawn from `seed`.
PointSet probe_set(const PointSet& X, std::size_t per_axis = 50, double inflation = 0.2, std::uint64_t seed = 0);

/// Fraction of probe points on which two score vectors share a sign.
double sign_agreement(std::span<const double> a, std::span<const double> b);

struct EquivalenceReport {
    std::optional<double> weight_relative_error;  // linear kernels only
    double bias_error = 0.0;
    double prediction_agreement = 0.0;
    double max_decision_difference = 0.0;
    std::size_t probe_count = 0;
    std::vector<std::size_t> support_set_before;
    std::vector<std::size_t> support_set_after;  // mapped back to indices of the full data
    bool degenerate = false;                     // support holds a single class
    std::string diagnostics;
};

nlohmann::json to_json(const EquivalenceReport& r);

struct RetrainResult {
    classifier::SvmModel full;
    classifier::SvmModel reduced;  // trained on the support set only; empty when degenerate
    EquivalenceReport report;
};

/// Trains on all data, extracts S = {i : α_i > support tolerance}, retrains on
/// S with identical hyperparameters and compares the two classifiers.
/// An rbf kernel must carry an explicit gamma so both runs share it.
RetrainResult retrain_on_support(const PointSet& X, std::span<const int> labels, double C,
                                 const classifier::KernelSpec& kernel, const classifier::SmoOptions& options = {},
                                 std::uint64_t probe_seed = 0);

}  // namespace flame::theory
