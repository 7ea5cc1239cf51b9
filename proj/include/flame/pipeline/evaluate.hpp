#pragma once

#include "flame/error.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace flame::pipeline {

struct ScoredItem {
    std::string id;
    double score = 0.0;
    int gt = 0;  // 0/1
};

struct PrPoint {
    double recall = 0.0;
    double precision = 0.0;
};

struct EvalReport {
    std::vector<PrPoint> curve;  // one point per positive, in rank order
    double average_precision = 0.0;
    double threshold = 0.0;  // score > threshold counts as a positive prediction
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
    std::size_t positives = 0;
    std::size_t total = 0;
    std::optional<double> baseline_ap;
};

/// Sorts by score descending, ties by id ascending.
void rank_items(std::vector<ScoredItem>& items);

/// All-points average precision over the ranking: the mean, over positives,
/// of the precision envelope max_{j ≥ rank} precision(j). NoPositivesError if
/// no item is positive.
double average_precision(std::vector<ScoredItem> items);

EvalReport evaluate(std::vector<ScoredItem> items, double threshold = 0.0);

nlohmann::json to_json(const EvalReport& r);
/// "recall,precision" rows with a header line.
std::string pr_curve_csv(const EvalReport& r);

}  // namespace flame::pipeline
