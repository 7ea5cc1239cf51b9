#include "flame/pipeline/evaluate.hpp"

#include <algorithm>
#include <cstdio>

namespace flame::pipeline {

void rank_items(std::vector<ScoredItem>& items) {
    std::sort(items.begin(), items.end(), [](const ScoredItem& a, const ScoredItem& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
}

namespace {

struct Ranked {
    std::vector<double> precision_at_positive;  // raw precision at each positive's rank
    std::size_t positives = 0;
};

Ranked scan(const std::vector<ScoredItem>& ranked) {
    Ranked out;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        if (ranked[k].gt != 0 && ranked[k].gt != 1) throw FormatError("ground truth of '" + ranked[k].id + "' is not binary");
        if (ranked[k].gt == 1) {
            ++hits;
            out.precision_at_positive.push_back(static_cast<double>(hits) / static_cast<double>(k + 1));
        }
    }
    out.positives = hits;
    if (hits == 0) throw NoPositivesError("ground truth holds no positives; AP is undefined", {{"items", ranked.size()}});
    return out;
}

double envelope_ap(std::vector<double> precision) {
    // Precision only falls between positives, so the envelope over all later
    // ranks equals the running maximum over later positives.
    for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
    double sum = 0.0;
    for (double p : precision) sum += p;
    return sum / static_cast<double>(precision.size());
}

}  // namespace

double average_precision(std::vector<ScoredItem> items) {
    rank_items(items);
    return envelope_ap(scan(items).precision_at_positive);
}

EvalReport evaluate(std::vector<ScoredItem> items, double threshold) {
    rank_items(items);
    const auto ranked = scan(items);
    EvalReport r;
    r.threshold = threshold;
    r.positives = ranked.positives;
    r.total = items.size();
    r.average_precision = envelope_ap(ranked.precision_at_positive);
    for (std::size_t p = 0; p < ranked.precision_at_positive.size(); ++p) {
        r.curve.push_back({static_cast<double>(p + 1) / static_cast<double>(ranked.positives),
                           ranked.precision_at_positive[p]});
    }
    for (const auto& it : items) {
        const bool predicted = it.score > threshold;
        if (predicted && it.gt == 1) ++r.tp;
        else if (predicted) ++r.fp;
        else if (it.gt == 1) ++r.fn;
        else ++r.tn;
    }
    return r;
}

nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& p : r.curve) curve.push_back({p.recall, p.precision});
    nlohmann::json j = {{"average_precision", r.average_precision},
                        {"threshold", r.threshold},
                        {"counts", {{"tp", r.tp}, {"fp", r.fp}, {"fn", r.fn}, {"tn", r.tn}}},
                        {"positives", r.positives},
                        {"total", r.total},
                        {"pr_curve", curve}};
    j["baseline_ap"] = r.baseline_ap ? nlohmann::json(*r.baseline_ap) : nlohmann::json();
    return j;
}

std::string pr_curve_csv(const EvalReport& r) {
    std::string out = "recall,precision\n";
    char buf[64];
    for (const auto& p : r.curve) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.recall, p.precision);
        out += buf;
    }
    return out;
}

}  // namespace flame::pipeline
