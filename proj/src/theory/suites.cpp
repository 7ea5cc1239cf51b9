#include "flame/theory/suites.hpp"

#include "flame/numerics/random.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

namespace flame::theory {

using classifier::KernelSpec;
using nlohmann::json;

namespace {

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

classifier::SmoOptions smo_options(const SuiteOptions& o) {
    classifier::SmoOptions s;
    s.tolerance = o.smo_tolerance;
    return s;
}

std::uint64_t instance_seed(const SuiteOptions& o, std::uint64_t suite, std::size_t i) {
    return o.seed * 1000003ULL + suite * 100003ULL + i;
}

}  // namespace

Instance separable_instance(std::size_t n, std::uint64_t seed, double gap) {
    numerics::Rng rng(seed, 0x73657061ULL);
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double w[2] = {std::cos(angle), std::sin(angle)};
    const double b = rng.uniform(-0.3, 0.3);
    Instance out;
    out.X = PointSet(0, 2);
    std::size_t pos = 0;
    std::size_t neg = 0;
    const std::size_t want_pos = n / 2;
    const std::size_t want_neg = n - want_pos;
    while (pos < want_pos || neg < want_neg) {
        const double x[2] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const double s = w[0] * x[0] + w[1] * x[1] + b;
        if (std::abs(s) < gap) continue;
        if (s > 0.0 && pos < want_pos) {
            out.X.push_back(x);
            out.labels.push_back(1);
            ++pos;
        } else if (s < 0.0 && neg < want_neg) {
            out.X.push_back(x);
            out.labels.push_back(-1);
            ++neg;
        }
    }
    return out;
}

Instance overlapping_instance(std::size_t n, std::uint64_t seed, double separation) {
    numerics::Rng rng(seed, 0x6f7665726cULL);
    Instance out;
    out.X = PointSet(0, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = i % 2 == 0 ? 1 : -1;
        const double x[2] = {rng.normal(0.5 * separation * y, 1.0), rng.normal(0.0, 1.0)};
        out.X.push_back(x);
        out.labels.push_back(y);
    }
    return out;
}

Instance two_blob_instance(std::size_t n, std::uint64_t seed) {
    numerics::Rng rng(seed, 0x626c6f62ULL);
    Instance out;
    out.X = PointSet(0, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = i % 2 == 0 ? 1 : 0;
        const double cy = y == 1 ? 1.0 : -1.0;
        const double x[2] = {rng.normal(2.0, 0.3), rng.normal(cy, 0.3)};
        out.X.push_back(x);
        out.labels.push_back(y);
    }
    return out;
}

json to_json(const SuiteResult& r) {
    return {{"name", r.name},
            {"instances", r.instances},
            {"passed_instances", r.passed_instances},
            {"passed", r.passed()},
            {"seconds", r.seconds},
            {"details", r.details}};
}

SuiteResult run_hard_margin_suite(const SuiteOptions& o) {
    Stopwatch clock;
    SuiteResult result;
    result.name = "hard-margin-support";
    const auto kernel = KernelSpec::linear();
    for (std::size_t i = 0; i < o.hard_instances; ++i) {
        const std::uint64_t seed = instance_seed(o, 1, i);
        const auto inst = separable_instance(o.hard_points, seed);
        json detail = {{"instance", i}, {"seed", seed}};
        bool ok = false;
        try {
            const auto run = retrain_on_support(inst.X, inst.labels, o.hard_C, kernel, smo_options(o), seed);
            const double slack = max_slack(run.full, inst.X, inst.labels);
            if (slack > o.slack_limit) {
                throw NotSeparableError("slack audit failed", {{"max_slack", slack}});
            }
            const auto kkt = kkt_check_hard_margin(run.full, inst.X, inst.labels, 1e-4);
            const auto& r = run.report;
            ok = kkt.passed && !r.degenerate && r.weight_relative_error && *r.weight_relative_error <= 1e-4 &&
                 r.bias_error <= 1e-4 && r.prediction_agreement == 1.0;
            detail["max_slack"] = slack;
            detail["kkt"] = to_json(kkt);
            detail["equivalence"] = to_json(r);
        } catch (const Error& e) {
            detail["error"] = e.to_json();
        }
        detail["passed"] = ok;
        result.passed_instances += ok;
        ++result.instances;
        result.details.push_back(std::move(detail));
    }
    result.seconds = clock.seconds();
    return result;
}

SuiteResult run_soft_margin_suite(const SuiteOptions& o) {
    Stopwatch clock;
    SuiteResult result;
    result.name = "soft-margin-support";
    for (std::size_t i = 0; i < o.soft_instances; ++i) {
        const std::uint64_t seed = instance_seed(o, 2, i);
        const auto inst = overlapping_instance(o.soft_points, seed);
        const auto kernel = KernelSpec::rbf(classifier::default_gamma(inst.X));
        for (double C : o.soft_C) {
            json detail = {{"instance", i}, {"seed", seed}, {"C", C}, {"gamma", kernel.gamma}};
            bool ok = false;
            try {
                const auto run = retrain_on_support(inst.X, inst.labels, C, kernel, smo_options(o), seed);
                const auto kkt = kkt_check_soft_margin(run.full, inst.X, inst.labels, C, 1e-3);
                ok = kkt.passed && !run.report.degenerate && run.report.prediction_agreement >= 0.999 &&
                     run.report.max_decision_difference <= 1e-3;
                detail["kkt"] = to_json(kkt);
                detail["equivalence"] = to_json(run.report);
            } catch (const Error& e) {
                detail["error"] = e.to_json();
            }
            detail["passed"] = ok;
            result.passed_instances += ok;
            ++result.instances;
            result.details.push_back(std::move(detail));
        }
    }
    result.seconds = clock.seconds();
    return result;
}

SuiteResult run_multiplier_extension_suite(const SuiteOptions& o) {
    Stopwatch clock;
    SuiteResult result;
    result.name = "multiplier-extension";
    for (std::size_t i = 0; i < o.soft_instances; ++i) {
        const std::uint64_t seed = instance_seed(o, 3, i);
        const auto inst = overlapping_instance(o.soft_points, seed);
        const auto kernel = KernelSpec::rbf(classifier::default_gamma(inst.X));
        for (double C : o.soft_C) {
            json detail = {{"instance", i}, {"seed", seed}, {"C", C}};
            bool ok = false;
            try {
                const auto full = classifier::train_svm(inst.X, inst.labels, C, kernel, smo_options(o));
                const auto& S = full.support_indices;
                const PointSet XS = inst.X.subset(S);
                std::vector<int> yS;
                for (auto k : S) yS.push_back(inst.labels[k]);
                const auto reduced = classifier::train_svm(XS, yS, C, kernel, smo_options(o));
                const auto reduced_kkt = kkt_check_soft_margin(reduced, XS, yS, C, 1e-3);
                const auto extended = kkt_check_extended(reduced, inst.X, inst.labels, S, C, 1e-3);
                // The extension claim is conditional on the reduced system passing.
                ok = reduced_kkt.passed && extended.passed;
                detail["support_size"] = S.size();
                detail["reduced_kkt"] = to_json(reduced_kkt);
                detail["extended_kkt"] = to_json(extended);
            } catch (const Error& e) {
                detail["error"] = e.to_json();
            }
            detail["passed"] = ok;
            result.passed_instances += ok;
            ++result.instances;
            result.details.push_back(std::move(detail));
        }
    }
    result.seconds = clock.seconds();
    return result;
}

SuiteResult run_homogeneous_suite(const SuiteOptions& o) {
    Stopwatch clock;
    SuiteResult result;
    result.name = "homogeneous-network-support";
    const double scales[] = {0.5, 2.0, 10.0};
    for (std::size_t i = 0; i < o.homogeneous_runs; ++i) {
        const std::uint64_t seed = instance_seed(o, 4, i);
        const auto inst = two_blob_instance(o.homogeneous_points, seed);
        auto opts = o.homogeneous;
        opts.seed = seed;
        json detail = {{"instance", i}, {"seed", seed}};
        bool ok = false;
        try {
            const auto report = homogeneous_gradient_flow_experiment(inst.X, inst.labels, opts);
            const auto init = classifier::MlpModel::initialize(inst.X.dim(), opts.hidden, seed);
            const double scale_err = std::max(report.homogeneity_error, homogeneity_error(init, inst.X, scales));
            ok = scale_err <= 1e-10 && report.prediction_agreement >= 0.99 && !report.inferred_support_set.empty();
            detail["homogeneity_error"] = scale_err;
            detail["report"] = to_json(report);
        } catch (const Error& e) {
            detail["error"] = e.to_json();
        }
        detail["passed"] = ok;
        result.passed_instances += ok;
        ++result.instances;
        result.details.push_back(std::move(detail));
    }
    result.seconds = clock.seconds();
    return result;
}

std::vector<SuiteResult> run_all_suites(const SuiteOptions& options) {
    return {run_hard_margin_suite(options), run_soft_margin_suite(options), run_multiplier_extension_suite(options),
            run_homogeneous_suite(options)};
}

}  // namespace flame::theory
