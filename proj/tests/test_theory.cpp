#include "flame/theory/equivalence.hpp"
#include "flame/theory/homogeneous.hpp"
#include "flame/theory/kkt.hpp"
#include "flame/theory/suites.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace flame;
using namespace flame::theory;
using classifier::KernelSpec;

namespace {

classifier::SmoOptions tight() {
    classifier::SmoOptions o;
    o.tolerance = 1e-9;
    return o;
}

}  // namespace

TEST_CASE("hard-margin KKT on the 2-point problem is exact") {
    const PointSet X = PointSet::from_rows({{1, 0}, {-1, 0}});
    const std::vector<int> y = {1, -1};
    const auto m = classifier::train_svm(X, y, 10.0, KernelSpec::linear(), tight());
    const auto r = kkt_check_hard_margin(m, X, y);
    CHECK(r.passed);
    CHECK(r.max_residual() <= 1e-10);
    for (double v : {r.stationarity_residual, r.primal_violation, r.dual_violation, r.slackness_residual}) CHECK(v >= 0.0);
}

TEST_CASE("perturbing one multiplier breaks the hard-margin report") {
    const auto inst = separable_instance(60, 4);
    auto m = classifier::train_svm(inst.X, inst.labels, 1e6, KernelSpec::linear(), tight());
    CHECK(kkt_check_hard_margin(m, inst.X, inst.labels, 1e-4).passed);
    m.alphas[0] += 0.1;
    const auto r = kkt_check_hard_margin(m, inst.X, inst.labels, 1e-4);
    CHECK(!r.passed);
    CHECK(std::max(r.stationarity_residual, r.slackness_residual) > 1e-2);
}

TEST_CASE("hard-margin check rejects rbf models and inseparable data") {
    const auto inst = overlapping_instance(60, 2, 0.5);
    const auto rbf = classifier::train_svm(inst.X, inst.labels, 1.0, KernelSpec::rbf(1.0));
    CHECK_THROWS_AS(kkt_check_hard_margin(rbf, inst.X, inst.labels), ConfigError);
    const auto lin = classifier::train_svm(inst.X, inst.labels, 1.0, KernelSpec::linear());
    CHECK_THROWS_AS(kkt_check_hard_margin(lin, inst.X, inst.labels), NotSeparableError);
}

TEST_CASE("soft-margin KKT passes on trained models and reduces to hard margin for large C") {
    const auto sep = separable_instance(60, 1);
    const auto hard = classifier::train_svm(sep.X, sep.labels, 1e6, KernelSpec::linear(), tight());
    CHECK(kkt_check_soft_margin(hard, sep.X, sep.labels, 1e6, 1e-3).passed);
    CHECK(max_slack(hard, sep.X, sep.labels) <= 1e-6);

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto inst = overlapping_instance(80, seed);
        const auto m = classifier::train_svm(inst.X, inst.labels, 1.0, KernelSpec::rbf(classifier::default_gamma(inst.X)));
        const auto r = kkt_check_soft_margin(m, inst.X, inst.labels, 1.0, 1e-3);
        CHECK(r.passed);
        // Monotone in tolerance.
        CHECK(r.passes_at(1e-2));
        CHECK(r.passes_at(1.0));
    }
}

TEST_CASE("bound multipliers give beta=0 and positive slack with exact slackness") {
    // A positive point placed deep inside the negative class must end at α = C.
    const PointSet X = PointSet::from_rows({{2, 0}, {2.5, 0.3}, {-2, 0}, {-2.4, -0.2}, {-2.1, 0.1}});
    const std::vector<int> y = {1, 1, -1, -1, 1};
    const double C = 0.5;
    const auto m = classifier::train_svm(X, y, C, KernelSpec::linear(), tight());
    const auto alpha = m.full_alphas();
    CHECK(alpha[4] == doctest::Approx(C));
    KktSystem sys;
    sys.labels = y;
    sys.alpha = alpha;
    for (std::size_t i = 0; i < 5; ++i) {
        const double f = classifier::svm_decision(m, X.row(i));
        sys.decision.push_back(f);
        sys.xi.push_back(std::max(0.0, 1.0 - y[i] * f));
        sys.beta.push_back(C - alpha[i]);
    }
    CHECK(sys.beta[4] == doctest::Approx(0.0));
    CHECK(sys.xi[4] > 1.0);
    CHECK(std::abs(sys.alpha[4] * (y[4] * sys.decision[4] - 1.0 + sys.xi[4])) <= 1e-9);
    CHECK(kkt_check_soft_margin(m, X, y, C, 1e-3).passed);
}

TEST_CASE("probe grid covers the inflated bounding box") {
    const PointSet X = PointSet::from_rows({{0, 0}, {10, 0}, {0, 5}});
    const auto P = probe_set(X);
    CHECK(P.size() == 2500);
    double lo0 = 1e9, hi0 = -1e9, lo1 = 1e9, hi1 = -1e9;
    for (std::size_t i = 0; i < P.size(); ++i) {
        lo0 = std::min(lo0, P.row(i)[0]);
        hi0 = std::max(hi0, P.row(i)[0]);
        lo1 = std::min(lo1, P.row(i)[1]);
        hi1 = std::max(hi1, P.row(i)[1]);
    }
    CHECK(lo0 == doctest::Approx(-1.0));
    CHECK(hi0 == doctest::Approx(11.0));
    CHECK(lo1 == doctest::Approx(-0.5));
    CHECK(hi1 == doctest::Approx(5.5));
    const std::vector<double> a = {1, -1, 2, -3}, b = {2, -1, -1, -3};
    CHECK(sign_agreement(a, b) == 0.75);
}

TEST_CASE("retrain on support: 2-point problem and separable set") {
    const PointSet X = PointSet::from_rows({{1, 0}, {-1, 0}});
    const std::vector<int> y = {1, -1};
    const auto two = retrain_on_support(X, y, 10.0, KernelSpec::linear(), tight());
    CHECK(two.report.support_set_before == std::vector<std::size_t>{0, 1});
    CHECK(two.report.prediction_agreement == 1.0);

    const auto inst = separable_instance(60, 8);
    const auto r = retrain_on_support(inst.X, inst.labels, 1e6, KernelSpec::linear(), tight()).report;
    REQUIRE(r.weight_relative_error);
    CHECK(*r.weight_relative_error <= 1e-4);
    CHECK(r.bias_error <= 1e-4);
    CHECK(r.prediction_agreement == 1.0);
    CHECK(r.probe_count >= 1000);
    CHECK(!r.degenerate);
}

TEST_CASE("retrain on support: overlapping rbf soft margin") {
    const auto inst = overlapping_instance(80, 6);
    const double gamma = classifier::default_gamma(inst.X);
    const auto res = retrain_on_support(inst.X, inst.labels, 1.0, KernelSpec::rbf(gamma), tight());
    CHECK(res.report.prediction_agreement >= 0.999);
    CHECK(res.report.max_decision_difference <= 1e-3);
    CHECK(!res.report.weight_relative_error);
    CHECK(kkt_check_extended(res.reduced, inst.X, inst.labels, res.report.support_set_before, 1.0, 1e-3).passed);
}

TEST_CASE("homogeneity identity and margin invariance are exact") {
    const auto inst = two_blob_instance(40, 2);
    HomogeneousOptions o;
    o.steps = 2000;
    const auto trained = train_homogeneous(inst.X, inst.labels, o);
    const std::vector<double> scales = {0.5, 2.0, 10.0};
    CHECK(homogeneity_error(trained.model, inst.X, scales) <= 1e-10);
    CHECK(margin_scale_error(trained.model, inst.X, inst.labels, scales) <= 1e-10);

    auto doubled = trained.model;
    auto theta = doubled.parameters();
    for (auto& t : theta) t *= 2.0;
    doubled.set_parameters(theta);
    for (std::size_t i = 0; i < inst.X.size(); ++i) {
        const double f = classifier::mlp_forward(trained.model, inst.X.row(i));
        CHECK(std::abs(classifier::mlp_forward(doubled, inst.X.row(i)) - 4.0 * f) <= 1e-10 * std::abs(4.0 * f));
    }
}

TEST_CASE("inferred support keeps margins within the tolerance band") {
    const std::vector<double> m = {0.5, 0.52, 0.549, 0.56, 2.0};
    CHECK(inferred_support(m, 0.1) == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("homogeneous experiment reaches the documented agreement") {
    const auto inst = two_blob_instance(40, 0);
    const auto r = homogeneous_gradient_flow_experiment(inst.X, inst.labels);
    CHECK(r.training_accuracy == 1.0);
    CHECK(r.prediction_agreement >= 0.99);
    CHECK(!r.inferred_support_set.empty());
    for (double v : r.normalized_margins) CHECK(std::isfinite(v));
    CHECK(r.homogeneity_error <= 1e-10);
}

TEST_CASE("homogeneous experiment refuses inseparable data") {
    PointSet X = PointSet::from_rows({{1, 0}, {1, 0}, {-1, 0}, {-1, 0.1}});
    const std::vector<int> y = {1, 0, 0, 1};
    HomogeneousOptions o;
    o.steps = 500;
    CHECK_THROWS_AS(homogeneous_gradient_flow_experiment(X, y, o), NotSeparableError);
}

TEST_CASE("reduced suites pass and report per-instance details") {
    SuiteOptions o;
    o.hard_instances = 10;
    o.soft_instances = 5;
    o.homogeneous_runs = 1;
    const auto hard = run_hard_margin_suite(o);
    CHECK(hard.name == "hard-margin-support");
    CHECK(hard.passed());
    CHECK(hard.details.size() == hard.instances);
    CHECK(run_soft_margin_suite(o).passed());
    CHECK(run_multiplier_extension_suite(o).passed());
    const auto j = to_json(hard);
    CHECK(j["passed"] == true);
}
