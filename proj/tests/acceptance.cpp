// Acceptance run: one PASS/FAIL line per top-level criterion; exit status 1
// if any criterion fails.
#include "flame/classifier/mlp.hpp"
#include "flame/classifier/model_io.hpp"
#include "flame/classifier/svm.hpp"
#include "flame/cli/cli.hpp"
#include "flame/io/pool.hpp"
#include "flame/io/session.hpp"
#include "flame/numerics/kde.hpp"
#include "flame/numerics/pca.hpp"
#include "flame/numerics/random.hpp"
#include "flame/numerics/vector_ops.hpp"
#include "flame/pipeline/benchmark.hpp"
#include "flame/pipeline/evaluate.hpp"
#include "flame/pipeline/flame.hpp"
#include "flame/sampler/sampler.hpp"
#include "flame/service/service.hpp"
#include "flame/theory/suites.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include <unistd.h>

using namespace flame;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<std::vector<double>> rows(const PointSet& X) {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < X.size(); ++i) out.push_back(X.row_vector(i));
    return out;
}

double rel_err(const Vector& a, const Vector& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num / den);
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("flame-accept-" + tag + "-" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

// ---------------------------------------------------------------------------

Outcome hard_margin_support() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = theory::run_hard_margin_suite(theory::SuiteOptions{});
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::size_t ok = 0;
    double worst_w = 0.0, worst_b = 0.0, worst_agree = 1.0;
    for (const auto& d : r.details) {
        if (!d.contains("equivalence")) continue;
        const auto& e = d["equivalence"];
        const double w = e["weight_relative_error"].is_null() ? 1e300 : e["weight_relative_error"].get<double>();
        const double b = e["bias_error"].get<double>();
        const double agree = e["prediction_agreement"].get<double>();
        worst_w = std::max(worst_w, w);
        worst_b = std::max(worst_b, b);
        worst_agree = std::min(worst_agree, agree);
        ok += w <= 1e-4 && b <= 1e-4 && agree == 1.0 && e["probe_count"].get<std::size_t>() == 2500;
    }
    const bool pass = r.instances == 100 && ok == 100 && r.passed_instances == 100 && seconds < 30.0;
    return {pass, fmt("%zu/%zu instances, max weight err %.2e, max bias err %.2e, min agreement %.4f, %.2f s", ok,
                      r.instances, worst_w, worst_b, worst_agree, seconds)};
}

Outcome soft_margin_support() {
    theory::SuiteOptions o;
    const auto soft = theory::run_soft_margin_suite(o);
    std::size_t ok = 0;
    double worst_agree = 1.0, worst_kkt = 0.0;
    for (const auto& d : soft.details) {
        if (!d.contains("kkt")) continue;
        const bool kkt = d["kkt"]["passed"].get<bool>();
        const double agree = d["equivalence"]["prediction_agreement"].get<double>();
        worst_agree = std::min(worst_agree, agree);
        worst_kkt = std::max(worst_kkt, d["kkt"]["max_residual"].get<double>());
        ok += kkt && agree >= 0.999;
    }
    const auto ext = theory::run_multiplier_extension_suite(o);
    const bool pass = soft.instances == 150 && ok == 150 && soft.passed() && ext.passed();
    return {pass, fmt("%zu/%zu instances (50 x C in {0.5,1,10}), max KKT residual %.2e, min agreement %.4f; "
                      "multiplier extension %zu/%zu",
                      ok, soft.instances, worst_kkt, worst_agree, ext.passed_instances, ext.instances)};
}

Outcome homogeneous_network() {
    const auto r = theory::run_homogeneous_suite(theory::SuiteOptions{});
    double worst_h = 0.0, worst_agree = 1.0;
    std::size_t ok = 0;
    for (const auto& d : r.details) {
        if (!d.contains("report")) continue;
        const double h = d["homogeneity_error"].get<double>();
        const double a = d["report"]["prediction_agreement"].get<double>();
        worst_h = std::max(worst_h, h);
        worst_agree = std::min(worst_agree, a);
        ok += h <= 1e-10 && a >= 0.99;
    }
    return {ok == r.instances && r.passed(),
            fmt("%zu/%zu runs, max homogeneity err %.2e, min agreement %.4f", ok, r.instances, worst_h, worst_agree)};
}

Outcome numeric_oracles() {
    numerics::Rng rng(2024);

    // KDE against a long-double direct sum.
    double kde_err = 0.0;
    for (std::size_t l : {1u, 2u}) {
        PointSet X(0, l);
        Vector x(l);
        for (int i = 0; i < 500; ++i) {
            for (auto& v : x) v = rng.normal();
            X.push_back(x);
        }
        const auto samples = rows(X);
        const numerics::KdeModel kde(X, numerics::scott_bandwidth(X));
        for (int q = 0; q < 50; ++q) {
            for (auto& v : x) v = 2.0 * rng.normal();
            const double want = oracle::kde_density(samples, kde.bandwidth(), x);
            kde_err = std::max(kde_err, std::abs(kde.density(x) - want) / want);
        }
    }

    // PCA against cyclic Jacobi, sign-adjusted.
    double pca_err = 0.0;
    {
        PointSet X(0, 6);
        Vector x(6);
        for (int i = 0; i < 300; ++i) {
            for (std::size_t k = 0; k < 6; ++k) x[k] = rng.normal() * (4.0 / (1.0 + k));
            X.push_back(x);
        }
        const auto eig = oracle::jacobi_eigen(oracle::covariance(rows(X)));
        const auto m = numerics::fit_pca(X, 3);
        for (std::size_t j = 0; j < 3; ++j) {
            double d = 0.0;
            for (std::size_t i = 0; i < 6; ++i) d += m.components.row(j)[i] * eig.vectors[i][j];
            const double s = d < 0 ? -1.0 : 1.0;
            for (std::size_t i = 0; i < 6; ++i) pca_err = std::max(pca_err, std::abs(m.components.row(j)[i] - s * eig.vectors[i][j]));
        }
    }

    // SMO against the dense dual QP.
    double smo_w = 0.0, smo_b = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto inst = theory::separable_instance(60, 500 + seed);
        classifier::SmoOptions opts;
        opts.tolerance = 1e-9;
        const auto m = classifier::train_svm(inst.X, inst.labels, 1e6, classifier::KernelSpec::linear(), opts);
        const auto ref = oracle::dual_qp_linear_svm(rows(inst.X), inst.labels, 1e6, 400000, 1e-13);
        smo_w = std::max(smo_w, rel_err(classifier::linear_weights(m), ref.w));
        smo_b = std::max(smo_b, std::abs(m.bias - ref.b) / std::max(1.0, std::abs(ref.b)));
    }

    // AP against the definitional envelope.
    bool ap_exact = true;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        numerics::Rng r(seed);
        std::vector<pipeline::ScoredItem> items;
        std::vector<std::pair<std::string, std::pair<double, int>>> ref;
        for (int i = 0; i < 50; ++i) {
            const std::string id = fmt("it%03d", i);
            const double s = std::round(r.normal() * 4.0) / 4.0;
            const int gt = i == 0 || r.uniform() < 0.3;
            items.push_back({id, s, gt});
            ref.push_back({id, {s, gt}});
        }
        ap_exact &= pipeline::average_precision(items) == oracle::average_precision(ref);
    }

    // MLP gradient against central differences.
    double mlp_err = 0.0;
    int mlp_checked = 0;
    {
        PointSet X(0, 4);
        std::vector<int> y;
        for (int i = 0; i < 30; ++i) {
            X.push_back(Vector{rng.normal(), rng.normal(), rng.normal(), rng.normal()});
            y.push_back(i % 3 == 0);
        }
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            auto m = classifier::MlpModel::initialize(4, 6, seed);
            bool near_kink = false;
            for (std::size_t i = 0; i < X.size() && !near_kink; ++i)
                for (std::size_t j = 0; j < m.hidden; ++j)
                    near_kink |= std::abs(numerics::dot(m.first_layer.row(j), X.row(i))) < 1e-3;
            if (near_kink) continue;
            const auto analytic = classifier::mlp_loss_gradient(m, X, y).gradient;
            const auto numeric = oracle::central_gradient(
                [&](const std::vector<double>& t) {
                    auto mm = m;
                    mm.set_parameters(t);
                    return classifier::mlp_loss_gradient(mm, X, y).loss;
                },
                m.parameters(), 1e-5);
            for (std::size_t k = 0; k < numeric.size(); ++k)
                mlp_err = std::max(mlp_err, std::abs(analytic[k] - numeric[k]) / std::max(std::abs(numeric[k]), 1e-3));
            ++mlp_checked;
        }
    }

    const bool pass = kde_err <= 1e-12 && pca_err <= 1e-8 && smo_w <= 1e-3 && smo_b <= 1e-3 && ap_exact &&
                      mlp_checked >= 4 && mlp_err <= 1e-4;
    return {pass, fmt("KDE %.1e, PCA %.1e, SMO w %.1e b %.1e, AP %s, MLP grad %.1e (%d inits)", kde_err, pca_err, smo_w,
                      smo_b, ap_exact ? "exact" : "MISMATCH", mlp_err, mlp_checked)};
}

Outcome smote_geometry() {
    numerics::Rng rng(31);
    auto shot = [](Vector v, int label) {
        sampler::LabeledShot s;
        s.augmented = std::move(v);
        s.label = label;
        return s;
    };
    std::size_t total = 0, on_segment = 0;
    double worst = 0.0;
    for (std::size_t minority : {2u, 3u, 6u, 10u}) {
        std::vector<sampler::LabeledShot> l;
        for (std::size_t i = 0; i < minority; ++i) l.push_back(shot({rng.normal(), rng.normal(), rng.normal()}, 1));
        for (int i = 0; i < 40; ++i) l.push_back(shot({rng.normal() + 4, rng.normal(), rng.normal()}, 0));
        const auto syn = sampler::smote(l, 5, 300, 7 + minority);
        for (const auto& s : syn) {
            double best = 1e300;
            for (std::size_t a = 0; a < minority; ++a)
                for (std::size_t b = a + 1; b < minority; ++b)
                    best = std::min(best, oracle::segment_residual(s.augmented, l[a].augmented, l[b].augmented));
            worst = std::max(worst, best);
            on_segment += best <= 1e-10 && s.synthetic && s.label == 1;
            ++total;
        }
    }

    // Count equalisation above the threshold, identity at or below it.
    sampler::FlameConfig c;
    bool counts_ok = true, identity_ok = true;
    for (auto [neg, pos] : {std::pair{25, 5}, std::pair{29, 1}, std::pair{21, 10}, std::pair{5, 16}}) {
        std::vector<sampler::LabeledShot> l;
        for (int i = 0; i < neg; ++i) l.push_back(shot({1.0 * i, 0.0}, 0));
        for (int i = 0; i < pos; ++i) l.push_back(shot({1.0 * i, 3.0}, 1));
        const auto out = sampler::build_training_set(l, c);
        std::size_t p = 0;
        for (const auto& s : out) p += s.label == 1;
        const std::size_t big = std::max(neg, pos);
        counts_ok &= p == big && out.size() - p == big;
    }
    for (auto [neg, pos] : {std::pair{8, 4}, std::pair{10, 10}, std::pair{3, 5}}) {
        std::vector<sampler::LabeledShot> l;
        for (int i = 0; i < neg; ++i) l.push_back(shot({1.0 * i, 0.0}, 0));
        for (int i = 0; i < pos; ++i) l.push_back(shot({1.0 * i, 3.0}, 1));
        const auto out = sampler::build_training_set(l, c);
        identity_ok &= out.size() == l.size();
        for (std::size_t i = 0; i < out.size() && i < l.size(); ++i)
            identity_ok &= out[i].augmented == l[i].augmented && out[i].label == l[i].label && !out[i].synthetic;
    }
    return {on_segment == total && counts_ok && identity_ok,
            fmt("%zu/%zu synthetics on minority segments (max residual %.1e); equalised counts %s; identity below gate %s",
                on_segment, total, worst, counts_ok ? "ok" : "WRONG", identity_ok ? "ok" : "WRONG")};
}

Outcome benchmark_gain() {
    std::size_t wins = 0;
    double max_seconds = 0.0, min_gain = 1e9;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        pipeline::SyntheticBenchmarkSpec spec;  // n=5000, d=64
        spec.seed = seed;
        const auto b = pipeline::generate_synthetic_benchmark(spec);
        sampler::FlameConfig cfg;  // K=30
        cfg.seed = seed;
        pipeline::TruthOracle oracle(b.truth);
        const auto run = pipeline::run_flame(b.pool, b.truth, b.query, cfg, oracle);
        const double gain = run.report->average_precision - *run.report->baseline_ap;
        wins += gain >= 0.15;
        min_gain = std::min(min_gain, gain);
        max_seconds = std::max(max_seconds, run.post_label_seconds);
    }
    return {wins >= 18 && max_seconds < 60.0,
            fmt("gain >= 0.15 in %zu/20 seeds (min gain %.3f), max post-labeling %.3f s", wins, min_gain, max_seconds)};
}

Outcome determinism() {
    TempDir tmp("det");
    const auto run_cli = [](std::vector<std::string> args) {
        std::istringstream in;
        std::ostringstream out, err;
        return cli::run(args, in, out, err);
    };
    const std::string dir = tmp.path.string();
    if (run_cli({"--seed", "7", "--out-dir", dir, "bench", "--pool-size", "2000", "--dim", "32", "--save-pool"}) != 0)
        return {false, "bench --save-pool failed"};
    const std::string pool = (tmp.path / "pool.jsonl").string(), query = (tmp.path / "query.json").string();

    // Two CLI runs into separate directories.
    std::vector<std::string> shots_text, model_text;
    for (const char* name : {"a", "b"}) {
        const fs::path out = tmp.path / name;
        fs::create_directories(out);
        const std::vector<std::string> g = {"--seed", "7", "--out-dir", out.string()};
        auto with = [&](std::vector<std::string> rest) {
            auto v = g;
            v.insert(v.end(), rest.begin(), rest.end());
            return run_cli(v);
        };
        const std::string shots = (out / "shots.json").string();
        if (with({"sample", "--pool", pool, "--query", query}) != 0 ||
            with({"label", "--shots", shots, "--from-truth", "--pool", pool}) != 0 ||
            with({"train", "--pool", pool, "--query", query, "--shots", shots, "--labels", (out / "labels.csv").string()}) != 0)
            return {false, "CLI pipeline failed"};
        shots_text.push_back(io::read_text_file(out / "shots.json"));
        model_text.push_back(io::read_text_file(out / "model.json"));
    }

    // Service path with the same pool, query and seed.
    service::ServiceConfig cfg;
    cfg.data_dir = tmp.path / "svc";
    service::AnnotationService svc(cfg);
    const auto created = svc.create_session({{"pool", pool}, {"query", query}, {"seed", 7}});
    if (created.status != 201) return {false, "service create failed: " + created.body.dump()};
    const std::string id = created.body["id"];
    const auto truth = io::load_ground_truth(pool);
    const auto cands = svc.get_candidates(id).body["candidates"];
    json labels = json::object();
    for (const auto& c : cands) labels[c["shot_id"].get<std::string>()] = *truth.label(c["shot_id"].get<std::string>());
    if (svc.submit_labels(id, {{"labels", labels}}).status != 200 || svc.train(id, json::object()).status != 200)
        return {false, "service labeling or training failed"};
    shots_text.push_back(io::read_text_file(svc.session_dir(id) / "shots.json"));
    model_text.push_back(io::read_text_file(svc.session_dir(id) / "model.json"));

    const bool cli_same = shots_text[0] == shots_text[1] && model_text[0] == model_text[1];
    const bool svc_same = shots_text[0] == shots_text[2] && model_text[0] == model_text[2];
    return {cli_same && svc_same, fmt("CLI run vs CLI run: %s; CLI vs service: %s (shots %zu bytes, model %zu bytes)",
                                      cli_same ? "identical" : "DIFFERENT", svc_same ? "identical" : "DIFFERENT",
                                      shots_text[0].size(), model_text[0].size())};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"hard-margin support retraining", hard_margin_support},
        {"soft-margin support retraining", soft_margin_support},
        {"homogeneous network support", homogeneous_network},
        {"numeric oracles", numeric_oracles},
        {"SMOTE geometry and balancing", smote_geometry},
        {"synthetic benchmark gain", benchmark_gain},
        {"determinism", determinism},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
        failed += !o.pass;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
