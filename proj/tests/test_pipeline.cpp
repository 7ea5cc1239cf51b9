#include "flame/classifier/model_io.hpp"
#include "flame/io/session.hpp"
#include "flame/numerics/random.hpp"
#include "flame/pipeline/benchmark.hpp"
#include "flame/pipeline/evaluate.hpp"
#include "flame/pipeline/flame.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include <unistd.h>

using namespace flame;
using namespace flame::pipeline;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("flame-pipe-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::vector<ScoredItem> random_items(std::uint64_t seed, std::size_t n) {
    numerics::Rng rng(seed);
    std::vector<ScoredItem> items;
    for (std::size_t i = 0; i < n; ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "it%03zu", i);
        // Coarse scores so ties occur and exercise the id tie-break.
        items.push_back({id, std::round(rng.normal() * 4.0) / 4.0, rng.uniform() < 0.3 ? 1 : 0});
    }
    items[0].gt = 1;
    return items;
}

double oracle_ap(const std::vector<ScoredItem>& items) {
    std::vector<std::pair<std::string, std::pair<double, int>>> v;
    for (const auto& it : items) v.push_back({it.id, {it.score, it.gt}});
    return oracle::average_precision(v);
}

double cosine_baseline_ap(const SyntheticBenchmark& b) {
    const auto aug = sampler::augment_pool(b.pool.vectors(), b.query);
    std::vector<ScoredItem> items;
    for (std::size_t i = 0; i < b.pool.size(); ++i)
        items.push_back({b.pool[i].id, aug.similarity[i], *b.truth.label(b.pool[i].id)});
    return average_precision(items);
}

// Answers every shot with the same label.
class ConstantOracle final : public LabelOracle {
public:
    explicit ConstantOracle(int v) : v_(v) {}
    std::optional<int> ask(const ShotInfo&) override { return v_; }
    std::string annotator() const override { return "constant"; }

private:
    int v_;
};

// Answers from ground truth for the first `limit` shots, then gives up.
class QuittingOracle final : public LabelOracle {
public:
    QuittingOracle(const io::GroundTruth& t, std::size_t limit) : truth_(t), limit_(limit) {}
    std::optional<int> ask(const ShotInfo& shot) override {
        if (asked_++ >= limit_) return std::nullopt;
        return truth_.label(shot.id);
    }
    std::string annotator() const override { return "quitter"; }

private:
    const io::GroundTruth& truth_;
    std::size_t limit_;
    std::size_t asked_ = 0;
};

SyntheticBenchmarkSpec small_spec(std::uint64_t seed) {
    SyntheticBenchmarkSpec s;
    s.dim = 16;
    s.pool_size = 1200;
    s.seed = seed;
    return s;
}

}  // namespace

TEST_CASE("AP of a perfect ranking is 1") {
    std::vector<ScoredItem> items;
    for (int i = 0; i < 10; ++i) items.push_back({"i" + std::to_string(i), 10.0 - i, i < 4 ? 1 : 0});
    CHECK(average_precision(items) == 1.0);
}

TEST_CASE("AP of a single positive ranked last among 10 is 1/10") {
    std::vector<ScoredItem> items;
    for (int i = 0; i < 10; ++i) items.push_back({"i" + std::to_string(i), 10.0 - i, i == 9 ? 1 : 0});
    CHECK(average_precision(items) == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("AP equals the brute-force envelope oracle exactly on random rankings") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto items = random_items(seed, 50);
        CHECK(average_precision(items) == oracle_ap(items));
    }
}

TEST_CASE("AP is invariant under strictly increasing score transforms") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto items = random_items(100 + seed, 60);
        const double ap = average_precision(items);
        auto cubed = items, shifted = items, expd = items;
        for (auto& it : cubed) it.score = it.score * it.score * it.score;
        for (auto& it : shifted) it.score = 3.0 * it.score - 7.0;
        for (auto& it : expd) it.score = std::exp(it.score);
        CHECK(average_precision(cubed) == ap);
        CHECK(average_precision(shifted) == ap);
        CHECK(average_precision(expd) == ap);
    }
}

TEST_CASE("ranking breaks score ties by id") {
    std::vector<ScoredItem> items = {{"b", 1.0, 0}, {"a", 1.0, 1}, {"c", 2.0, 0}};
    rank_items(items);
    CHECK(items[0].id == "c");
    CHECK(items[1].id == "a");
    CHECK(items[2].id == "b");
    // The tie order decides AP: the positive sits at rank 2.
    CHECK(average_precision(items) == 0.5);
}

TEST_CASE("evaluation report: curve, counts and error path") {
    const auto items = random_items(7, 80);
    const auto r = evaluate(items, 0.0);
    CHECK(r.average_precision == average_precision(items));
    std::size_t pos = 0, tp = 0, fp = 0;
    for (const auto& it : items) {
        pos += it.gt;
        if (it.score > 0.0) (it.gt ? tp : fp)++;
    }
    CHECK(r.positives == pos);
    CHECK(r.curve.size() == pos);
    CHECK(r.tp == tp);
    CHECK(r.fp == fp);
    CHECK(r.fn == pos - tp);
    CHECK(r.tp + r.fp + r.fn + r.tn == r.total);
    for (std::size_t i = 1; i < r.curve.size(); ++i) CHECK(r.curve[i].recall >= r.curve[i - 1].recall);
    CHECK(r.curve.back().recall == 1.0);
    for (const auto& p : r.curve) {
        CHECK(p.precision >= 0.0);
        CHECK(p.precision <= 1.0);
    }
    const auto csv = pr_curve_csv(r);
    CHECK(csv.rfind("recall,precision\n", 0) == 0);
    CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == r.curve.size() + 1);

    std::vector<ScoredItem> negatives = {{"a", 1.0, 0}, {"b", 0.5, 0}};
    CHECK_THROWS_AS(average_precision(negatives), NoPositivesError);
    CHECK_THROWS_AS(evaluate(negatives), NoPositivesError);
}

TEST_CASE("benchmark generation is deterministic and validated") {
    const auto a = generate_synthetic_benchmark(small_spec(5));
    const auto b = generate_synthetic_benchmark(small_spec(5));
    CHECK(a.pool == b.pool);
    CHECK(a.truth == b.truth);
    CHECK(a.query == b.query);
    const auto c = generate_synthetic_benchmark(small_spec(6));
    CHECK(!(a.pool == c.pool));

    TempDir tmp;
    io::save_pool(tmp.path / "a.jsonl", a.pool, &a.truth, io::PoolFormat::jsonl);
    io::save_pool(tmp.path / "b.jsonl", b.pool, &b.truth, io::PoolFormat::jsonl);
    CHECK(io::read_text_file(tmp.path / "a.jsonl") == io::read_text_file(tmp.path / "b.jsonl"));

    CHECK(a.pool.size() == 1200);
    CHECK(a.pool.dim() == 16);
    const double frac = static_cast<double>(a.truth.positives()) / a.truth.size();
    CHECK(frac == doctest::Approx(0.3).epsilon(0.1));

    auto bad = small_spec(0);
    bad.positive_fraction = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = small_spec(0);
    bad.separation = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = small_spec(0);
    bad.overlap = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("benchmark cosines: overlap 0 separates the classes, overlap 1 makes the baseline chance") {
    auto s = small_spec(1);
    s.overlap = 0.0;
    CHECK(cosine_baseline_ap(generate_synthetic_benchmark(s)) == 1.0);

    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto m = small_spec(seed);
        m.overlap = 1.0;
        m.pool_size = 2000;
        const auto b = generate_synthetic_benchmark(m);
        const double ap = cosine_baseline_ap(b);
        total += ap;
        CHECK(std::abs(ap - m.positive_fraction) <= 0.05);
    }
    CHECK(std::abs(total / 20.0 - 0.3) <= 0.02);
}

TEST_CASE("run_flame beats the cosine baseline on the ambiguous benchmark") {
    const auto b = generate_synthetic_benchmark(small_spec(3));
    FlameConfig cfg;
    cfg.seed = 3;
    TruthOracle oracle(b.truth);
    const auto run = run_flame(b.pool, b.truth, b.query, cfg, oracle);
    REQUIRE(run.report);
    REQUIRE(run.report->baseline_ap);
    CHECK(run.report->average_precision >= *run.report->baseline_ap + 0.15);
    CHECK(run.labels.size() == run.sampled.selection.effective_k);
    CHECK(run.training.real == run.labels.size());
    CHECK(run.post_label_seconds < 60.0);
    CHECK(run.post_label_seconds > 0.0);
}

TEST_CASE("run_flame does no harm when the cosine score already ranks perfectly") {
    for (std::uint64_t seed : {0u, 1u, 2u}) {
        auto s = small_spec(seed);
        s.overlap = 0.0;
        const auto b = generate_synthetic_benchmark(s);
        FlameConfig cfg;
        cfg.seed = seed;
        TruthOracle oracle(b.truth);
        const auto run = run_flame(b.pool, b.truth, b.query, cfg, oracle);
        REQUIRE(run.report);
        CHECK(*run.report->baseline_ap == 1.0);
        CHECK(run.report->average_precision >= *run.report->baseline_ap - 0.02);
    }
}

TEST_CASE("an all-positive oracle surfaces SingleClassError with guidance") {
    const auto b = generate_synthetic_benchmark(small_spec(4));
    ConstantOracle oracle(1);
    try {
        run_flame(b.pool, b.truth, b.query, FlameConfig{}, oracle);
        FAIL("expected SingleClassError");
    } catch (const SingleClassError& e) {
        CHECK(std::string(e.what()).size() > 0);
        CHECK(e.details().contains("guidance"));
    }
}

TEST_CASE("an oracle that gives up persists the partial labels") {
    const auto b = generate_synthetic_benchmark(small_spec(2));
    TempDir tmp;
    const fs::path partial = tmp.path / "labels.partial.csv";
    QuittingOracle oracle(b.truth, 12);
    try {
        run_flame(b.pool, b.truth, b.query, FlameConfig{}, oracle, &partial);
        FAIL("expected AnnotationIncompleteError");
    } catch (const AnnotationIncompleteError& e) {
        CHECK(e.details()["labeled"] == 12);
        CHECK(e.details()["remaining"] == 18);
    }
    const auto saved = io::load_labels(partial);
    CHECK(saved.size() == 12);
    for (const auto& [id, entry] : saved.entries) CHECK(entry.label == *b.truth.label(id));
}

TEST_CASE("interactive oracle reads y/n answers and stops on q or end of input") {
    ShotInfo shot;
    shot.id = "s";
    std::istringstream in("y\nN\n0\nmaybe\n1\nq\n");
    std::ostringstream out;
    InteractiveOracle oracle(in, out);
    CHECK(oracle.ask(shot) == 1);
    CHECK(oracle.ask(shot) == 0);
    CHECK(oracle.ask(shot) == 0);
    CHECK(oracle.ask(shot) == 1);  // an unrecognised answer is asked again
    CHECK(!oracle.ask(shot));
    CHECK(!oracle.ask(shot));
    CHECK(out.str().find("s") != std::string::npos);
}

TEST_CASE("identical inputs give byte-identical shot lists and model files") {
    const auto b = generate_synthetic_benchmark(small_spec(9));
    for (auto kind : {sampler::ClassifierKind::svm, sampler::ClassifierKind::mlp}) {
        FlameConfig cfg;
        cfg.seed = 9;
        cfg.classifier = kind;
        cfg.mlp_epochs = 300;
        TruthOracle o1(b.truth), o2(b.truth);
        const auto r1 = run_flame(b.pool, b.truth, b.query, cfg, o1);
        const auto r2 = run_flame(b.pool, b.truth, b.query, cfg, o2);
        CHECK(document_text(r1.sampled.document) == document_text(r2.sampled.document));
        CHECK(classifier::model_document(r1.model) == classifier::model_document(r2.model));
        CHECK(shots_from_document(r1.sampled.document).size() == r1.sampled.shots.size());
    }
}

TEST_CASE("training data keeps real rows in id order and refuses foreign labels") {
    const auto b = generate_synthetic_benchmark(small_spec(8));
    FlameConfig cfg;
    const auto sampled = sample(b.pool, b.query, cfg);
    const auto ids = shot_ids(sampled.shots);
    TruthOracle oracle(b.truth);
    const auto labels = collect_labels(sampled.shots, oracle);
    const auto data = build_training_data(sampled.augmented, b.pool, ids, labels, cfg);
    CHECK(std::is_sorted(data.ids.begin(), data.ids.end()));
    CHECK(data.real == ids.size());
    CHECK(data.X.size() == data.real + data.synthetic);
    CHECK(data.X.dim() == b.pool.dim() + 1);

    auto foreign = labels;
    foreign.set({"not-a-shot", 1, "", io::now_rfc3339()});
    CHECK_THROWS_AS(build_training_data(sampled.augmented, b.pool, ids, foreign, cfg), UnknownShotError);
}

TEST_CASE("post-labeling compute stays under a minute at n=50000, d=768, K=30") {
    SyntheticBenchmarkSpec s;
    s.dim = 768;
    s.pool_size = 50000;
    s.seed = 1;
    const auto b = generate_synthetic_benchmark(s);
    FlameConfig cfg;
    cfg.seed = 1;
    TruthOracle oracle(b.truth);
    const auto run = run_flame(b.pool, b.truth, b.query, cfg, oracle);
    MESSAGE("post-labeling seconds: " << run.post_label_seconds);
    CHECK(run.sampled.selection.effective_k == 30);
    CHECK(run.post_label_seconds < 60.0);
}
