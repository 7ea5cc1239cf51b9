#include "flame/cli/cli.hpp"

#include "flame/classifier/model_io.hpp"
#include "flame/io/config_file.hpp"
#include "flame/pipeline/benchmark.hpp"
#include "flame/pipeline/flame.hpp"
#include "flame/service/service.hpp"
#include "flame/theory/suites.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

namespace flame::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Globals {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_dir = ".";
    std::string format = "json";
};

sampler::FlameConfig resolve_config(const Globals& g) {
    sampler::FlameConfig c;
    if (!g.config_path.empty()) c = io::load_config(g.config_path);
    if (g.seed_given) c.seed = g.seed;
    c.validate();
    return c;
}

fs::path out_path(const Globals& g, const std::string& name) {
    fs::create_directories(g.out_dir);
    return fs::path(g.out_dir) / name;
}

void write_text(const fs::path& path, const std::string& text) { io::write_file_atomic(path, text); }

// ---- sample ---------------------------------------------------------------

struct SampleArgs {
    std::string pool, query;
};

int cmd_sample(const Globals& g, const SampleArgs& a, std::ostream& out, std::ostream& err) {
    const auto config = resolve_config(g);
    const auto pool = io::load_pool(a.pool);
    const auto query = io::load_query(a.query);
    const auto result = pipeline::sample(pool, query, config);
    const auto path = out_path(g, "shots.json");
    write_text(path, pipeline::document_text(result.document));
    for (const auto& w : result.selection.warnings) err << "warning: " << w << "\n";
    out << json{{"shots_file", path.string()},
                {"effective_k", result.selection.effective_k},
                {"band_size", result.selection.band_size},
                {"config_hash", sampler::config_hash(config)}}
               .dump()
        << "\n";
    return kOk;
}

// ---- label ----------------------------------------------------------------

struct LabelArgs {
    std::string shots, from_file, pool, annotator = "terminal";
    bool from_truth = false;
    double timeout = 0.0;
};

int cmd_label(const Globals& g, const LabelArgs& a, std::istream& in, std::ostream& out) {
    const auto shots = pipeline::shots_from_document(json::parse(io::read_text_file(a.shots)));
    const auto ids = pipeline::shot_ids(shots);
    const std::set<std::string> known(ids.begin(), ids.end());
    const auto path = out_path(g, "labels.csv");

    std::unique_ptr<pipeline::LabelOracle> oracle;
    io::GroundTruth truth;
    if (!a.from_file.empty()) {
        oracle = std::make_unique<pipeline::FileOracle>(io::load_labels(a.from_file, &known), "file");
    } else if (a.from_truth) {
        if (a.pool.empty()) throw ConfigError("--from-truth needs --pool", {{"field", "pool"}});
        truth = io::load_ground_truth(a.pool);
        oracle = std::make_unique<pipeline::TruthOracle>(truth);
    } else {
        const int fd = &in == &std::cin ? 0 : -1;
        oracle = std::make_unique<pipeline::InteractiveOracle>(in, out, a.annotator, fd, a.timeout);
    }
    const auto labels = pipeline::collect_labels(shots, *oracle, &path);
    io::save_labels(path, labels, &known);
    std::size_t positives = 0;
    for (const auto& [id, e] : labels.entries) positives += e.label == 1;
    out << json{{"labels_file", path.string()}, {"labeled", labels.size()}, {"positives", positives}}.dump() << "\n";
    return kOk;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
    std::string pool, query, shots, labels, classifier;
    bool allow_partial = false;
};

int cmd_train(const Globals& g, const TrainArgs& a, std::ostream& out, std::ostream& err) {
    auto config = resolve_config(g);
    if (!a.classifier.empty()) {
        json patch = {{"classifier", a.classifier}};
        sampler::from_json(patch, config);
        config.validate();
    }
    const auto pool = io::load_pool(a.pool);
    const auto query = io::load_query(a.query);
    const auto doc = json::parse(io::read_text_file(a.shots));
    const auto ids = pipeline::shot_ids(pipeline::shots_from_document(doc));
    const std::set<std::string> known(ids.begin(), ids.end());
    const auto labels = io::load_labels(a.labels, &known);
    for (const auto& w : labels.warnings) err << "warning: " << w << "\n";
    if (labels.size() < ids.size() && !a.allow_partial) {
        throw AnnotationIncompleteError(std::to_string(ids.size() - labels.size()) + " of " + std::to_string(ids.size()) +
                                            " shots are unlabeled; label them or pass --allow-partial",
                                        {{"labeled", labels.size()}, {"remaining", ids.size() - labels.size()}});
    }
    if (doc.value("config_hash", "") != sampler::config_hash(config)) {
        err << "warning: shot list was sampled with config " << doc.value("config_hash", "?")
            << ", training with " << sampler::config_hash(config) << "\n";
    }
    const auto augmented = sampler::augment_pool(pool.vectors(), query);
    const auto data = pipeline::build_training_data(augmented, pool, ids, labels, config);
    const auto model = pipeline::train_model(data, config);
    const auto path = out_path(g, "model.json");
    classifier::save_model(path, model);
    out << json{{"model_file", path.string()},
                {"classifier", sampler::to_string(config.classifier)},
                {"training_real", data.real},
                {"training_synthetic", data.synthetic}}
               .dump()
        << "\n";
    return kOk;
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
    std::string pool, query, model;
};

int cmd_eval(const Globals& g, const EvalArgs& a, std::ostream& out) {
    const auto pool = io::load_pool(a.pool);
    const auto truth = io::load_ground_truth(a.pool);
    const auto query = io::load_query(a.query);
    const auto model = classifier::load_model(a.model);
    const auto t0 = std::chrono::steady_clock::now();
    const auto augmented = sampler::augment_pool(pool.vectors(), query);
    const auto report = pipeline::evaluate_pool(model, augmented, pool, truth);
    if (!report) throw NoPositivesError("pool carries no ground truth to evaluate against");
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto doc = pipeline::report_document(*report, model.config_hash, nullptr, seconds);
    write_text(out_path(g, "report.json"), pipeline::document_text(doc));
    write_text(out_path(g, "pr_curve.csv"), pipeline::pr_curve_csv(*report));
    out << json{{"ap_flame", doc["ap_flame"]}, {"ap_baseline", doc["ap_baseline"]},
                {"report_file", out_path(g, "report.json").string()},
                {"pr_curve_file", out_path(g, "pr_curve.csv").string()}}
               .dump()
        << "\n";
    return kOk;
}

// ---- verify-lemmas --------------------------------------------------------

int cmd_verify(const Globals& g, bool write_reports, std::ostream& out) {
    theory::SuiteOptions opts;
    if (g.seed_given) opts.seed = g.seed;
    const auto results = theory::run_all_suites(opts);
    std::size_t passed = 0;
    char line[160];
    std::snprintf(line, sizeof line, "%-30s %9s %9s %8s  %s\n", "suite", "passed", "instances", "seconds", "status");
    out << line;
    for (const auto& r : results) {
        std::snprintf(line, sizeof line, "%-30s %9zu %9zu %8.2f  %s\n", r.name.c_str(), r.passed_instances, r.instances,
                      r.seconds, r.passed() ? "PASS" : "FAIL");
        out << line;
        passed += r.passed();
        if (write_reports) write_text(out_path(g, "suite-" + r.name + ".json"), pipeline::document_text(theory::to_json(r)));
    }
    out << passed << "/" << results.size() << " suites passed\n";
    return passed == results.size() ? kOk : kRuntimeError;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
    pipeline::SyntheticBenchmarkSpec spec;
    std::size_t runs = 1;
    std::size_t threads = 1;
    bool save_pool = false;
};

json bench_once(const sampler::FlameConfig& config, pipeline::SyntheticBenchmarkSpec spec, std::uint64_t seed) {
    spec.seed = seed;
    auto cfg = config;
    cfg.seed = seed;
    const auto bench = pipeline::generate_synthetic_benchmark(spec);
    pipeline::TruthOracle oracle(bench.truth);
    const auto run = pipeline::run_flame(bench.pool, bench.truth, bench.query, cfg, oracle);
    json doc = pipeline::report_document(*run.report, run.model.config_hash, &run.training, run.post_label_seconds);
    doc["seed"] = seed;
    doc["benchmark"] = pipeline::to_json(spec);
    doc["gain"] = run.report->average_precision - run.report->baseline_ap.value_or(0.0);
    doc["effective_k"] = run.sampled.selection.effective_k;
    return doc;
}

int cmd_bench(const Globals& g, BenchArgs a, std::ostream& out) {
    const auto config = resolve_config(g);
    const auto parsed = io::parse_pool_format(g.format);
    a.spec.seed = g.seed_given ? g.seed : config.seed;
    a.spec.validate();

    if (a.runs <= 1) {
        const auto doc = bench_once(config, a.spec, a.spec.seed);
        write_text(out_path(g, "report.json"), pipeline::document_text(doc));
        if (a.save_pool) {
            const auto bench = pipeline::generate_synthetic_benchmark(a.spec);
            io::save_pool(out_path(g, parsed == io::PoolFormat::binary ? "pool.flmp" : "pool.jsonl"), bench.pool,
                          &bench.truth, parsed);
            io::save_query(out_path(g, "query.json"), bench.query);
        }
        out << pipeline::document_text(doc);
        return kOk;
    }

    // Independent seeds fan out over worker threads; results keep seed order.
    std::vector<json> docs(a.runs);
    std::size_t next = 0;
    std::mutex m;
    const auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard lock(m);
                if (next >= a.runs) return;
                i = next++;
            }
            docs[i] = bench_once(config, a.spec, a.spec.seed + i);
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::max<std::size_t>(1, std::min(a.threads, a.runs)); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::size_t wins = 0;
    double max_seconds = 0.0;
    json runs = json::array();
    for (const auto& d : docs) {
        wins += d["gain"].get<double>() >= 0.15;
        max_seconds = std::max(max_seconds, d["timing"]["post_label_seconds"].get<double>());
        runs.push_back({{"seed", d["seed"]}, {"ap_flame", d["ap_flame"]}, {"ap_baseline", d["ap_baseline"]},
                        {"gain", d["gain"]}, {"post_label_seconds", d["timing"]["post_label_seconds"]}});
    }
    json summary = {{"format", "flame-bench"}, {"benchmark", pipeline::to_json(a.spec)}, {"runs", runs},
                    {"wins", wins}, {"gain_floor", 0.15}, {"max_post_label_seconds", max_seconds}};
    write_text(out_path(g, "bench.json"), pipeline::document_text(summary));
    out << pipeline::document_text(summary);
    return kOk;
}

// ---- serve ----------------------------------------------------------------

struct ServeArgs {
    std::string host, data_dir, assets_dir;
    int port = -1;
};

int cmd_serve(const ServeArgs& a, std::ostream& out) {
    auto cfg = service::config_from_env();
    if (!a.host.empty()) cfg.host = a.host;
    if (a.port >= 0) cfg.port = a.port;
    if (!a.data_dir.empty()) cfg.data_dir = a.data_dir;
    if (!a.assets_dir.empty()) cfg.assets_dir = a.assets_dir;
    service::AnnotationService svc(cfg);
    service::HttpServer server(svc);
    const int port = server.bind(cfg.host, cfg.port);
    out << json{{"listening", "http://" + cfg.host + ":" + std::to_string(port)}, {"data_dir", cfg.data_dir.string()}}.dump()
        << std::endl;
    server.run();
    return kOk;
}

void write_error(std::ostream& err, const json& e) { err << e.dump() << "\n"; }

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"FLAME: few-shot marginal sampling over embedding pools"};
    app.name("flame");
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config_path, "JSON or TOML configuration file");
    auto* seed_opt = app.add_option("--seed", g.seed, "random seed (overrides the config)");
    app.add_option("--out-dir", g.out_dir, "directory for output artifacts")->capture_default_str();
    app.add_option("--format", g.format, "pool output format")->check(CLI::IsMember({"json", "jsonl", "binary"}))
        ->capture_default_str();

    SampleArgs sa;
    auto* sample = app.add_subcommand("sample", "select shots to label; writes shots.json");
    sample->add_option("--pool", sa.pool, "pool file (JSONL or binary)")->required();
    sample->add_option("--query", sa.query, "query embedding JSON")->required();

    LabelArgs la;
    auto* label = app.add_subcommand("label", "label the selected shots; writes labels.csv");
    label->add_option("--shots", la.shots, "shots.json from `sample`")->required();
    auto* ff = label->add_option("--from-file", la.from_file, "take labels from an existing CSV");
    auto* ft = label->add_flag("--from-truth", la.from_truth, "take labels from pool ground truth");
    ff->excludes(ft);
    label->add_option("--pool", la.pool, "pool file (for --from-truth)");
    label->add_option("--annotator", la.annotator, "annotator name recorded with interactive labels");
    label->add_option("--timeout", la.timeout, "seconds to wait per interactive prompt (0: no limit)");

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "train the classifier; writes model.json");
    train->add_option("--pool", ta.pool, "pool file")->required();
    train->add_option("--query", ta.query, "query embedding JSON")->required();
    train->add_option("--shots", ta.shots, "shots.json from `sample`")->required();
    train->add_option("--labels", ta.labels, "labels.csv from `label`")->required();
    train->add_option("--classifier", ta.classifier, "override the configured classifier")
        ->check(CLI::IsMember({"svm", "mlp"}));
    train->add_flag("--allow-partial", ta.allow_partial, "train even if some shots are unlabeled");

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "score the pool; writes report.json and pr_curve.csv");
    eval->add_option("--pool", ea.pool, "pool file with ground truth")->required();
    eval->add_option("--query", ea.query, "query embedding JSON")->required();
    eval->add_option("--model", ea.model, "model.json from `train`")->required();

    bool write_reports = false;
    auto* verify = app.add_subcommand("verify-lemmas", "run the support-set verification suites");
    verify->add_flag("--write-reports", write_reports, "write one JSON report per suite to --out-dir");

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "synthetic benchmark, end to end with a ground-truth oracle");
    bench->add_option("--dim", ba.spec.dim)->capture_default_str();
    bench->add_option("--pool-size", ba.spec.pool_size)->capture_default_str();
    bench->add_option("--positive-fraction", ba.spec.positive_fraction)->capture_default_str();
    bench->add_option("--separation", ba.spec.separation, "class separation in cluster-std units")->capture_default_str();
    bench->add_option("--overlap", ba.spec.overlap, "0: separable by cosine score, 1: identical")->capture_default_str();
    bench->add_option("--cluster-std", ba.spec.cluster_std)->capture_default_str();
    bench->add_option("--runs", ba.runs, "consecutive seeds to run")->capture_default_str();
    bench->add_option("--threads", ba.threads, "worker threads for --runs")->capture_default_str();
    bench->add_flag("--save-pool", ba.save_pool, "also write the generated pool and query");

    ServeArgs va;
    auto* serve = app.add_subcommand("serve", "start the annotation service");
    serve->add_option("--host", va.host, "bind address (default 127.0.0.1)");
    serve->add_option("--port", va.port, "port (default FLAME_PORT or 8080)");
    serve->add_option("--data-dir", va.data_dir, "session directory (default FLAME_DATA or ./flame-data)");
    serve->add_option("--assets-dir", va.assets_dir, "served under /assets (default FLAME_ASSETS)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        write_error(err, {{"code", "UsageError"}, {"message", e.what()}, {"details", {{"cli_error", e.get_name()}}}});
        return kUsageError;
    }
    g.seed_given = seed_opt->count() > 0;

    try {
        if (sample->parsed()) return cmd_sample(g, sa, out, err);
        if (label->parsed()) return cmd_label(g, la, in, out);
        if (train->parsed()) return cmd_train(g, ta, out, err);
        if (eval->parsed()) return cmd_eval(g, ea, out);
        if (verify->parsed()) return cmd_verify(g, write_reports, out);
        if (bench->parsed()) return cmd_bench(g, ba, out);
        if (serve->parsed()) return cmd_serve(va, out);
    } catch (const Error& e) {
        write_error(err, e.to_json());
        return is_usage_error(e) ? kUsageError : kRuntimeError;
    } catch (const json::exception& e) {
        write_error(err, {{"code", "ParseError"}, {"message", e.what()}, {"details", json::object()}});
        return kUsageError;
    } catch (const std::exception& e) {
        write_error(err, {{"code", "RuntimeError"}, {"message", e.what()}, {"details", json::object()}});
        return kRuntimeError;
    }
    return kUsageError;
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cin, std::cout, std::cerr);
}

}  // namespace flame::cli
