#include "flame/pipeline/flame.hpp"

#include "flame/numerics/pca.hpp"

#include <poll.h>

#include <chrono>
#include <cmath>
#include <iostream>
#include <set>

namespace flame::pipeline {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string document_text(const json& doc) { return doc.dump(2) + "\n"; }

SampleResult sample(const io::Pool& pool, std::span<const double> query, const FlameConfig& config) {
    config.validate();
    if (pool.empty()) throw EmptyPoolError("pool is empty");
    SampleResult out;
    out.augmented = sampler::augment_pool(pool.vectors(), query);
    out.selection = sampler::select_shots(out.augmented, config);

    std::optional<numerics::PcaModel> preview;
    if (out.augmented.size() >= 3 && out.augmented.augmented.dim() >= 2) {
        preview = numerics::fit_pca(out.augmented.augmented, 2);
    }

    json shots = json::array();
    for (const auto& s : out.selection.shots) {
        const auto& rec = pool[s.pool_index];
        ShotInfo info;
        info.id = rec.id;
        info.pool_index = s.pool_index;
        info.similarity = s.similarity;
        info.cluster_id = s.cluster_id;
        info.image_ref = rec.image_ref;
        if (preview) {
            const auto p = numerics::project(*preview, out.augmented.augmented.row(s.pool_index));
            info.preview = {p[0], p[1]};
        }
        json j = {{"shot_id", info.id},
                  {"pool_index", info.pool_index},
                  {"similarity", info.similarity},
                  {"density", s.density},
                  {"cluster_id", info.cluster_id},
                  {"distance_to_center", s.distance_to_center},
                  {"preview", info.preview}};
        if (info.image_ref) j["image_ref"] = *info.image_ref;
        shots.push_back(std::move(j));
        out.shots.push_back(std::move(info));
    }
    const auto& sel = out.selection;
    out.document = {{"format", "flame-shots"},
                    {"version", kShotsFormatVersion},
                    {"config_hash", sampler::config_hash(config)},
                    {"pool_size", pool.size()},
                    {"candidates", sel.candidates},
                    {"requested_k", sel.requested_k},
                    {"effective_k", sel.effective_k},
                    {"band_size", sel.band_size},
                    {"bandwidth", sel.bandwidth},
                    {"mode_density", sel.mode_density},
                    {"lower_threshold", sel.lower_threshold},
                    {"upper_threshold", sel.upper_threshold},
                    {"warnings", sel.warnings},
                    {"shots", shots}};
    return out;
}

std::vector<ShotInfo> shots_from_document(const json& doc) {
    if (!doc.is_object() || doc.value("format", "") != "flame-shots") throw FormatError("not a shot-list document");
    std::vector<ShotInfo> out;
    try {
        for (const auto& j : doc.at("shots")) {
            ShotInfo s;
            s.id = j.at("shot_id").get<std::string>();
            s.pool_index = j.at("pool_index").get<std::size_t>();
            s.similarity = j.at("similarity").get<double>();
            s.cluster_id = j.at("cluster_id").get<std::size_t>();
            if (j.contains("image_ref")) s.image_ref = j["image_ref"].get<std::string>();
            if (j.contains("preview")) s.preview = j["preview"].get<std::array<double, 2>>();
            out.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed shot list: ") + e.what());
    }
    return out;
}

std::vector<std::string> shot_ids(const std::vector<ShotInfo>& shots) {
    std::vector<std::string> ids;
    ids.reserve(shots.size());
    for (const auto& s : shots) ids.push_back(s.id);
    return ids;
}

std::optional<int> InteractiveOracle::ask(const ShotInfo& shot) {
    ++asked_;
    for (;;) {
        out_ << "[" << asked_ << "] " << shot.id << "  similarity=" << shot.similarity;
        if (shot.image_ref) out_ << "  image=" << *shot.image_ref;
        out_ << "  positive? [y/n/q]: " << std::flush;
        if (fd_ >= 0 && timeout_ > 0.0) {
            pollfd p{fd_, POLLIN, 0};
            const int ready = ::poll(&p, 1, static_cast<int>(timeout_ * 1000.0));
            if (ready <= 0) {
                out_ << "\n(no answer within " << timeout_ << " s)\n";
                return std::nullopt;
            }
        }
        std::string line;
        if (!std::getline(in_, line)) return std::nullopt;
        if (line == "y" || line == "Y" || line == "1" || line == "yes") return 1;
        if (line == "n" || line == "N" || line == "0" || line == "no") return 0;
        if (line == "q" || line == "Q" || line == "quit") return std::nullopt;
        out_ << "please answer y, n or q\n";
    }
}

io::LabelSet collect_labels(const std::vector<ShotInfo>& shots, LabelOracle& oracle,
                            const std::filesystem::path* partial_path) {
    io::LabelSet labels;
    for (std::size_t i = 0; i < shots.size(); ++i) {
        const auto answer = oracle.ask(shots[i]);
        if (!answer) {
            json details = {{"labeled", labels.size()}, {"remaining", shots.size() - labels.size()},
                            {"stopped_at", shots[i].id}};
            if (partial_path) {
                io::save_labels(*partial_path, labels);
                details["partial_labels"] = partial_path->string();
            }
            throw AnnotationIncompleteError("annotation stopped with " + std::to_string(shots.size() - labels.size()) +
                                                " of " + std::to_string(shots.size()) + " shots unlabeled",
                                            details);
        }
        labels.set({shots[i].id, *answer, oracle.annotator(), io::now_rfc3339()});
    }
    return labels;
}

TrainingData build_training_data(const sampler::AugmentedPool& augmented, const io::Pool& pool,
                                 const std::vector<std::string>& ids, const io::LabelSet& labels,
                                 const FlameConfig& config) {
    const std::set<std::string> known(ids.begin(), ids.end());
    io::require_known(labels, known);

    std::vector<sampler::LabeledShot> labeled;
    TrainingData out;
    for (const auto& [id, entry] : labels.entries) {  // map order: sorted by id
        const std::size_t idx = pool.index_of(id);
        const auto row = augmented.augmented.row(idx);
        labeled.push_back({idx, Vector(row.begin(), row.end()), entry.label, false});
        out.ids.push_back(id);
    }
    std::size_t positives = 0;
    for (const auto& l : labeled) positives += l.label == 1;
    if (positives == 0 || positives == labeled.size()) {
        const std::string which = positives == 0 ? "negative" : "positive";
        const std::string guidance =
            "relabel so both classes appear, or widen the marginal band (ratio_lower / ratio_upper) and sample again";
        throw SingleClassError("all " + std::to_string(labeled.size()) + " labeled shots are " + which + "; " + guidance,
                               {{"positives", positives}, {"negatives", labeled.size() - positives}, {"guidance", guidance}});
    }
    std::vector<int> raw;
    for (const auto& l : labeled) raw.push_back(l.label);
    out.imbalance_ratio = sampler::imbalance_ratio(raw);

    const auto training = sampler::build_training_set(labeled, config);
    out.X = PointSet(0, augmented.augmented.dim());
    for (const auto& t : training) {
        out.X.push_back(t.augmented);
        out.labels.push_back(t.label);
        (t.synthetic ? out.synthetic : out.real) += 1;
    }
    return out;
}

classifier::TrainedModel train_model(const TrainingData& data, const FlameConfig& config) {
    config.validate();
    classifier::TrainedModel out;
    out.config_hash = sampler::config_hash(config);
    if (config.classifier == sampler::ClassifierKind::svm) {
        std::vector<int> y;
        y.reserve(data.labels.size());
        for (int l : data.labels) y.push_back(l == 1 ? 1 : -1);
        classifier::KernelSpec kernel = classifier::KernelSpec::linear();
        if (config.kernel == sampler::KernelKind::rbf) {
            kernel = classifier::KernelSpec::rbf(config.svm_gamma > 0.0 ? config.svm_gamma
                                                                         : classifier::default_gamma(data.X));
        }
        out.model = classifier::train_svm(data.X, y, config.svm_c, kernel);
    } else {
        classifier::MlpOptions opts;
        opts.hidden = config.mlp_hidden;
        opts.epochs = config.mlp_epochs;
        opts.learning_rate = config.mlp_learning_rate;
        opts.seed = config.seed;
        out.model = classifier::train_mlp(data.X, data.labels, opts).model;
    }
    return out;
}

std::vector<double> score_pool(const classifier::TrainedModel& model, const sampler::AugmentedPool& augmented) {
    if (model.input_dim() != augmented.augmented.dim()) {
        throw DimensionError("model expects dimension " + std::to_string(model.input_dim()) +
                                 ", augmented pool has " + std::to_string(augmented.augmented.dim()),
                             {{"model_dim", model.input_dim()}, {"pool_dim", augmented.augmented.dim()}});
    }
    std::vector<double> scores(augmented.size());
    for (std::size_t i = 0; i < augmented.size(); ++i) scores[i] = model.score(augmented.augmented.row(i));
    return scores;
}

std::optional<EvalReport> evaluate_pool(const classifier::TrainedModel& model, const sampler::AugmentedPool& augmented,
                                        const io::Pool& pool, const io::GroundTruth& truth) {
    if (truth.size() == 0) return std::nullopt;
    const auto scores = score_pool(model, augmented);
    std::vector<ScoredItem> items;
    std::vector<ScoredItem> baseline;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto gt = truth.label(pool[i].id);
        if (!gt) continue;
        items.push_back({pool[i].id, scores[i], *gt});
        baseline.push_back({pool[i].id, augmented.similarity[i], *gt});
    }
    auto report = evaluate(std::move(items));
    report.baseline_ap = average_precision(std::move(baseline));
    return report;
}

json report_document(const EvalReport& report, const std::string& config_hash, const TrainingData* training,
                     double post_label_seconds) {
    json doc = {{"format", "flame-report"},
                {"version", kReportFormatVersion},
                {"config_hash", config_hash},
                {"ap_flame", report.average_precision},
                {"ap_baseline", report.baseline_ap ? json(*report.baseline_ap) : json()},
                {"evaluation", to_json(report)},
                {"timing", {{"post_label_seconds", post_label_seconds}}}};
    if (training) {
        doc["training"] = {{"real", training->real},
                           {"synthetic", training->synthetic},
                           {"imbalance_ratio", training->imbalance_ratio}};
    }
    return doc;
}

FlameRun run_flame(const io::Pool& pool, const io::GroundTruth& truth, std::span<const double> query,
                   const FlameConfig& config, LabelOracle& oracle, const std::filesystem::path* partial_labels_path) {
    FlameRun run;
    run.sampled = sample(pool, query, config);
    run.labels = collect_labels(run.sampled.shots, oracle, partial_labels_path);

    const auto t0 = std::chrono::steady_clock::now();
    run.training = build_training_data(run.sampled.augmented, pool, shot_ids(run.sampled.shots), run.labels, config);
    run.model = train_model(run.training, config);
    run.report = evaluate_pool(run.model, run.sampled.augmented, pool, truth);
    run.post_label_seconds = seconds_since(t0);
    return run;
}

}  // namespace flame::pipeline
