#pragma once
// End-to-end steps shared by the CLI and the annotation service, so both
// paths produce byte-identical shot lists and model files.

#include "flame/classifier/model_io.hpp"
#include "flame/io/labels.hpp"
#include "flame/io/pool.hpp"
#include "flame/pipeline/evaluate.hpp"
#include "flame/sampler/sampler.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace flame::pipeline {

using sampler::FlameConfig;

inline constexpr int kShotsFormatVersion = 1;
inline constexpr int kReportFormatVersion = 1;

struct ShotInfo {
    std::string id;
    std::size_t pool_index = 0;
    double similarity = 0.0;
    std::size_t cluster_id = 0;
    std::optional<std::string> image_ref;
    std::array<double, 2> preview{};  // pool coordinates on the first two principal axes
};

struct SampleResult {
    sampler::AugmentedPool augmented;
    sampler::ShotSelection selection;
    std::vector<ShotInfo> shots;
    nlohmann::json document;  // the shot list written by `flame sample`
};

/// Augments the pool, selects shots and builds the shot-list document.
SampleResult sample(const io::Pool& pool, std::span<const double> query, const FlameConfig& config);

/// Canonical text of a JSON document (two-space indent, trailing newline).
std::string document_text(const nlohmann::json& doc);

/// Reads the shots back from a shot-list document. FormatError if malformed.
std::vector<ShotInfo> shots_from_document(const nlohmann::json& doc);
std::vector<std::string> shot_ids(const std::vector<ShotInfo>& shots);

/// Source of binary labels for selected shots. `ask` returns nullopt when no
/// label is available (quit, timeout, missing entry).
class LabelOracle {
public:
    virtual ~LabelOracle() = default;
    virtual std::optional<int> ask(const ShotInfo& shot) = 0;
    virtual std::string annotator() const = 0;
};

/// Answers from pool ground truth (simulated annotator).
class TruthOracle final : public LabelOracle {
public:
    explicit TruthOracle(const io::GroundTruth& truth) : truth_(truth) {}
    std::optional<int> ask(const ShotInfo& shot) override { return truth_.label(shot.id); }
    std::string annotator() const override { return "ground-truth"; }

private:
    const io::GroundTruth& truth_;
};

/// Answers from an existing label file.
class FileOracle final : public LabelOracle {
public:
    explicit FileOracle(io::LabelSet labels, std::string annotator = "file")
        : labels_(std::move(labels)), annotator_(std::move(annotator)) {}
    std::optional<int> ask(const ShotInfo& shot) override { return labels_.label(shot.id); }
    std::string annotator() const override { return annotator_; }

private:
    io::LabelSet labels_;
    std::string annotator_;
};

/// Terminal prompt: y/1 positive, n/0 negative, q or end of input stops.
/// With a descriptor and a positive timeout, an unanswered prompt stops too.
class InteractiveOracle final : public LabelOracle {
public:
    InteractiveOracle(std::istream& in, std::ostream& out, std::string annotator = "terminal", int fd = -1,
                      double timeout_seconds = 0.0)
        : in_(in), out_(out), annotator_(std::move(annotator)), fd_(fd), timeout_(timeout_seconds) {}
    std::optional<int> ask(const ShotInfo& shot) override;
    std::string annotator() const override { return annotator_; }

private:
    std::istream& in_;
    std::ostream& out_;
    std::string annotator_;
    int fd_;
    double timeout_;
    std::size_t asked_ = 0;
};

/// Asks the oracle for every shot. When it gives up, the labels gathered so
/// far are written to `partial_path` (if given) and AnnotationIncompleteError
/// is thrown with the labeled/remaining counts.
io::LabelSet collect_labels(const std::vector<ShotInfo>& shots, LabelOracle& oracle,
                            const std::filesystem::path* partial_path = nullptr);

struct TrainingData {
    PointSet X;
    std::vector<int> labels;  // 0/1
    std::vector<std::string> ids;  // real rows only, in training order
    std::size_t real = 0;
    std::size_t synthetic = 0;
    double imbalance_ratio = 1.0;
};

/// Labeled shots in id order, oversampled per the config. UnknownShotError
/// for labels outside the shot list, SingleClassError (with guidance) when
/// only one class was labeled.
TrainingData build_training_data(const sampler::AugmentedPool& augmented, const io::Pool& pool,
                                 const std::vector<std::string>& shot_ids, const io::LabelSet& labels,
                                 const FlameConfig& config);

/// Trains the configured classifier on augmented vectors.
classifier::TrainedModel train_model(const TrainingData& data, const FlameConfig& config);

/// Model score of every pool record, in pool order.
std::vector<double> score_pool(const classifier::TrainedModel& model, const sampler::AugmentedPool& augmented);

/// Evaluates model scores and the cosine baseline on records with ground
/// truth. nullopt when the pool carries no ground truth at all.
std::optional<EvalReport> evaluate_pool(const classifier::TrainedModel& model, const sampler::AugmentedPool& augmented,
                                        const io::Pool& pool, const io::GroundTruth& truth);

/// Report document written by `flame eval` and served by the service.
nlohmann::json report_document(const EvalReport& report, const std::string& config_hash, const TrainingData* training,
                               double post_label_seconds);

struct FlameRun {
    SampleResult sampled;
    io::LabelSet labels;
    TrainingData training;
    classifier::TrainedModel model;
    std::optional<EvalReport> report;
    double post_label_seconds = 0.0;  // training + evaluation
};

FlameRun run_flame(const io::Pool& pool, const io::GroundTruth& truth, std::span<const double> query,
                   const FlameConfig& config, LabelOracle& oracle,
                   const std::filesystem::path* partial_labels_path = nullptr);

}  // namespace flame::pipeline
