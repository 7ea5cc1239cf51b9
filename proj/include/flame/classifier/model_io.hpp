#pragma once
// Versioned JSON documents for trained classifiers. Doubles are written in
// shortest round-trip form, so reloading reproduces scores bit for bit.

#include "flame/classifier/mlp.hpp"
#include "flame/classifier/svm.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <variant>

namespace flame::classifier {

inline constexpr int kModelFormatVersion = 1;

struct TrainedModel {
    std::variant<SvmModel, MlpModel> model;
    std::string config_hash;

    bool is_svm() const noexcept { return std::holds_alternative<SvmModel>(model); }
    std::size_t input_dim() const;

    /// Signed score: SVM decision value or network output Φ(x).
    double score(std::span<const double> x) const;
};

nlohmann::json svm_to_json(const SvmModel& model);
SvmModel svm_from_json(const nlohmann::json& j);
nlohmann::json mlp_to_json(const MlpModel& model);
MlpModel mlp_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const TrainedModel& model);
/// FormatError on missing fields, an unknown type, or a version mismatch.
TrainedModel model_from_json(const nlohmann::json& j);

/// Canonical text of the model document (two-space indent, trailing newline).
std::string model_document(const TrainedModel& model);
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace flame::classifier
