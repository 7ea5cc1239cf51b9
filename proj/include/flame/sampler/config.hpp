#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

namespace flame::sampler {

enum class ClassifierKind { svm, mlp };
enum class KernelKind { linear, rbf };

/// Hyperparameters for one-step marginal sampling plus the downstream
/// classifier. Zero for `bandwidth_h` and `svm_gamma` means "derive from
/// data" (Scott's rule and the median-distance heuristic respectively).
struct FlameConfig {
    std::size_t shots_k = 30;
    std::size_t pca_dim = 1;
    double bandwidth_h = 0.0;
    double ratio_lower = 0.3;
    double ratio_upper = 0.7;
    double imbalance_threshold = 2.0;
    std::size_t smote_neighbors = 5;
    double jitter_sigma = 1e-3;
    std::uint64_t seed = 0;
    std::optional<double> similarity_floor;  // drop pool entries with cosine below this

    ClassifierKind classifier = ClassifierKind::svm;
    KernelKind kernel = KernelKind::rbf;
    double svm_c = 1.0;
    double svm_gamma = 0.0;
    std::size_t mlp_hidden = 16;
    std::size_t mlp_epochs = 2000;
    double mlp_learning_rate = 0.1;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

void to_json(nlohmann::json& j, const FlameConfig& c);
/// Partial documents are allowed: missing keys keep their defaults, unknown keys are a ConfigError.
void from_json(const nlohmann::json& j, FlameConfig& c);

/// 16-hex-digit FNV-1a hash of the canonical JSON form.
std::string config_hash(const FlameConfig& c);

std::string to_string(ClassifierKind k);
std::string to_string(KernelKind k);

}  // namespace flame::sampler
