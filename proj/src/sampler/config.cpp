#include "flame/sampler/config.hpp"

#include "flame/error.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace flame::sampler {

namespace {
[[noreturn]] void reject(const std::string& field, const std::string& message, const nlohmann::json& value) {
    throw ConfigError(field + ": " + message, {{"field", field}, {"value", value}});
}
}  // namespace

void FlameConfig::validate() const {
    if (shots_k < 2) reject("shots_k", "must be at least 2", shots_k);
    if (pca_dim < 1) reject("pca_dim", "must be at least 1", pca_dim);
    if (!(bandwidth_h >= 0.0) || !std::isfinite(bandwidth_h)) reject("bandwidth_h", "must be >= 0 (0 = Scott's rule)", bandwidth_h);
    if (!(ratio_lower > 0.0 && ratio_lower < 1.0)) reject("ratio_lower", "must lie in (0, 1)", ratio_lower);
    if (!(ratio_upper > 0.0 && ratio_upper < 1.0)) reject("ratio_upper", "must lie in (0, 1)", ratio_upper);
    if (!(ratio_lower < ratio_upper)) reject("ratio_lower", "must be strictly below ratio_upper", ratio_lower);
    if (!(imbalance_threshold > 1.0) || !std::isfinite(imbalance_threshold)) reject("imbalance_threshold", "must be > 1", imbalance_threshold);
    if (smote_neighbors < 1) reject("smote_neighbors", "must be at least 1", smote_neighbors);
    if (!(jitter_sigma >= 0.0) || !std::isfinite(jitter_sigma)) reject("jitter_sigma", "must be >= 0", jitter_sigma);
    if (similarity_floor && !(*similarity_floor >= -1.0 && *similarity_floor <= 1.0)) {
        reject("similarity_floor", "must lie in [-1, 1]", *similarity_floor);
    }
    if (!(svm_c > 0.0) || !std::isfinite(svm_c)) reject("svm_c", "must be > 0", svm_c);
    if (!(svm_gamma >= 0.0) || !std::isfinite(svm_gamma)) reject("svm_gamma", "must be >= 0 (0 = heuristic)", svm_gamma);
    if (mlp_hidden < 1) reject("mlp_hidden", "must be at least 1", mlp_hidden);
    if (mlp_epochs < 1) reject("mlp_epochs", "must be at least 1", mlp_epochs);
    if (!(mlp_learning_rate > 0.0) || !std::isfinite(mlp_learning_rate)) reject("mlp_learning_rate", "must be > 0", mlp_learning_rate);
}

std::string to_string(ClassifierKind k) { return k == ClassifierKind::svm ? "svm" : "mlp"; }
std::string to_string(KernelKind k) { return k == KernelKind::rbf ? "rbf" : "linear"; }

void to_json(nlohmann::json& j, const FlameConfig& c) {
    j = nlohmann::json{
        {"shots_k", c.shots_k},
        {"pca_dim", c.pca_dim},
        {"bandwidth_h", c.bandwidth_h},
        {"ratio_lower", c.ratio_lower},
        {"ratio_upper", c.ratio_upper},
        {"imbalance_threshold", c.imbalance_threshold},
        {"smote_neighbors", c.smote_neighbors},
        {"jitter_sigma", c.jitter_sigma},
        {"seed", c.seed},
        {"similarity_floor", c.similarity_floor ? nlohmann::json(*c.similarity_floor) : nlohmann::json(nullptr)},
        {"classifier", to_string(c.classifier)},
        {"kernel", to_string(c.kernel)},
        {"svm_c", c.svm_c},
        {"svm_gamma", c.svm_gamma},
        {"mlp_hidden", c.mlp_hidden},
        {"mlp_epochs", c.mlp_epochs},
        {"mlp_learning_rate", c.mlp_learning_rate},
    };
}

void from_json(const nlohmann::json& j, FlameConfig& c) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> known{
        "shots_k",     "pca_dim", "bandwidth_h", "ratio_lower", "ratio_upper", "imbalance_threshold",
        "smote_neighbors", "jitter_sigma", "seed", "similarity_floor", "classifier", "kernel",
        "svm_c", "svm_gamma", "mlp_hidden", "mlp_epochs", "mlp_learning_rate"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'", {{"field", key}});
    }

    const auto read = [&](const char* key, auto& target) {
        if (!j.contains(key)) return;
        try {
            using T = std::decay_t<decltype(target)>;
            if constexpr (std::is_integral_v<T>) {
                const auto& v = j.at(key);
                if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0)) {
                    reject(key, "must be a non-negative integer", v);
                }
            } else {
                if (!j.at(key).is_number()) reject(key, "must be a number", j.at(key));
            }
            target = j.at(key).get<std::decay_t<decltype(target)>>();
        } catch (const nlohmann::json::exception& e) {
            reject(key, e.what(), j.at(key));
        }
    };
    read("shots_k", c.shots_k);
    read("pca_dim", c.pca_dim);
    read("bandwidth_h", c.bandwidth_h);
    read("ratio_lower", c.ratio_lower);
    read("ratio_upper", c.ratio_upper);
    read("imbalance_threshold", c.imbalance_threshold);
    read("smote_neighbors", c.smote_neighbors);
    read("jitter_sigma", c.jitter_sigma);
    read("seed", c.seed);
    read("svm_c", c.svm_c);
    read("svm_gamma", c.svm_gamma);
    read("mlp_hidden", c.mlp_hidden);
    read("mlp_epochs", c.mlp_epochs);
    read("mlp_learning_rate", c.mlp_learning_rate);

    if (j.contains("similarity_floor")) {
        const auto& v = j.at("similarity_floor");
        if (v.is_null()) c.similarity_floor.reset();
        else if (v.is_number()) c.similarity_floor = v.get<double>();
        else reject("similarity_floor", "must be a number or null", v);
    }
    if (j.contains("classifier")) {
        const auto v = j.at("classifier");
        if (v == "svm") c.classifier = ClassifierKind::svm;
        else if (v == "mlp") c.classifier = ClassifierKind::mlp;
        else reject("classifier", "must be \"svm\" or \"mlp\"", v);
    }
    if (j.contains("kernel")) {
        const auto v = j.at("kernel");
        if (v == "rbf") c.kernel = KernelKind::rbf;
        else if (v == "linear") c.kernel = KernelKind::linear;
        else reject("kernel", "must be \"rbf\" or \"linear\"", v);
    }
}

std::string config_hash(const FlameConfig& c) {
    const std::string canonical = nlohmann::json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace flame::sampler
