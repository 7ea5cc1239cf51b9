#include "flame/classifier/model_io.hpp"

#include <fstream>
#include <sstream>

namespace flame::classifier {

using nlohmann::json;

namespace {

json rows_to_json(const PointSet& p) {
    json rows = json::array();
    for (std::size_t i = 0; i < p.size(); ++i) rows.push_back(p.row_vector(i));
    return rows;
}

PointSet rows_from_json(const json& j, std::size_t dim) {
    PointSet p(0, dim);
    for (const auto& r : j) p.push_back(r.get<Vector>());
    return p;
}

template <typename T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw FormatError(std::string("model document lacks field '") + key + "'", {{"field", key}});
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("model field '") + key + "' is malformed: " + e.what(), {{"field", key}});
    }
}

}  // namespace

std::size_t TrainedModel::input_dim() const {
    return std::visit([](const auto& m) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, SvmModel>) return m.dim;
        else return m.input_dim;
    }, model);
}

double TrainedModel::score(std::span<const double> x) const {
    if (const auto* svm = std::get_if<SvmModel>(&model)) return svm_decision(*svm, x);
    return mlp_forward(std::get<MlpModel>(model), x);
}

json svm_to_json(const SvmModel& m) {
    json kernel = {{"kind", sampler::to_string(m.kernel.kind)}};
    if (m.kernel.kind == KernelKind::rbf) kernel["gamma"] = m.kernel.gamma;
    return {
        {"kernel", kernel},
        {"C", m.C},
        {"bias", m.bias},
        {"dim", m.dim},
        {"training_size", m.training_size},
        {"alphas", m.alphas},
        {"support_labels", m.support_labels},
        {"support_indices", m.support_indices},
        {"support_vectors", rows_to_json(m.support_vectors)},
    };
}

SvmModel svm_from_json(const json& j) {
    SvmModel m;
    const auto kernel = field<json>(j, "kernel");
    const auto kind = field<std::string>(kernel, "kind");
    if (kind == "linear") m.kernel = KernelSpec::linear();
    else if (kind == "rbf") m.kernel = KernelSpec::rbf(field<double>(kernel, "gamma"));
    else throw FormatError("unknown kernel kind '" + kind + "'");
    m.C = field<double>(j, "C");
    m.bias = field<double>(j, "bias");
    m.dim = field<std::size_t>(j, "dim");
    m.training_size = field<std::size_t>(j, "training_size");
    m.alphas = field<std::vector<double>>(j, "alphas");
    m.support_labels = field<std::vector<int>>(j, "support_labels");
    m.support_indices = field<std::vector<std::size_t>>(j, "support_indices");
    m.support_vectors = rows_from_json(field<json>(j, "support_vectors"), m.dim);
    const std::size_t s = m.alphas.size();
    if (m.support_labels.size() != s || m.support_indices.size() != s || m.support_vectors.size() != s) {
        throw FormatError("support vector arrays differ in length");
    }
    return m;
}

json mlp_to_json(const MlpModel& m) {
    return {
        {"input_dim", m.input_dim},
        {"hidden", m.hidden},
        {"first_layer", rows_to_json(m.first_layer)},
        {"second_layer", m.second_layer},
    };
}

MlpModel mlp_from_json(const json& j) {
    MlpModel m;
    m.input_dim = field<std::size_t>(j, "input_dim");
    m.hidden = field<std::size_t>(j, "hidden");
    m.first_layer = rows_from_json(field<json>(j, "first_layer"), m.input_dim);
    m.second_layer = field<Vector>(j, "second_layer");
    if (m.first_layer.size() != m.hidden || m.second_layer.size() != m.hidden) {
        throw FormatError("network layer shapes do not match the hidden width");
    }
    return m;
}

json model_to_json(const TrainedModel& model) {
    json j = {{"format", "flame-model"}, {"version", kModelFormatVersion}, {"config_hash", model.config_hash}};
    if (const auto* svm = std::get_if<SvmModel>(&model.model)) {
        j["type"] = "svm";
        j["svm"] = svm_to_json(*svm);
    } else {
        j["type"] = "mlp";
        j["mlp"] = mlp_to_json(std::get<MlpModel>(model.model));
    }
    return j;
}

TrainedModel model_from_json(const json& j) {
    if (!j.is_object() || j.value("format", "") != "flame-model") throw FormatError("not a model document");
    const int version = field<int>(j, "version");
    if (version != kModelFormatVersion) {
        throw FormatError("unsupported model version " + std::to_string(version), {{"version", version}});
    }
    TrainedModel out;
    out.config_hash = field<std::string>(j, "config_hash");
    const auto type = field<std::string>(j, "type");
    if (type == "svm") out.model = svm_from_json(field<json>(j, "svm"));
    else if (type == "mlp") out.model = mlp_from_json(field<json>(j, "mlp"));
    else throw FormatError("unknown model type '" + type + "'");
    return out;
}

std::string model_document(const TrainedModel& model) { return model_to_json(model).dump(2) + "\n"; }

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write model file " + path.string());
    out << model_document(model);
    if (!out) throw IoError("failed writing model file " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    json j;
    try {
        j = json::parse(buffer.str());
    } catch (const json::exception& e) {
        throw ParseError("model file " + path.string() + " is not valid JSON: " + e.what());
    }
    return model_from_json(j);
}

}  // namespace flame::classifier
