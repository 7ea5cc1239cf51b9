#include "flame/service/service.hpp"

#include "flame/classifier/model_io.hpp"
#include "flame/pipeline/flame.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <regex>

namespace flame::service {

using nlohmann::json;
namespace fs = std::filesystem;

ServiceConfig config_from_env(ServiceConfig base) {
    if (const char* p = std::getenv("FLAME_PORT"); p && *p) {
        char* end = nullptr;
        const long v = std::strtol(p, &end, 10);
        if (*end != '\0' || v < 0 || v > 65535) {
            throw ConfigError("FLAME_PORT must be an integer in [0, 65535]", {{"field", "FLAME_PORT"}, {"value", p}});
        }
        base.port = static_cast<int>(v);
    }
    if (const char* a = std::getenv("FLAME_ASSETS"); a && *a) base.assets_dir = a;
    if (const char* d = std::getenv("FLAME_DATA"); d && *d) base.data_dir = d;
    return base;
}

int status_for(const std::string& code) {
    if (code == "ConfigError" || code == "ParseError" || code == "FormatError" || code == "IoError") return 400;
    if (code == "NotFoundError" || code == "UnknownShotError") return 404;
    if (code == "PhaseError" || code == "AnnotationIncompleteError") return 409;
    if (code == "EmptyBandError" || code == "InsufficientSamplesError" || code == "EmptyPoolError" ||
        code == "SingleClassError" || code == "DimensionError" || code == "DegenerateVectorError" ||
        code == "NoPositivesError" || code == "ConvergenceError" || code == "DivergenceError" ||
        code == "NotSeparableError") {
        return 422;
    }
    return 500;
}

Response error_response(const Error& e) { return {status_for(e.code()), e.to_json()}; }

namespace {

constexpr const char* kShotsFile = "shots.json";
constexpr const char* kLabelsFile = "labels.csv";
constexpr const char* kModelFile = "model.json";
constexpr const char* kReportFile = "report.json";

const std::regex& session_id_pattern() {
    static const std::regex re("session-[0-9]{4,}");
    return re;
}

// Runs a handler, turning toolkit errors into {code, message, details}.
template <class F>
Response guarded(F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        return error_response(e);
    } catch (const json::exception& e) {
        return error_response(ParseError(std::string("invalid request body: ") + e.what()));
    } catch (const std::exception& e) {
        return {500, {{"code", "InternalError"}, {"message", e.what()}, {"details", json::object()}}};
    }
}

std::string absolute_path(const std::string& p) { return fs::absolute(fs::path(p)).lexically_normal().string(); }

void require_phase(const io::SessionState& s, std::initializer_list<io::Phase> allowed, const std::string& action) {
    for (auto p : allowed) {
        if (s.phase == p) return;
    }
    json names = json::array();
    for (auto p : allowed) names.push_back(io::to_string(p));
    throw PhaseError("cannot " + action + " while session is " + io::to_string(s.phase),
                     {{"phase", io::to_string(s.phase)}, {"allowed", names}});
}

json candidate_json(const json& shot, const io::LabelSet& labels) {
    const std::string id = shot.at("shot_id").get<std::string>();
    json c = {{"shot_id", id},
              {"similarity_c", shot.at("similarity")},
              {"cluster_id", shot.at("cluster_id")},
              {"preview", shot.at("preview")},
              {"image_ref", shot.contains("image_ref") ? shot["image_ref"] : json()},
              {"label", labels.label(id) ? json(*labels.label(id)) : json()}};
    if (shot.contains("image_ref")) c["image_url"] = "/assets/" + shot["image_ref"].get<std::string>();
    return c;
}

json session_summary(const io::SessionState& s) {
    json cfg;
    sampler::to_json(cfg, s.config);
    return {{"id", s.id},
            {"status", io::to_string(s.phase)},
            {"k", s.shot_ids.size()},
            {"labeled", s.shot_ids.size() - s.remaining_labels()},
            {"remaining", s.remaining_labels()},
            {"config", cfg},
            {"config_hash", sampler::config_hash(s.config)},
            {"warnings", s.selection.value("warnings", json::array())},
            {"has_report", !s.report.is_null()}};
}

// Accepts either a list of {shot_id, label} objects or an {id: label} map.
std::vector<std::pair<std::string, json>> label_items(const json& labels) {
    std::vector<std::pair<std::string, json>> out;
    if (labels.is_array()) {
        for (const auto& e : labels) {
            if (!e.is_object() || !e.contains("shot_id") || !e["shot_id"].is_string() || !e.contains("label")) {
                throw ParseError("each label entry needs a string shot_id and a label");
            }
            out.emplace_back(e["shot_id"].get<std::string>(), e["label"]);
        }
    } else if (labels.is_object()) {
        for (const auto& [id, v] : labels.items()) out.emplace_back(id, v);
    } else {
        throw ParseError("labels must be an array or an object");
    }
    return out;
}

int binary_label(const std::string& id, const json& v) {
    if (v.is_number_integer() || v.is_number_unsigned()) {
        const auto x = v.get<long long>();
        if (x == 0 || x == 1) return static_cast<int>(x);
    } else if (v.is_boolean()) {
        return v.get<bool>() ? 1 : 0;
    }
    throw FormatError("label for '" + id + "' must be 0 or 1", {{"shot_id", id}, {"value", v}});
}

}  // namespace

AnnotationService::AnnotationService(ServiceConfig config) : config_(std::move(config)) {
    std::error_code ec;
    fs::create_directories(config_.data_dir, ec);
    if (ec) throw IoError("cannot create data directory " + config_.data_dir.string() + ": " + ec.message());
    // Continue numbering after sessions left by a previous run.
    for (const auto& entry : fs::directory_iterator(config_.data_dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_directory() && std::regex_match(name, session_id_pattern())) {
            next_id_ = std::max<std::size_t>(next_id_, std::stoull(name.substr(8)) + 1);
        }
    }
}

fs::path AnnotationService::session_dir(const std::string& id) const { return config_.data_dir / id; }

std::string AnnotationService::next_session_id() {
    std::lock_guard lock(registry_mutex_);
    char buf[32];
    std::snprintf(buf, sizeof buf, "session-%04zu", next_id_++);
    return buf;
}

std::mutex& AnnotationService::session_mutex(const std::string& id) {
    std::lock_guard lock(registry_mutex_);
    auto& m = session_mutexes_[id];
    if (!m) m = std::make_unique<std::mutex>();
    return *m;
}

io::SessionState AnnotationService::load_existing(const std::string& id) const {
    if (!std::regex_match(id, session_id_pattern()) || !fs::exists(session_dir(id) / "session.json")) {
        throw NotFoundError("unknown session '" + id + "'", {{"session_id", id}});
    }
    return io::load_session(session_dir(id));
}

Response AnnotationService::create_session(const json& body) {
    return guarded([&]() -> Response {
        if (!body.is_object()) throw ParseError("request body must be a JSON object");
        if (!body.contains("pool") || !body["pool"].is_string()) throw ConfigError("'pool' path is required", {{"field", "pool"}});
        if (!body.contains("query") || !body["query"].is_string()) throw ConfigError("'query' path is required", {{"field", "query"}});

        sampler::FlameConfig config;
        if (body.contains("config") && !body["config"].is_null()) sampler::from_json(body["config"], config);
        if (body.contains("seed")) config.seed = body["seed"].get<std::uint64_t>();
        config.validate();

        io::SessionState s;
        s.pool_path = absolute_path(body["pool"].get<std::string>());
        s.query_path = absolute_path(body["query"].get<std::string>());
        s.config = config;
        const auto pool = io::load_pool(s.pool_path);
        s.query = io::load_query(s.query_path);

        const auto sampled = pipeline::sample(pool, s.query, config);
        s.selection = sampled.document;
        s.shot_ids = pipeline::shot_ids(sampled.shots);
        s.phase = io::Phase::awaiting_labels;

        s.id = next_session_id();
        const auto dir = session_dir(s.id);
        fs::create_directories(dir);
        std::lock_guard guard(session_mutex(s.id));
        io::SessionLock lock(dir);
        io::write_file_atomic(dir / kShotsFile, pipeline::document_text(s.selection));
        io::save_session(dir, s);
        io::append_audit(dir, {{"event", "create"}, {"timestamp", io::now_rfc3339()},
                               {"config_hash", sampler::config_hash(config)}, {"k", s.shot_ids.size()}});
        json out = session_summary(s);
        return {201, out};
    });
}

Response AnnotationService::get_session(const std::string& id) {
    return guarded([&]() -> Response {
        std::lock_guard guard(session_mutex(id));
        return {200, session_summary(load_existing(id))};
    });
}

Response AnnotationService::get_candidates(const std::string& id) {
    return guarded([&]() -> Response {
        std::lock_guard guard(session_mutex(id));
        const auto s = load_existing(id);
        require_phase(s, {io::Phase::awaiting_labels, io::Phase::labeled}, "list candidates");
        json cands = json::array();
        for (const auto& shot : s.selection.at("shots")) cands.push_back(candidate_json(shot, s.labels));
        return {200, {{"session_id", s.id}, {"status", io::to_string(s.phase)}, {"candidates", cands}}};
    });
}

Response AnnotationService::submit_labels(const std::string& id, const json& body) {
    return guarded([&]() -> Response {
        if (!body.is_object() || !body.contains("labels")) throw ParseError("request body needs a 'labels' field");
        const std::string annotator = body.value("annotator", "service");
        std::lock_guard guard(session_mutex(id));
        auto s = load_existing(id);
        const auto dir = session_dir(id);
        io::SessionLock lock(dir);
        s = io::load_session(dir);
        require_phase(s, {io::Phase::awaiting_labels, io::Phase::labeled}, "submit labels");

        // Validate the whole batch before touching state.
        const auto known = s.shot_id_set();
        std::vector<io::LabelEntry> batch;
        for (const auto& [shot, value] : label_items(body["labels"])) {
            if (known.count(shot) == 0) {
                throw UnknownShotError("shot '" + shot + "' is not a candidate of session " + id, {{"shot_id", shot}});
            }
            batch.push_back({shot, binary_label(shot, value), annotator, io::now_rfc3339()});
        }
        for (auto& e : batch) {
            const auto previous = s.labels.label(e.shot_id);
            io::append_audit(dir, {{"event", previous ? "relabel" : "label"},
                                   {"shot_id", e.shot_id},
                                   {"label", e.label},
                                   {"previous", previous ? json(*previous) : json()},
                                   {"annotator", e.annotator},
                                   {"timestamp", e.timestamp}});
            s.labels.set(std::move(e));
        }
        const std::size_t remaining = s.remaining_labels();
        s.phase = remaining == 0 ? io::Phase::labeled : io::Phase::awaiting_labels;
        io::save_labels(dir / kLabelsFile, s.labels);
        io::save_session(dir, s);
        json out = {{"session_id", id}, {"accepted", batch.size()}, {"remaining", remaining},
                    {"status", io::to_string(s.phase)}};
        return {remaining == 0 ? 200 : 202, out};
    });
}

Response AnnotationService::train(const std::string& id, const json& body) {
    return guarded([&]() -> Response {
        const bool allow_partial = body.is_object() && body.value("allow_partial", false);
        std::lock_guard guard(session_mutex(id));
        load_existing(id);
        const auto dir = session_dir(id);
        io::SessionLock lock(dir);
        auto s = io::load_session(dir);

        if (s.phase == io::Phase::trained || s.phase == io::Phase::evaluated) {
            return {200, {{"session_id", id}, {"status", io::to_string(s.phase)}, {"cached", true}, {"report", s.report}}};
        }
        require_phase(s, {io::Phase::awaiting_labels, io::Phase::labeled}, "train");
        if (s.phase == io::Phase::awaiting_labels && !allow_partial) {
            throw AnnotationIncompleteError(std::to_string(s.remaining_labels()) + " of " +
                                                std::to_string(s.shot_ids.size()) +
                                                " candidates are unlabeled; submit them or pass allow_partial",
                                            {{"remaining", s.remaining_labels()}});
        }
        if (s.labels.size() == 0) throw AnnotationIncompleteError("no labels submitted", {{"remaining", s.remaining_labels()}});

        const auto pool = io::load_pool(s.pool_path);
        const auto truth = io::load_ground_truth(s.pool_path);
        const auto augmented = sampler::augment_pool(pool.vectors(), s.query);

        const auto t0 = std::chrono::steady_clock::now();
        const auto data = pipeline::build_training_data(augmented, pool, s.shot_ids, s.labels, s.config);
        const auto model = pipeline::train_model(data, s.config);
        const auto report = pipeline::evaluate_pool(model, augmented, pool, truth);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        classifier::save_model(dir / kModelFile, model);
        s.model_file = kModelFile;
        if (report) {
            s.report = pipeline::report_document(*report, model.config_hash, &data, seconds);
            io::write_file_atomic(dir / kReportFile, pipeline::document_text(s.report));
            s.phase = io::Phase::evaluated;
        } else {
            s.phase = io::Phase::trained;
        }
        io::save_session(dir, s);
        io::append_audit(dir, {{"event", "train"}, {"timestamp", io::now_rfc3339()}, {"labels", s.labels.size()},
                               {"partial", s.remaining_labels() > 0}, {"seconds", seconds}});
        return {200, {{"session_id", id}, {"status", io::to_string(s.phase)}, {"cached", false}, {"report", s.report}}};
    });
}

Response AnnotationService::get_report(const std::string& id) {
    return guarded([&]() -> Response {
        std::lock_guard guard(session_mutex(id));
        const auto s = load_existing(id);
        if (s.phase != io::Phase::evaluated) {
            throw PhaseError(s.phase == io::Phase::trained ? "session was trained on a pool without ground truth; no report"
                                                           : "session has not been trained yet",
                             {{"phase", io::to_string(s.phase)}});
        }
        return {200, s.report};
    });
}

// ---------------------------------------------------------------------------

HttpServer::HttpServer(AnnotationService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
    auto& srv = *server_;
    const auto send = [](httplib::Response& res, const Response& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    const auto parse_body = [](const httplib::Request& req) -> json {
        if (req.body.empty()) return json::object();
        return json::parse(req.body);  // json::exception handled by guarded()
    };

    srv.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
    });
    srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });

    srv.Post("/sessions", [this, send, parse_body](const httplib::Request& req, httplib::Response& res) {
        send(res, guarded([&] { return service_.create_session(parse_body(req)); }));
    });
    srv.Get(R"(/sessions/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service_.get_session(req.matches[1]));
    });
    srv.Get(R"(/sessions/([^/]+)/candidates)", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service_.get_candidates(req.matches[1]));
    });
    srv.Post(R"(/sessions/([^/]+)/labels)", [this, send, parse_body](const httplib::Request& req, httplib::Response& res) {
        send(res, guarded([&] { return service_.submit_labels(req.matches[1], parse_body(req)); }));
    });
    srv.Post(R"(/sessions/([^/]+)/train)", [this, send, parse_body](const httplib::Request& req, httplib::Response& res) {
        send(res, guarded([&] { return service_.train(req.matches[1], parse_body(req)); }));
    });
    srv.Get(R"(/sessions/([^/]+)/report)", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service_.get_report(req.matches[1]));
    });
    if (!service_.config().assets_dir.empty()) srv.set_mount_point("/assets", service_.config().assets_dir.string());

    srv.set_error_handler([send](const httplib::Request& req, httplib::Response& res) {
        if (res.status == 404 && res.body.empty()) {
            send(res, error_response(NotFoundError("no route for " + req.method + " " + req.path, {{"path", req.path}})));
        }
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    int bound = -1;
    if (port == 0) {
        bound = server_->bind_to_any_port(host);
    } else if (server_->bind_to_port(host, port)) {
        bound = port;
    }
    if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void HttpServer::run() { server_->listen_after_bind(); }

void HttpServer::start() {
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

void HttpServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace flame::service
