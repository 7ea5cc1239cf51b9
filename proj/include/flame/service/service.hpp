#pragma once
// Annotation service: FLAME sessions over HTTP/JSON. The handlers are plain
// member functions returning {status, body} so they can be exercised without
// a socket; HttpServer binds them to routes.

#include "flame/io/session.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace flame::service {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path data_dir = "flame-data";
    std::filesystem::path assets_dir;  // empty: /assets disabled
};

/// Defaults overridden by FLAME_PORT, FLAME_ASSETS and FLAME_DATA.
ServiceConfig config_from_env(ServiceConfig base = {});

struct Response {
    int status = 200;
    nlohmann::json body;
};

/// HTTP status for an error code (400, 404, 409, 422 or 500).
int status_for(const std::string& error_code);
Response error_response(const Error& e);

class AnnotationService {
public:
    explicit AnnotationService(ServiceConfig config);

    const ServiceConfig& config() const noexcept { return config_; }
    std::filesystem::path session_dir(const std::string& id) const;

    /// Body: {"pool": path, "query": path, "config": {...}?, "seed": n?}.
    Response create_session(const nlohmann::json& body);
    Response get_session(const std::string& id);
    Response get_candidates(const std::string& id);
    /// Body: {"labels": [{"shot_id", "label"}...] or {"<id>": 0|1, ...}, "annotator": name?}.
    Response submit_labels(const std::string& id, const nlohmann::json& body);
    /// Body: {"allow_partial": bool}? Training is rejected with 409 while
    /// labels are missing unless allow_partial is set.
    Response train(const std::string& id, const nlohmann::json& body);
    Response get_report(const std::string& id);

private:
    std::mutex& session_mutex(const std::string& id);
    io::SessionState load_existing(const std::string& id) const;
    std::string next_session_id();

    ServiceConfig config_;
    std::mutex registry_mutex_;
    std::map<std::string, std::unique_ptr<std::mutex>> session_mutexes_;
    std::size_t next_id_ = 1;
};

/// Routes the service onto cpp-httplib. Every response carries
/// `Access-Control-Allow-Origin: *`; preflight OPTIONS requests get 204.
class HttpServer {
public:
    explicit HttpServer(AnnotationService& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds to host:port (port 0 picks a free one) and returns the bound
    /// port. IoError when binding fails.
    int bind(const std::string& host, int port);
    /// Serves until stop(); blocks the caller.
    void run();
    /// Serves on a background thread.
    void start();
    void stop();

private:
    AnnotationService& service_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

}  // namespace flame::service
