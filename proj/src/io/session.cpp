#include "flame/io/session.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace flame::io {

using nlohmann::json;

std::string to_string(Phase p) {
    switch (p) {
        case Phase::sampling: return "sampling";
        case Phase::awaiting_labels: return "awaiting_labels";
        case Phase::labeled: return "labeled";
        case Phase::trained: return "trained";
        case Phase::evaluated: return "evaluated";
    }
    return "sampling";
}

Phase parse_phase(const std::string& s) {
    for (Phase p : {Phase::sampling, Phase::awaiting_labels, Phase::labeled, Phase::trained, Phase::evaluated}) {
        if (to_string(p) == s) return p;
    }
    throw FormatError("unknown session phase '" + s + "'");
}

std::size_t SessionState::remaining_labels() const {
    std::size_t n = 0;
    for (const auto& id : shot_ids) n += labels.entries.count(id) == 0;
    return n;
}

json to_json(const SessionState& s) {
    json labels = json::array();
    for (const auto& [id, e] : s.labels.entries) {
        labels.push_back({{"shot_id", e.shot_id}, {"label", e.label}, {"annotator", e.annotator}, {"timestamp", e.timestamp}});
    }
    json config;
    sampler::to_json(config, s.config);
    return {{"id", s.id},
            {"phase", to_string(s.phase)},
            {"config", config},
            {"pool_path", s.pool_path},
            {"query_path", s.query_path},
            {"query", s.query},
            {"selection", s.selection},
            {"shot_ids", s.shot_ids},
            {"labels", labels},
            {"model_file", s.model_file ? json(*s.model_file) : json()},
            {"report", s.report}};
}

SessionState session_from_json(const json& j) {
    try {
        SessionState s;
        s.id = j.at("id").get<std::string>();
        s.phase = parse_phase(j.at("phase").get<std::string>());
        sampler::from_json(j.at("config"), s.config);
        s.pool_path = j.at("pool_path").get<std::string>();
        s.query_path = j.value("query_path", "");
        s.query = j.at("query").get<Vector>();
        s.selection = j.at("selection");
        s.shot_ids = j.at("shot_ids").get<std::vector<std::string>>();
        for (const auto& e : j.at("labels")) {
            s.labels.set({e.at("shot_id").get<std::string>(), e.at("label").get<int>(),
                          e.value("annotator", ""), e.value("timestamp", "")});
        }
        if (j.contains("model_file") && !j["model_file"].is_null()) s.model_file = j["model_file"].get<std::string>();
        s.report = j.value("report", json());
        return s;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed session document: ") + e.what());
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string(), {{"path", path.string()}});
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string(), {{"path", tmp.string()}});
        out << text;
        out.flush();
        if (!out) throw IoError("failed writing " + tmp.string(), {{"path", tmp.string()}});
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message(), {{"path", path.string()}});
}

void save_session(const std::filesystem::path& dir, const SessionState& s) {
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "session.json", to_json(s).dump(2) + "\n");
}

SessionState load_session(const std::filesystem::path& dir) {
    const auto text = read_text_file(dir / "session.json");
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError("session file in " + dir.string() + " is not valid JSON: " + e.what());
    }
    return session_from_json(j);
}

SessionLock::SessionLock(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto path = (dir / ".lock").string();
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open lock file " + path + ": " + std::strerror(errno));
    while (::flock(fd_, LOCK_EX) != 0) {
        if (errno != EINTR) {
            const int err = errno;
            ::close(fd_);
            throw IoError("cannot lock " + path + ": " + std::strerror(err));
        }
    }
}

SessionLock::~SessionLock() {
    if (fd_ >= 0) {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

void append_audit(const std::filesystem::path& dir, const json& entry) {
    std::ofstream out(dir / "audit.log", std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to audit log in " + dir.string());
    out << entry.dump() << "\n";
}

}  // namespace flame::io
