#pragma once
// Persistent state of one labeling session, stored as JSON under
// <data_dir>/<session id>/session.json and guarded by an flock'd lock file.

#include "flame/io/labels.hpp"
#include "flame/numerics/point_set.hpp"
#include "flame/sampler/config.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace flame::io {

/// Forward-only session phases. `labeled` marks a complete label set that
/// is ready for training.
enum class Phase { sampling, awaiting_labels, labeled, trained, evaluated };

std::string to_string(Phase p);
Phase parse_phase(const std::string& s);

struct SessionState {
    std::string id;
    Phase phase = Phase::sampling;
    sampler::FlameConfig config;
    std::string pool_path;
    std::string query_path;
    Vector query;
    nlohmann::json selection;             // shot-list document as written by `flame sample`
    std::vector<std::string> shot_ids;    // selection order
    LabelSet labels;
    std::optional<std::string> model_file;  // relative to the session directory
    nlohmann::json report;                  // null until evaluated

    std::set<std::string> shot_id_set() const { return {shot_ids.begin(), shot_ids.end()}; }
    std::size_t remaining_labels() const;
};

nlohmann::json to_json(const SessionState& s);
SessionState session_from_json(const nlohmann::json& j);

/// Writes session.json atomically (temporary file + rename).
void save_session(const std::filesystem::path& dir, const SessionState& s);
SessionState load_session(const std::filesystem::path& dir);

/// Writes `text` to `path` through a temporary sibling and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

/// Exclusive advisory lock on <dir>/.lock held for the object's lifetime.
class SessionLock {
public:
    explicit SessionLock(const std::filesystem::path& dir);
    ~SessionLock();
    SessionLock(const SessionLock&) = delete;
    SessionLock& operator=(const SessionLock&) = delete;

private:
    int fd_ = -1;
};

/// Appends one JSON line to <dir>/audit.log.
void append_audit(const std::filesystem::path& dir, const nlohmann::json& entry);

}  // namespace flame::io
