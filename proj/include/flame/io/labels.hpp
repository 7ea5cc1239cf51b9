#pragma once
// Collected shot labels, persisted as CSV with the header
//   shot_id,label,annotator,timestamp
// where label is 0/1 and timestamp is RFC 3339.

#include "flame/error.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace flame::io {

struct LabelEntry {
    std::string shot_id;
    int label = 0;
    std::string annotator;
    std::string timestamp;

    friend bool operator==(const LabelEntry&, const LabelEntry&) = default;
};

/// Labels keyed by shot id (ordered, so iteration and output are deterministic).
struct LabelSet {
    std::map<std::string, LabelEntry> entries;
    std::vector<std::string> warnings;  // e.g. duplicate rows on load

    /// Inserts or overwrites. FormatError for non-binary labels.
    void set(LabelEntry entry);
    std::optional<int> label(const std::string& id) const;
    std::size_t size() const noexcept { return entries.size(); }

    friend bool operator==(const LabelSet& a, const LabelSet& b) { return a.entries == b.entries; }
};

/// Current UTC time as RFC 3339 with second precision ("2024-05-01T12:00:00Z").
std::string now_rfc3339();
bool is_rfc3339(const std::string& s);

/// UnknownShotError when a label id is not in `shot_ids`.
void require_known(const LabelSet& labels, const std::set<std::string>& shot_ids);

/// Writes every entry; UnknownShotError if `shot_ids` is given and an id falls outside it.
void save_labels(const std::filesystem::path& path, const LabelSet& labels,
                 const std::set<std::string>* shot_ids = nullptr);

/// Duplicate rows resolve last-write-wins and add a warning. Errors:
/// ParseError (malformed CSV or header), FormatError (non-binary label or bad
/// timestamp), UnknownShotError (id outside `shot_ids` when given).
LabelSet load_labels(const std::filesystem::path& path, const std::set<std::string>* shot_ids = nullptr);

std::string labels_to_csv(const LabelSet& labels);
LabelSet labels_from_csv(const std::string& text);

}  // namespace flame::io
