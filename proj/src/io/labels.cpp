#include "flame/io/labels.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <regex>
#include <sstream>

namespace flame::io {

void LabelSet::set(LabelEntry entry) {
    if (entry.label != 0 && entry.label != 1) {
        throw FormatError("label for '" + entry.shot_id + "' is not binary", {{"shot_id", entry.shot_id}});
    }
    auto id = entry.shot_id;
    entries.insert_or_assign(std::move(id), std::move(entry));
}

std::optional<int> LabelSet::label(const std::string& id) const {
    const auto it = entries.find(id);
    if (it == entries.end()) return std::nullopt;
    return it->second.label;
}

std::string now_rfc3339() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool is_rfc3339(const std::string& s) {
    static const std::regex re(R"(^\d{4}-\d{2}-\d{2}[Tt ]\d{2}:\d{2}:\d{2}(\.\d+)?([Zz]|[+-]\d{2}:\d{2})$)");
    return std::regex_match(s, re);
}

void require_known(const LabelSet& labels, const std::set<std::string>& shot_ids) {
    for (const auto& [id, e] : labels.entries) {
        if (!shot_ids.count(id)) throw UnknownShotError("'" + id + "' is not a selected shot", {{"shot_id", id}});
    }
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// Minimal RFC 4180 reader: quoted fields may hold commas, quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t line = 1;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        if (c == '"' && field.empty() && !field_started) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            field_started = false;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            row.push_back(std::move(field));
            field.clear();
            field_started = false;
            if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
            row.clear();
            ++line;
        } else {
            field += c;
            field_started = true;
        }
    }
    if (quoted) throw ParseError("unterminated quoted field near line " + std::to_string(line), {{"line", line}});
    if (field_started || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::string labels_to_csv(const LabelSet& labels) {
    std::string out = "shot_id,label,annotator,timestamp\n";
    for (const auto& [id, e] : labels.entries) {
        out += csv_field(e.shot_id) + "," + std::to_string(e.label) + "," + csv_field(e.annotator) + "," +
               csv_field(e.timestamp) + "\n";
    }
    return out;
}

LabelSet labels_from_csv(const std::string& text) {
    const auto rows = parse_csv(text);
    if (rows.empty()) throw ParseError("label file is empty; expected header shot_id,label,annotator,timestamp");
    const std::vector<std::string> header = {"shot_id", "label", "annotator", "timestamp"};
    if (rows.front() != header) throw ParseError("label header must be shot_id,label,annotator,timestamp");
    LabelSet out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::size_t line = r + 1;
        if (row.size() != 4) {
            throw ParseError("row " + std::to_string(line) + " has " + std::to_string(row.size()) + " fields, expected 4",
                             {{"line", line}});
        }
        if (row[0].empty()) throw ParseError("row " + std::to_string(line) + " has an empty shot_id", {{"line", line}});
        if (row[1] != "0" && row[1] != "1") {
            throw FormatError("row " + std::to_string(line) + ": label '" + row[1] + "' is not 0 or 1",
                              {{"line", line}, {"shot_id", row[0]}});
        }
        if (!is_rfc3339(row[3])) {
            throw FormatError("row " + std::to_string(line) + ": timestamp '" + row[3] + "' is not RFC 3339",
                              {{"line", line}, {"shot_id", row[0]}});
        }
        if (out.entries.count(row[0])) {
            out.warnings.push_back("duplicate label for '" + row[0] + "' on row " + std::to_string(line) +
                                   "; keeping the later value");
        }
        out.set({row[0], row[1] == "1" ? 1 : 0, row[2], row[3]});
    }
    return out;
}

void save_labels(const std::filesystem::path& path, const LabelSet& labels, const std::set<std::string>* shot_ids) {
    if (shot_ids) require_known(labels, *shot_ids);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string(), {{"path", path.string()}});
    out << labels_to_csv(labels);
    if (!out) throw IoError("failed writing " + path.string(), {{"path", path.string()}});
}

LabelSet load_labels(const std::filesystem::path& path, const std::set<std::string>* shot_ids) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string(), {{"path", path.string()}});
    std::ostringstream buffer;
    buffer << in.rdbuf();
    auto labels = labels_from_csv(buffer.str());
    if (shot_ids) require_known(labels, *shot_ids);
    return labels;
}

}  // namespace flame::io
