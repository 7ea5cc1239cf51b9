#include "flame/io/config_file.hpp"

#include "flame/io/session.hpp"

#include <cctype>
#include <charconv>

namespace flame::io {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_line(std::size_t line, const std::string& why) {
    throw ParseError("config line " + std::to_string(line) + ": " + why, {{"line", line}});
}

json parse_value(const std::string& raw, std::size_t line) {
    if (raw.empty()) bad_line(line, "missing value");
    if (raw.front() == '"') {
        std::string out;
        std::size_t i = 1;
        for (; i < raw.size() && raw[i] != '"'; ++i) {
            if (raw[i] == '\\' && i + 1 < raw.size()) {
                const char c = raw[++i];
                if (c == 'n') out += '\n';
                else if (c == 't') out += '\t';
                else out += c;
            } else {
                out += raw[i];
            }
        }
        if (i >= raw.size()) bad_line(line, "unterminated string");
        if (!trim(std::string_view(raw).substr(i + 1)).empty()) bad_line(line, "text after string value");
        return out;
    }
    if (raw == "true") return true;
    if (raw == "false") return false;
    std::string num;
    for (char c : raw) {
        if (c != '_') num += c;
    }
    const bool looks_float = num.find_first_of(".eE") != std::string::npos || num == "inf" || num == "nan";
    if (!looks_float) {
        long long v = 0;
        const auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
        if (ec == std::errc() && p == num.data() + num.size()) return v;
    } else {
        double v = 0.0;
        const auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
        if (ec == std::errc() && p == num.data() + num.size()) return v;
    }
    bad_line(line, "unsupported value '" + raw + "'");
}

}  // namespace

json parse_flat_toml(const std::string& text) {
    json out = json::object();
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool seen_table = false;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string line(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        // Strip comments that are not inside a string.
        bool in_string = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
            if (line[i] == '#' && !in_string) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line != "[flame]" || seen_table || !out.empty()) bad_line(line_no, "only a single leading [flame] table is supported");
            seen_table = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) bad_line(line_no, "expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        if (key.empty()) bad_line(line_no, "empty key");
        for (char c : key) {
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) bad_line(line_no, "invalid key '" + key + "'");
        }
        if (out.contains(key)) bad_line(line_no, "duplicate key '" + key + "'");
        out[key] = parse_value(trim(std::string_view(line).substr(eq + 1)), line_no);
    }
    return out;
}

sampler::FlameConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    json j;
    if (path.extension() == ".toml") {
        j = parse_flat_toml(text);
    } else {
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw ParseError("config " + path.string() + " is not valid JSON: " + e.what());
        }
    }
    sampler::FlameConfig config;
    sampler::from_json(j, config);
    config.validate();
    return config;
}

}  // namespace flame::io
