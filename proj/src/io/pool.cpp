#include "flame/io/pool.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace flame::io {

using nlohmann::json;

std::string to_string(PoolFormat f) { return f == PoolFormat::binary ? "binary" : "json"; }

PoolFormat parse_pool_format(const std::string& s) {
    if (s == "json" || s == "jsonl") return PoolFormat::jsonl;
    if (s == "binary") return PoolFormat::binary;
    throw ConfigError("unknown format '" + s + "'; expected json or binary", {{"field", "format"}});
}

void Pool::add(PoolRecord record) {
    if (record.id.empty()) throw FormatError("pool record has an empty id");
    if (records_.empty()) dim_ = record.vector.size();
    if (record.vector.size() != dim_) {
        throw DimensionError("record '" + record.id + "' has dimension " + std::to_string(record.vector.size()) +
                                 ", pool dimension is " + std::to_string(dim_),
                             {{"id", record.id}, {"dim", record.vector.size()}, {"expected", dim_}});
    }
    try {
        require_finite(record.vector, "record '" + record.id + "'");
    } catch (const Error& e) {
        auto details = e.details();
        details["id"] = record.id;
        if (e.code() == "DimensionError") throw DimensionError(e.what(), details);
        throw FormatError(e.what(), details);
    }
    if (index_.count(record.id)) throw FormatError("duplicate id '" + record.id + "'", {{"id", record.id}});
    index_.emplace(record.id, records_.size());
    records_.push_back(std::move(record));
}

std::optional<std::size_t> Pool::find(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t Pool::index_of(const std::string& id) const {
    if (auto i = find(id)) return *i;
    throw UnknownShotError("id '" + id + "' is not in the pool", {{"id", id}});
}

PointSet Pool::vectors() const {
    PointSet out(0, dim_);
    for (const auto& r : records_) out.push_back(r.vector);
    return out;
}

void GroundTruth::set(const std::string& id, int label) {
    if (label != 0 && label != 1) throw FormatError("ground truth for '" + id + "' is not binary", {{"id", id}});
    labels_[id] = label;
}

std::optional<int> GroundTruth::label(const std::string& id) const {
    const auto it = labels_.find(id);
    if (it == labels_.end()) return std::nullopt;
    return it->second;
}

std::size_t GroundTruth::positives() const {
    std::size_t n = 0;
    for (const auto& [id, y] : labels_) n += y == 1;
    return n;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string(), {{"path", path.string()}});
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

struct ParsedPool {
    Pool pool;
    GroundTruth truth;
};

int parse_truth(const json& gt, const std::string& id, std::size_t line) {
    if (gt.is_boolean()) return gt.get<bool>() ? 1 : 0;
    if (gt.is_number_integer() || gt.is_number_unsigned()) {
        const auto v = gt.get<std::int64_t>();
        if (v == 0 || v == 1) return static_cast<int>(v);
    }
    throw FormatError("gt for '" + id + "' on line " + std::to_string(line) + " is not 0 or 1",
                      {{"id", id}, {"line", line}});
}

ParsedPool parse_jsonl(const std::string& text) {
    ParsedPool out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what(), {{"line", line_no}});
        } catch (const json::out_of_range& e) {
            // Literals beyond double range, e.g. 1e999.
            throw FormatError("line " + std::to_string(line_no) + ": non-finite value: " + e.what(), {{"line", line_no}});
        }
        if (!j.is_object() || !j.contains("id") || !j.contains("vector")) {
            throw ParseError("line " + std::to_string(line_no) + ": record needs 'id' and 'vector'", {{"line", line_no}});
        }
        PoolRecord r;
        try {
            r.id = j.at("id").get<std::string>();
            r.vector = j.at("vector").get<Vector>();
            if (j.contains("image_ref") && !j["image_ref"].is_null()) r.image_ref = j["image_ref"].get<std::string>();
        } catch (const json::exception& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what(), {{"line", line_no}});
        }
        if (j.contains("meta") && !j["meta"].is_null()) {
            if (!j["meta"].is_object()) {
                throw ParseError("line " + std::to_string(line_no) + ": 'meta' must be an object", {{"line", line_no}});
            }
            r.meta = j["meta"];
        }
        const std::string id = r.id;
        if (j.contains("gt") && !j["gt"].is_null()) out.truth.set(id, parse_truth(j["gt"], id, line_no));
        try {
            out.pool.add(std::move(r));
        } catch (Error& e) {
            auto details = e.details();
            details["line"] = line_no;
            if (e.code() == "DimensionError") throw DimensionError(std::string(e.what()) + " (line " + std::to_string(line_no) + ")", details);
            throw FormatError(std::string(e.what()) + " (line " + std::to_string(line_no) + ")", details);
        }
    }
    if (out.pool.empty()) throw EmptyPoolError("pool file holds no records");
    return out;
}

class ByteReader {
public:
    explicit ByteReader(std::string_view data) : data_(data) {}

    template <typename T>
    T read_uint() {
        need(sizeof(T));
        T v = 0;
        for (std::size_t b = 0; b < sizeof(T); ++b) {
            v |= static_cast<T>(static_cast<T>(static_cast<unsigned char>(data_[pos_ + b])) << (8 * b));
        }
        pos_ += sizeof(T);
        return v;
    }

    float read_f32() { return std::bit_cast<float>(read_uint<std::uint32_t>()); }

    std::string read_bytes(std::size_t n) {
        need(n);
        std::string s(data_.substr(pos_, n));
        pos_ += n;
        return s;
    }

    bool done() const noexcept { return pos_ == data_.size(); }
    std::size_t position() const noexcept { return pos_; }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) {
            throw FormatError("binary pool truncated at byte " + std::to_string(pos_), {{"offset", pos_}});
        }
    }

    std::string_view data_;
    std::size_t pos_ = 0;
};

ParsedPool parse_binary(const std::string& text) {
    ByteReader in(text);
    in.read_bytes(4);
    const auto version = in.read_uint<std::uint16_t>();
    if (version != kBinaryPoolVersion) {
        throw FormatError("unsupported binary pool version " + std::to_string(version), {{"version", version}});
    }
    const auto count = in.read_uint<std::uint64_t>();
    const auto dim = in.read_uint<std::uint32_t>();
    if (count == 0) throw EmptyPoolError("pool file holds no records");
    if (dim == 0) throw FormatError("binary pool declares dimension 0");
    ParsedPool out;
    for (std::uint64_t r = 0; r < count; ++r) {
        PoolRecord rec;
        const auto len = in.read_uint<std::uint32_t>();
        rec.id = in.read_bytes(len);
        rec.vector.resize(dim);
        for (auto& v : rec.vector) v = static_cast<double>(in.read_f32());
        const auto gt = in.read_uint<std::uint8_t>();
        if (gt == 0 || gt == 1) out.truth.set(rec.id, gt);
        else if (gt != kAbsentTruth) {
            throw FormatError("record '" + rec.id + "' has gt byte " + std::to_string(gt), {{"id", rec.id}});
        }
        out.pool.add(std::move(rec));
    }
    if (!in.done()) throw FormatError("trailing bytes after the last record", {{"offset", in.position()}});
    return out;
}

bool has_binary_magic(std::string_view text) { return text.size() >= 4 && text.substr(0, 4) == "FLMP"; }

ParsedPool parse_pool_file(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    if (text.empty()) throw EmptyPoolError("pool file " + path.string() + " is empty");
    return has_binary_magic(text) ? parse_binary(text) : parse_jsonl(text);
}

template <typename T>
void write_uint(std::string& out, T v) {
    for (std::size_t b = 0; b < sizeof(T); ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string(), {{"path", path.string()}});
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string(), {{"path", path.string()}});
}

}  // namespace

Pool load_pool(const std::filesystem::path& path) { return parse_pool_file(path).pool; }

GroundTruth load_ground_truth(const std::filesystem::path& path) { return parse_pool_file(path).truth; }

PoolFormat detect_pool_format(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string(), {{"path", path.string()}});
    char magic[4] = {};
    in.read(magic, 4);
    return in.gcount() == 4 && std::memcmp(magic, "FLMP", 4) == 0 ? PoolFormat::binary : PoolFormat::jsonl;
}

void save_pool(const std::filesystem::path& path, const Pool& pool, const GroundTruth* truth, PoolFormat format) {
    std::string bytes;
    if (format == PoolFormat::jsonl) {
        for (const auto& r : pool.records()) {
            json j = {{"id", r.id}, {"vector", r.vector}};
            if (truth) {
                if (auto gt = truth->label(r.id)) j["gt"] = *gt;
            }
            if (r.image_ref) j["image_ref"] = *r.image_ref;
            if (!r.meta.is_null()) j["meta"] = r.meta;
            bytes += j.dump();
            bytes += '\n';
        }
    } else {
        bytes = "FLMP";
        write_uint<std::uint16_t>(bytes, kBinaryPoolVersion);
        write_uint<std::uint64_t>(bytes, pool.size());
        write_uint<std::uint32_t>(bytes, static_cast<std::uint32_t>(pool.dim()));
        for (const auto& r : pool.records()) {
            write_uint<std::uint32_t>(bytes, static_cast<std::uint32_t>(r.id.size()));
            bytes += r.id;
            for (double v : r.vector) write_uint<std::uint32_t>(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
            std::uint8_t gt = kAbsentTruth;
            if (truth) {
                if (auto y = truth->label(r.id)) gt = static_cast<std::uint8_t>(*y);
            }
            write_uint<std::uint8_t>(bytes, gt);
        }
    }
    write_file(path, bytes);
}

Vector load_query(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError("query file " + path.string() + ": " + e.what());
    }
    Vector q;
    try {
        q = j.is_object() ? j.at("vector").get<Vector>() : j.get<Vector>();
    } catch (const json::exception& e) {
        throw FormatError("query file " + path.string() + " needs a numeric array or a 'vector' field");
    }
    require_finite(q, "query");
    return q;
}

void save_query(const std::filesystem::path& path, std::span<const double> query) {
    write_file(path, json{{"vector", Vector(query.begin(), query.end())}}.dump() + "\n");
}

}  // namespace flame::io
