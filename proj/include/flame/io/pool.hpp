#pragma once
// Embedding pools on disk. Two formats share one reader:
//   JSON Lines: {"id": "...", "vector": [...], "gt": 0|1|null, "image_ref": "...", "meta": {...}}
//   Binary:     "FLMP", u16 version, u64 count, u32 dim, then per record a
//               u32-length-prefixed UTF-8 id, dim little-endian f32 values
//               and a gt byte (0, 1, or 255 for absent). All integers little-endian.
// Ground truth is returned by a separate call so sampling code never sees it.

#include "flame/numerics/point_set.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace flame::io {

enum class PoolFormat { jsonl, binary };

inline constexpr std::uint16_t kBinaryPoolVersion = 1;
inline constexpr std::uint8_t kAbsentTruth = 255;

std::string to_string(PoolFormat f);
/// ConfigError for anything other than "json", "jsonl" or "binary".
PoolFormat parse_pool_format(const std::string& s);

struct PoolRecord {
    std::string id;
    Vector vector;
    std::optional<std::string> image_ref;
    nlohmann::json meta;  // null when absent

    friend bool operator==(const PoolRecord&, const PoolRecord&) = default;
};

class Pool {
public:
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    std::size_t dim() const noexcept { return dim_; }

    const PoolRecord& operator[](std::size_t i) const { return records_[i]; }
    const std::vector<PoolRecord>& records() const noexcept { return records_; }

    /// Validates dimension, finiteness and id uniqueness.
    void add(PoolRecord record);
    std::optional<std::size_t> find(const std::string& id) const;
    /// Index of `id`; UnknownShotError when absent.
    std::size_t index_of(const std::string& id) const;

    PointSet vectors() const;

    friend bool operator==(const Pool& a, const Pool& b) { return a.records_ == b.records_; }

private:
    std::vector<PoolRecord> records_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t dim_ = 0;
};

/// Binary ground-truth labels keyed by record id; evaluation and oracle use only.
class GroundTruth {
public:
    void set(const std::string& id, int label);
    std::optional<int> label(const std::string& id) const;
    bool contains(const std::string& id) const { return labels_.count(id) > 0; }
    std::size_t size() const noexcept { return labels_.size(); }
    std::size_t positives() const;

    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;

private:
    std::unordered_map<std::string, int> labels_;
};

/// Detects the format from the leading magic bytes. Errors: IoError when the
/// file cannot be read, EmptyPoolError for an empty pool, ParseError with the
/// line number, DimensionError naming the offending id, FormatError for
/// duplicate ids, non-finite values or a malformed binary layout.
Pool load_pool(const std::filesystem::path& path);
GroundTruth load_ground_truth(const std::filesystem::path& path);

/// Binary output stores vectors as f32 and drops image_ref and meta.
void save_pool(const std::filesystem::path& path, const Pool& pool, const GroundTruth* truth, PoolFormat format);

PoolFormat detect_pool_format(const std::filesystem::path& path);

/// A query embedding: a bare JSON array, or an object with a "vector" field.
Vector load_query(const std::filesystem::path& path);
void save_query(const std::filesystem::path& path, std::span<const double> query);

}  // namespace flame::io
