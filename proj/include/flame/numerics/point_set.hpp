#pragma once

#include "flame/error.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace flame {

/// Dense real vector. Embedding coordinates are unitless.
using Vector = std::vector<double>;

/// Throws DimensionError / FormatError when `v` is empty or non-finite.
inline void require_finite(std::span<const double> v, const std::string& what) {
    if (v.empty()) throw DimensionError(what + ": vector has dimension 0");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            throw FormatError(what + ": non-finite value at coordinate " + std::to_string(i),
                              {{"coordinate", i}});
        }
    }
}

/// Row-major block of equally sized points; the unit every kernel works on.
class PointSet {
public:
    PointSet() = default;
    PointSet(std::size_t rows, std::size_t dim) : rows_(rows), dim_(dim), data_(rows * dim, 0.0) {}

    static PointSet from_rows(const std::vector<Vector>& rows) {
        if (rows.empty()) return {};
        PointSet out(0, rows.front().size());
        out.data_.reserve(rows.size() * out.dim_);
        for (const auto& r : rows) out.push_back(r);
        return out;
    }

    std::size_t size() const noexcept { return rows_; }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return rows_ == 0; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }

    Vector row_vector(std::size_t i) const {
        const auto r = row(i);
        return {r.begin(), r.end()};
    }

    void push_back(std::span<const double> values) {
        if (rows_ == 0 && dim_ == 0) dim_ = values.size();
        if (values.size() != dim_) {
            throw DimensionError("point of dimension " + std::to_string(values.size()) +
                                 " added to a set of dimension " + std::to_string(dim_));
        }
        data_.insert(data_.end(), values.begin(), values.end());
        ++rows_;
    }

    /// Rows selected by `indices`, in that order.
    PointSet subset(std::span<const std::size_t> indices) const {
        PointSet out(0, dim_);
        out.data_.reserve(indices.size() * dim_);
        for (auto i : indices) out.push_back(row(i));
        return out;
    }

    const std::vector<double>& data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    friend bool operator==(const PointSet&, const PointSet&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

}  // namespace flame
