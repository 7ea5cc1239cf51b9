#pragma once

#include "flame/numerics/point_set.hpp"

#include <span>

namespace flame::numerics {

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

/// xᵀt / (‖x‖·‖t‖), clamped to [-1, 1].
/// Throws DimensionError on size mismatch, DegenerateVectorError on a zero vector.
double cosine_similarity(std::span<const double> x, std::span<const double> t);

}  // namespace flame::numerics
