#include "flame/numerics/kmeans.hpp"

#include "flame/numerics/random.hpp"
#include "flame/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace flame::numerics {

namespace {

std::size_t count_distinct(const PointSet& X, std::size_t stop_at) {
    std::vector<std::size_t> order(X.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ra = X.row(a);
        const auto rb = X.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });
    std::size_t distinct = order.empty() ? 0 : 1;
    for (std::size_t i = 1; i < order.size() && distinct < stop_at; ++i) {
        const auto a = X.row(order[i - 1]);
        const auto b = X.row(order[i]);
        if (!std::equal(a.begin(), a.end(), b.begin())) ++distinct;
    }
    return distinct;
}

PointSet seed_plus_plus(const PointSet& X, std::size_t k, Rng& rng) {
    const auto& kern = simd::kernels();
    const std::size_t n = X.size();
    PointSet centers(0, X.dim());
    centers.push_back(X.row(rng.index(n)));

    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i) {
        nearest[i] = kern.squared_distance(X.row(i).data(), centers.row(0).data(), X.dim());
    }
    while (centers.size() < k) {
        const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
        std::size_t pick = n - 1;
        const double target = rng.uniform() * total;
        double running = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            running += nearest[i];
            if (nearest[i] > 0.0 && running > target) {
                pick = i;
                break;
            }
        }
        while (nearest[pick] <= 0.0 && pick > 0) --pick;  // rounding guard at the tail
        centers.push_back(X.row(pick));
        const auto c = centers.row(centers.size() - 1);
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], kern.squared_distance(X.row(i).data(), c.data(), X.dim()));
        }
    }
    return centers;
}

// Assigns every point to its nearest center; returns inertia.
double assign(const PointSet& X, const PointSet& centers, std::vector<std::size_t>& assignment,
              std::vector<double>& distances) {
    const auto& kern = simd::kernels();
    double inertia = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centers.size(); ++c) {
            const double d = kern.squared_distance(X.row(i).data(), centers.row(c).data(), X.dim());
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        assignment[i] = best;
        distances[i] = best_d;
        inertia += best_d;
    }
    return inertia;
}

std::vector<std::size_t> cluster_sizes(const std::vector<std::size_t>& assignment, std::size_t k) {
    std::vector<std::size_t> sizes(k, 0);
    for (auto a : assignment) ++sizes[a];
    return sizes;
}

}  // namespace

Clustering kmeans(const PointSet& X, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
    if (k == 0) throw ConfigError("k-means needs K >= 1", {{"field", "shots_k"}, {"value", k}});
    if (X.size() < k) {
        throw InsufficientSamplesError("k-means with K=" + std::to_string(k) + " on " + std::to_string(X.size()) +
                                           " points",
                                       {{"k", k}, {"points", X.size()}});
    }
    if (const auto distinct = count_distinct(X, k); distinct < k) {
        throw InsufficientSamplesError("k-means with K=" + std::to_string(k) + " on only " +
                                           std::to_string(distinct) + " distinct points",
                                       {{"k", k}, {"distinct_points", distinct}});
    }

    Rng rng(seed, 0x6b6d65616e73ULL);
    Clustering out;
    out.centers = seed_plus_plus(X, k, rng);
    out.assignment.assign(X.size(), 0);
    std::vector<double> distances(X.size());

    const auto assign_and_repair = [&] {
        double inertia = assign(X, out.centers, out.assignment, distances);
        for (std::size_t guard = 0; guard <= k; ++guard) {
            const auto sizes = cluster_sizes(out.assignment, k);
            const auto empty = std::find(sizes.begin(), sizes.end(), 0);
            if (empty == sizes.end()) break;
            // Move the empty center onto the worst-fit point of a multi-member cluster.
            std::size_t donor = X.size();
            for (std::size_t i = 0; i < X.size(); ++i) {
                if (sizes[out.assignment[i]] < 2) continue;
                if (donor == X.size() || distances[i] > distances[donor]) donor = i;
            }
            const auto target = out.centers.row(static_cast<std::size_t>(empty - sizes.begin()));
            const auto src = X.row(donor);
            std::copy(src.begin(), src.end(), target.begin());
            inertia = assign(X, out.centers, out.assignment, distances);
        }
        return inertia;
    };

    out.inertia = assign_and_repair();
    out.inertia_trace.push_back(out.inertia);

    const auto& kern = simd::kernels();
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        PointSet updated(k, X.dim());
        const auto sizes = cluster_sizes(out.assignment, k);
        for (std::size_t i = 0; i < X.size(); ++i) {
            auto c = updated.row(out.assignment[i]);
            const auto r = X.row(i);
            for (std::size_t d = 0; d < X.dim(); ++d) c[d] += r[d];
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            auto row = updated.row(c);
            for (auto& v : row) v /= static_cast<double>(sizes[c]);
            shift = std::max(shift, std::sqrt(kern.squared_distance(row.data(), out.centers.row(c).data(), X.dim())));
        }
        out.centers = std::move(updated);
        out.inertia = assign_and_repair();
        out.inertia_trace.push_back(out.inertia);
        out.iterations = iter + 1;
        if (shift < options.shift_tolerance) {
            out.converged = true;
            break;
        }
    }
    return out;
}

std::vector<std::size_t> nearest_to_centers(const Clustering& clustering, const PointSet& X) {
    const auto& kern = simd::kernels();
    const std::size_t k = clustering.k();
    std::vector<std::size_t> best(k, X.size());
    std::vector<double> best_d(k, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < X.size(); ++i) {
        const std::size_t c = clustering.assignment.at(i);
        const double d = kern.squared_distance(X.row(i).data(), clustering.centers.row(c).data(), X.dim());
        if (d < best_d[c]) {
            best_d[c] = d;
            best[c] = i;
        }
    }
    return best;
}

}  // namespace flame::numerics
