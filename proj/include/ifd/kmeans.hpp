#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <vector>

#include "ifd/common.hpp"
#include "ifd/rng.hpp"

namespace ifd {

struct KMeansResult {
    std::vector<std::vector<double>> centroids;  // k x d
    std::vector<int> assignments;                // per input point
    double wcss = 0.0;                           // within-cluster sum of squares
    int iterations = 0;
};

namespace detail {

inline double sqdist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace detail

// Lloyd's algorithm with k-means++ seeding. Converges when assignments stop
// changing or after max_iters sweeps; empty clusters are reseeded to the
// point farthest from its centroid.
inline KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                           std::uint64_t seed, int max_iters = 300) {
    require(!points.empty(), Errc::degenerate_data, "no points to cluster");
    const size_t d = points.front().size();
    for (const auto& p : points)
        require(p.size() == d, Errc::dimension_mismatch, "ragged point set");
    std::set<std::vector<double>> distinct(points.begin(), points.end());
    require(static_cast<int>(distinct.size()) >= k, Errc::degenerate_data,
            "fewer distinct points than clusters");

    Rng rng(seed);
    KMeansResult res;
    res.centroids.reserve(static_cast<size_t>(k));

    // k-means++ seeding
    res.centroids.push_back(points[rng.uniform_index(points.size())]);
    std::vector<double> dist2(points.size());
    while (static_cast<int>(res.centroids.size()) < k) {
        double total = 0.0;
        for (size_t i = 0; i < points.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : res.centroids)
                best = std::min(best, detail::sqdist(points[i], c));
            dist2[i] = best;
            total += best;
        }
        size_t pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (size_t i = 0; i < points.size(); ++i) {
                acc += dist2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.uniform_index(points.size());
        }
        res.centroids.push_back(points[pick]);
    }

    res.assignments.assign(points.size(), -1);
    for (int it = 0; it < max_iters; ++it) {
        res.iterations = it + 1;
        bool changed = false;
        for (size_t i = 0; i < points.size(); ++i) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double dd = detail::sqdist(points[i], res.centroids[static_cast<size_t>(c)]);
                if (dd < bd) {
                    bd = dd;
                    best = c;
                }
            }
            if (res.assignments[i] != best) {
                res.assignments[i] = best;
                changed = true;
            }
        }
        if (!changed && it > 0) break;

        std::vector<std::vector<double>> sums(static_cast<size_t>(k),
                                              std::vector<double>(d, 0.0));
        std::vector<int> counts(static_cast<size_t>(k), 0);
        for (size_t i = 0; i < points.size(); ++i) {
            const auto c = static_cast<size_t>(res.assignments[i]);
            ++counts[c];
            for (size_t j = 0; j < d; ++j) sums[c][j] += points[i][j];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] == 0) {
                // reseed an empty cluster to the farthest point
                size_t far = 0;
                double fd = -1.0;
                for (size_t i = 0; i < points.size(); ++i) {
                    const double dd = detail::sqdist(
                        points[i],
                        res.centroids[static_cast<size_t>(res.assignments[i])]);
                    if (dd > fd) {
                        fd = dd;
                        far = i;
                    }
                }
                res.centroids[static_cast<size_t>(c)] = points[far];
                changed = true;
                continue;
            }
            for (size_t j = 0; j < d; ++j)
                res.centroids[static_cast<size_t>(c)][j] =
                    sums[static_cast<size_t>(c)][j] / counts[static_cast<size_t>(c)];
        }
        if (!changed) break;
    }

    res.wcss = 0.0;
    for (size_t i = 0; i < points.size(); ++i)
        res.wcss += detail::sqdist(points[i],
                                   res.centroids[static_cast<size_t>(res.assignments[i])]);
    return res;
}

}  // namespace ifd
