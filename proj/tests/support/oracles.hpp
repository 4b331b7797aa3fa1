#pragma once

// Test-only oracles, deliberately independent of the library's
// implementations: brute-force geometry, exhaustive flood fills, numerical
// quadrature and finite differences. Slow and simple on purpose.

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

#include "ifd/geometry.hpp"
#include "ifd/image.hpp"
#include "ifd/rng.hpp"
#include "ifd/schedule.hpp"

namespace oracle {

// O(n^3) hull: a directed edge (i, j) is on the hull iff every other point
// lies strictly left of it (or on the segment). Returns hull vertex set.
inline std::set<std::pair<double, double>> brute_force_hull_vertices(
    const std::vector<ifd::Vec2>& pts) {
    std::set<std::pair<double, double>> verts;
    const size_t n = pts.size();
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            bool edge = true;
            bool strict = false;
            for (size_t k = 0; k < n && edge; ++k) {
                if (k == i || k == j) continue;
                const double cr = (pts[j].x - pts[i].x) * (pts[k].y - pts[i].y) -
                                  (pts[j].y - pts[i].y) * (pts[k].x - pts[i].x);
                if (cr < 0.0) edge = false;
                if (cr > 0.0) strict = true;
            }
            if (edge && strict) {
                verts.insert({pts[i].x, pts[i].y});
                verts.insert({pts[j].x, pts[j].y});
            }
        }
    }
    return verts;
}

// Monte Carlo polygon area by rejection sampling over the bounding box.
// Returns (estimate, standard error).
inline std::pair<double, double> mc_polygon_area(const std::vector<ifd::Vec2>& poly,
                                                 std::uint64_t seed, int n_samples) {
    double x_lo = poly[0].x, x_hi = poly[0].x, y_lo = poly[0].y, y_hi = poly[0].y;
    for (const auto& p : poly) {
        x_lo = std::min(x_lo, p.x);
        x_hi = std::max(x_hi, p.x);
        y_lo = std::min(y_lo, p.y);
        y_hi = std::max(y_hi, p.y);
    }
    const double box = (x_hi - x_lo) * (y_hi - y_lo);
    ifd::Rng rng(seed);
    int hits = 0;
    for (int s = 0; s < n_samples; ++s) {
        const ifd::Vec2 p{rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi)};
        if (ifd::point_in_convex(poly, p, 0.0)) ++hits;
    }
    const double frac = static_cast<double>(hits) / n_samples;
    const double est = frac * box;
    const double se = box * std::sqrt(frac * (1.0 - frac) / n_samples);
    return {est, se};
}

// exhaustive 8-connected components by repeated scanning
inline std::vector<std::vector<int>> flood_components(const ifd::BinaryMask& mask) {
    std::vector<int> label(ifd::kImagePixels, -1);
    std::vector<std::vector<int>> comps;
    for (int start = 0; start < ifd::kImagePixels; ++start) {
        if (!mask.px[static_cast<size_t>(start)] || label[static_cast<size_t>(start)] >= 0)
            continue;
        std::vector<int> comp{start};
        label[static_cast<size_t>(start)] = static_cast<int>(comps.size());
        for (size_t q = 0; q < comp.size(); ++q) {
            const int r = comp[q] / ifd::kImageSide, c = comp[q] % ifd::kImageSide;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    const int rr = r + dr, cc = c + dc;
                    if ((dr == 0 && dc == 0) || !ifd::in_frame(rr, cc)) continue;
                    const int p = rr * ifd::kImageSide + cc;
                    if (mask.px[static_cast<size_t>(p)] && label[static_cast<size_t>(p)] < 0) {
                        label[static_cast<size_t>(p)] = static_cast<int>(comps.size());
                        comp.push_back(p);
                    }
                }
        }
        comps.push_back(std::move(comp));
    }
    return comps;
}

// hole filling oracle: 4-connected flood from the border over background
inline ifd::BinaryMask fill_holes_oracle(const ifd::BinaryMask& mask) {
    std::vector<bool> outside(ifd::kImagePixels, false);
    std::vector<int> queue;
    for (int i = 0; i < ifd::kImageSide; ++i) {
        for (int p : {i, (ifd::kImageSide - 1) * ifd::kImageSide + i, i * ifd::kImageSide,
                      i * ifd::kImageSide + ifd::kImageSide - 1}) {
            if (!mask.px[static_cast<size_t>(p)] && !outside[static_cast<size_t>(p)]) {
                outside[static_cast<size_t>(p)] = true;
                queue.push_back(p);
            }
        }
    }
    for (size_t q = 0; q < queue.size(); ++q) {
        const int r = queue[q] / ifd::kImageSide, c = queue[q] % ifd::kImageSide;
        constexpr int d4[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
        for (const auto& d : d4) {
            const int rr = r + d[0], cc = c + d[1];
            if (!ifd::in_frame(rr, cc)) continue;
            const int p = rr * ifd::kImageSide + cc;
            if (!mask.px[static_cast<size_t>(p)] && !outside[static_cast<size_t>(p)]) {
                outside[static_cast<size_t>(p)] = true;
                queue.push_back(p);
            }
        }
    }
    ifd::BinaryMask out;
    for (int i = 0; i < ifd::kImagePixels; ++i)
        out.px[static_cast<size_t>(i)] =
            mask.px[static_cast<size_t>(i)] || !outside[static_cast<size_t>(i)];
    return out;
}

// posterior mean of x_{t-1} given (x0, xt) by 1-D Simpson quadrature over
// q(xt | x_{t-1}) q(x_{t-1} | x0); independent of the closed-form coefficients
inline double bayes_posterior_mean_quadrature(double x0, double xt, int t,
                                              const ifd::NoiseSchedule& sched, int n_panels) {
    const double ab_prev = sched.alpha_bar[static_cast<size_t>(t - 1)];
    const double a_t = sched.alpha[static_cast<size_t>(t)];
    const double b_t = sched.beta[static_cast<size_t>(t)];
    // q(x_{t-1} | x0) = N(sqrt(ab_prev) x0, 1 - ab_prev)
    // q(xt | x_{t-1}) = N(sqrt(a_t) x_{t-1}, b_t)
    const double mu_prior = std::sqrt(ab_prev) * x0;
    const double var_prior = 1.0 - ab_prev;
    auto log_w = [&](double x) {
        double lw = -0.5 * (xt - std::sqrt(a_t) * x) * (xt - std::sqrt(a_t) * x) / b_t;
        if (var_prior > 0.0)
            lw += -0.5 * (x - mu_prior) * (x - mu_prior) / var_prior;
        return lw;
    };
    if (var_prior == 0.0) return mu_prior;  // t = 1 with alpha_bar_0 = 1

    // integration window: generous cover of both factors
    const double s1 = std::sqrt(var_prior);
    const double s2 = std::sqrt(b_t / a_t);
    const double center = 0.5 * (mu_prior + xt / std::sqrt(a_t));
    const double span = 12.0 * (s1 + s2) + std::abs(mu_prior - xt / std::sqrt(a_t));
    const double lo = center - span, hi = center + span;
    const double h = (hi - lo) / (2 * n_panels);

    // log-sum-exp safe Simpson accumulation
    double max_lw = -1e300;
    for (int i = 0; i <= 2 * n_panels; ++i) max_lw = std::max(max_lw, log_w(lo + i * h));
    double num = 0.0, den = 0.0;
    for (int i = 0; i <= 2 * n_panels; ++i) {
        const double x = lo + i * h;
        const double coef = (i == 0 || i == 2 * n_panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        const double w = coef * std::exp(log_w(x) - max_lw);
        num += w * x;
        den += w;
    }
    return num / den;
}

// central finite difference of a scalar function
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracle
