#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ifd/common.hpp"

namespace ifd {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
};

inline constexpr int kMedialAxisPoints = 30;

// The conditioning vector y: four scalar summaries plus a 30-point medial
// axis, all computed from the deformed configuration.
struct DescriptorSet {
    double height = 0.0;
    double width = 0.0;
    double bbox_h = 0.0;  // always == height
    double bbox_w = 0.0;  // always == width
    double hull_area = 0.0;
    std::vector<Vec2> medial_axis;  // exactly 30 points, increasing y, first at origin

    bool operator==(const DescriptorSet& o) const {
        return height == o.height && width == o.width && bbox_h == o.bbox_h &&
               bbox_w == o.bbox_w && hull_area == o.hull_area && medial_axis == o.medial_axis;
    }

    bool finite() const {
        bool ok = std::isfinite(height) && std::isfinite(width) && std::isfinite(hull_area);
        for (const auto& p : medial_axis) ok = ok && std::isfinite(p.x) && std::isfinite(p.y);
        return ok;
    }
};

enum class DescriptorKind { height, width, bbox, area, medial };

inline const char* descriptor_kind_name(DescriptorKind k) {
    switch (k) {
        case DescriptorKind::height: return "height";
        case DescriptorKind::width: return "width";
        case DescriptorKind::bbox: return "bbox";
        case DescriptorKind::area: return "area";
        case DescriptorKind::medial: return "medial";
    }
    return "?";
}

inline DescriptorKind descriptor_kind_from_name(const std::string& s) {
    if (s == "height") return DescriptorKind::height;
    if (s == "width") return DescriptorKind::width;
    if (s == "bbox") return DescriptorKind::bbox;
    if (s == "area") return DescriptorKind::area;
    if (s == "medial") return DescriptorKind::medial;
    fail(Errc::kind_mismatch, "unknown descriptor kind: " + s);
}

inline int descriptor_dim(DescriptorKind k) {
    switch (k) {
        case DescriptorKind::height:
        case DescriptorKind::width:
        case DescriptorKind::area: return 1;
        case DescriptorKind::bbox: return 2;
        case DescriptorKind::medial: return 2 * kMedialAxisPoints;
    }
    return 0;
}

// Flatten the selected descriptor into the model-facing vector.
inline std::vector<double> descriptor_vector(const DescriptorSet& d, DescriptorKind k) {
    switch (k) {
        case DescriptorKind::height: return {d.height};
        case DescriptorKind::width: return {d.width};
        case DescriptorKind::area: return {d.hull_area};
        case DescriptorKind::bbox: return {d.bbox_h, d.bbox_w};
        case DescriptorKind::medial: {
            std::vector<double> v;
            v.reserve(2 * d.medial_axis.size());
            for (const auto& p : d.medial_axis) {
                v.push_back(p.x);
                v.push_back(p.y);
            }
            return v;
        }
    }
    return {};
}

inline double cloud_height(const std::vector<Vec2>& cloud) {
    require(!cloud.empty(), Errc::empty_cloud, "height of empty cloud");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : cloud) {
        lo = std::min(lo, p.y);
        hi = std::max(hi, p.y);
    }
    return hi - lo;
}

inline double cloud_width(const std::vector<Vec2>& cloud) {
    require(!cloud.empty(), Errc::empty_cloud, "width of empty cloud");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : cloud) {
        lo = std::min(lo, p.x);
        hi = std::max(hi, p.x);
    }
    return hi - lo;
}

namespace detail {

// Orientation predicate with an adaptive tolerance: exact sign for clean
// cases, treats near-collinear triples (relative to coordinate magnitude)
// as collinear so the hull drops interior collinear vertices.
inline int orient(Vec2 o, Vec2 a, Vec2 b) {
    const double v = (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    const double scale = std::max({std::abs(a.x - o.x), std::abs(a.y - o.y),
                                   std::abs(b.x - o.x), std::abs(b.y - o.y), 1.0});
    const double tol = 1e-15 * scale * scale;
    if (v > tol) return 1;
    if (v < -tol) return -1;
    return 0;
}

}  // namespace detail

// Monotone chain. Returns the minimal CCW convex polygon; collinear interior
// vertices removed. Throws DegenerateCloud when all points are collinear.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
    require(pts.size() >= 3, Errc::degenerate_cloud, "hull needs at least 3 points");
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    const size_t n = pts.size();
    require(n >= 3, Errc::degenerate_cloud, "hull needs at least 3 distinct points");

    std::vector<Vec2> hull(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {  // lower
        while (k >= 2 && detail::orient(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (size_t i = n - 1, lower = k + 1; i-- > 0;) {  // upper
        while (k >= lower && detail::orient(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    require(hull.size() >= 3, Errc::degenerate_cloud, "all points collinear");
    return hull;
}

// Shoelace area of a CCW polygon.
inline double polygon_area(const std::vector<Vec2>& poly) {
    double two_a = 0.0;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        two_a += p.x * q.y - p.y * q.x;
    }
    return 0.5 * two_a;
}

inline bool point_in_convex(const std::vector<Vec2>& poly, Vec2 p, double tol = 1e-9) {
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        const double cr = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        if (cr < -tol) return false;
    }
    return true;
}

// Midpoints of horizontal chords of a convex polygon at half-offset height
// increments, bottom to top, translated so the first point sits at the
// origin. The half offset keeps every sampling line strictly inside the
// polygon's vertical extent, so each line cuts a genuine chord.
inline std::vector<Vec2> medial_axis(const std::vector<Vec2>& poly, int n = kMedialAxisPoints) {
    require(poly.size() >= 3, Errc::degenerate_polygon, "medial axis needs a polygon");
    require(n >= 2, Errc::degenerate_polygon, "medial axis needs n >= 2");

    double y_min = std::numeric_limits<double>::infinity(), y_max = -y_min;
    for (const auto& p : poly) {
        y_min = std::min(y_min, p.y);
        y_max = std::max(y_max, p.y);
    }
    const double h = y_max - y_min;
    require(h > 0.0, Errc::degenerate_polygon, "polygon has zero height");

    std::vector<Vec2> raw;
    raw.reserve(static_cast<size_t>(n));
    const size_t m = poly.size();
    for (int i = 0; i < n; ++i) {
        const double y = y_min + (static_cast<double>(i) + 0.5) * h / static_cast<double>(n);
        double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
        int hits = 0;
        for (size_t e = 0; e < m; ++e) {
            const Vec2& a = poly[e];
            const Vec2& b = poly[(e + 1) % m];
            if (a.y == b.y) {
                if (a.y == y) {  // horizontal edge exactly on the line
                    x_lo = std::min({x_lo, a.x, b.x});
                    x_hi = std::max({x_hi, a.x, b.x});
                    hits += 2;
                }
                continue;
            }
            // half-open rule so a shared vertex counts once
            if ((a.y <= y && b.y > y) || (b.y <= y && a.y > y)) {
                const double t = (y - a.y) / (b.y - a.y);
                const double x = a.x + t * (b.x - a.x);
                x_lo = std::min(x_lo, x);
                x_hi = std::max(x_hi, x);
                ++hits;
            }
        }
        require(hits >= 2, Errc::chord_failure,
                "chord at y=" + std::to_string(y) + " hit " + std::to_string(hits) + " edges");
        raw.push_back({0.5 * (x_lo + x_hi), y});
    }

    // containment check on the raw midpoints, then origin alignment
    for (const auto& p : raw)
        require(point_in_convex(poly, p, 1e-9), Errc::chord_failure,
                "midpoint escaped the hull");

    const Vec2 origin = raw.front();
    std::vector<Vec2> out;
    out.reserve(raw.size());
    for (const auto& p : raw) out.push_back(p - origin);
    return out;
}

inline DescriptorSet descriptors_from_cloud(const std::vector<Vec2>& cloud) {
    DescriptorSet d;
    d.height = cloud_height(cloud);
    d.width = cloud_width(cloud);
    require(d.height > 0.0 && d.width > 0.0, Errc::degenerate_cloud,
            "deformed cloud has zero extent");
    d.bbox_h = d.height;
    d.bbox_w = d.width;
    const auto hull = convex_hull(cloud);
    d.hull_area = polygon_area(hull);
    require(d.hull_area > 0.0, Errc::degenerate_cloud, "hull area not positive");
    d.medial_axis = medial_axis(hull, kMedialAxisPoints);
    return d;
}

}  // namespace ifd
