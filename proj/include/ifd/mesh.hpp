#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ifd/common.hpp"
#include "ifd/geometry.hpp"
#include "ifd/image.hpp"

namespace ifd {

// One bilinear quad per solid (0.5) pixel on a unit-square frame, h = 1/28.
// Pixel (row r, col c) spans x in [c*h, (c+1)*h], y in [(27-r)*h, (28-r)*h],
// so raster row 27 sits on the fixed boundary y = 0.
struct QuadMesh {
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 4>> elements;           // CCW: BL, BR, TR, TL
    std::vector<std::array<int, 2>> pressure_edges;     // oriented, void on the right
    std::vector<int> fixed_nodes;                       // all at y = 0
    double pixel_size = 1.0 / kImageSide;

    int dof_count() const { return 2 * static_cast<int>(nodes.size()); }
};

inline QuadMesh build_mesh(const LabeledDomain& domain) {
    const double h = 1.0 / kImageSide;
    QuadMesh mesh;
    mesh.pixel_size = h;

    // lattice corner (ix, iy) -> node id; iy counts up from the bottom edge
    std::map<std::pair<int, int>, int> node_id;
    auto node = [&](int ix, int iy) {
        auto [it, inserted] = node_id.try_emplace({ix, iy}, static_cast<int>(mesh.nodes.size()));
        if (inserted) mesh.nodes.push_back({ix * h, iy * h});
        return it->second;
    };

    auto is_void = [&](int r, int c) { return in_frame(r, c) && domain.at(r, c) == 1.0f; };

    for (int r = 0; r < kImageSide; ++r) {
        for (int c = 0; c < kImageSide; ++c) {
            if (domain.at(r, c) != 0.5f) continue;
            const int yb = kImageSide - 1 - r;  // bottom lattice row of this pixel
            const int bl = node(c, yb), br = node(c + 1, yb);
            const int tr = node(c + 1, yb + 1), tl = node(c, yb + 1);
            mesh.elements.push_back({bl, br, tr, tl});

            // edges facing an internal-void pixel carry pressure; orient each
            // so the rotated edge vector (e.y, -e.x) points into the void
            if (is_void(r, c + 1)) mesh.pressure_edges.push_back({br, tr});
            if (is_void(r, c - 1)) mesh.pressure_edges.push_back({tl, bl});
            if (is_void(r - 1, c)) mesh.pressure_edges.push_back({tr, tl});
            if (is_void(r + 1, c)) mesh.pressure_edges.push_back({bl, br});
        }
    }
    require(!mesh.elements.empty(), Errc::no_solid_pixels, "domain has no solid pixels");
    require(!mesh.pressure_edges.empty(), Errc::no_pressure_interface,
            "no solid/void interface to pressurize");

    for (const auto& [key, id] : node_id)
        if (key.second == 0) mesh.fixed_nodes.push_back(id);
    require(!mesh.fixed_nodes.empty(), Errc::no_fixed_nodes, "no solid nodes on the bottom edge");
    return mesh;
}

struct MeshDiagnostics {
    int element_count = 0;
    int fixed_node_count = 0;
    double min_jacobian = 0.0;     // min det J over all 2x2 Gauss points
    bool jacobians_positive = false;
    int pressure_loop_count = 0;   // closed loops traced through the edges
    bool pressure_edges_closed = false;  // every edge lies on a closed loop
    double max_loop_residual = 0.0;      // | sum of edge vectors | per loop
};

namespace detail {

// det of the isoparametric Jacobian of a bilinear quad at (xi, eta)
inline double quad_jacobian_det(const QuadMesh& mesh, const std::array<int, 4>& el, double xi,
                                double eta) {
    // dN/dxi, dN/deta for the 4 corner shape functions
    const double dxi[4] = {-(1 - eta) / 4, (1 - eta) / 4, (1 + eta) / 4, -(1 + eta) / 4};
    const double deta[4] = {-(1 - xi) / 4, -(1 + xi) / 4, (1 + xi) / 4, (1 - xi) / 4};
    double j00 = 0, j01 = 0, j10 = 0, j11 = 0;
    for (int a = 0; a < 4; ++a) {
        const Vec2& p = mesh.nodes[static_cast<size_t>(el[static_cast<size_t>(a)])];
        j00 += dxi[a] * p.x;
        j10 += dxi[a] * p.y;
        j01 += deta[a] * p.x;
        j11 += deta[a] * p.y;
    }
    return j00 * j11 - j01 * j10;
}

}  // namespace detail

inline MeshDiagnostics validate_mesh(const QuadMesh& mesh) {
    MeshDiagnostics d;
    d.element_count = static_cast<int>(mesh.elements.size());
    d.fixed_node_count = static_cast<int>(mesh.fixed_nodes.size());

    const double g = 1.0 / std::sqrt(3.0);
    d.min_jacobian = std::numeric_limits<double>::infinity();
    for (const auto& el : mesh.elements)
        for (double xi : {-g, g})
            for (double eta : {-g, g})
                d.min_jacobian = std::min(d.min_jacobian,
                                          detail::quad_jacobian_det(mesh, el, xi, eta));
    d.jacobians_positive = d.min_jacobian > 0.0;

    // trace directed edge chains; closed when every edge is consumed on a
    // cycle that returns to its starting node
    std::multimap<int, size_t> by_start;
    for (size_t i = 0; i < mesh.pressure_edges.size(); ++i)
        by_start.emplace(mesh.pressure_edges[i][0], i);
    std::vector<bool> used(mesh.pressure_edges.size(), false);
    bool all_closed = true;
    for (size_t i = 0; i < mesh.pressure_edges.size(); ++i) {
        if (used[i]) continue;
        const int start = mesh.pressure_edges[i][0];
        int cur = start;
        double sx = 0.0, sy = 0.0;
        bool closed = false;
        size_t edge = i;
        while (true) {
            used[edge] = true;
            const auto& e = mesh.pressure_edges[edge];
            const Vec2 v = mesh.nodes[static_cast<size_t>(e[1])] -
                           mesh.nodes[static_cast<size_t>(e[0])];
            sx += v.x;
            sy += v.y;
            cur = e[1];
            if (cur == start) {
                closed = true;
                break;
            }
            auto [lo, hi] = by_start.equal_range(cur);
            size_t next = mesh.pressure_edges.size();
            for (auto it = lo; it != hi; ++it)
                if (!used[it->second]) {
                    next = it->second;
                    break;
                }
            if (next == mesh.pressure_edges.size()) break;  // dead end
            edge = next;
        }
        if (closed) {
            ++d.pressure_loop_count;
            d.max_loop_residual = std::max(d.max_loop_residual, std::hypot(sx, sy));
        } else {
            all_closed = false;
        }
    }
    d.pressure_edges_closed = all_closed && !mesh.pressure_edges.empty();
    return d;
}

namespace detail {

inline std::string fmt_double(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

}  // namespace detail

// Plain-text export for debugging and cross-validation with external tools.
inline void write_mesh(const QuadMesh& mesh, const std::string& path) {
    std::ofstream f(path);
    require(f.good(), Errc::io_error, "cannot open for write: " + path);
    f << "NODES " << mesh.nodes.size() << "\n";
    for (size_t i = 0; i < mesh.nodes.size(); ++i)
        f << i << " " << detail::fmt_double(mesh.nodes[i].x) << " "
          << detail::fmt_double(mesh.nodes[i].y) << "\n";
    f << "ELEMS " << mesh.elements.size() << "\n";
    for (size_t i = 0; i < mesh.elements.size(); ++i) {
        const auto& e = mesh.elements[i];
        f << i << " " << e[0] << " " << e[1] << " " << e[2] << " " << e[3] << "\n";
    }
    f << "PRESSURE " << mesh.pressure_edges.size() << "\n";
    for (const auto& e : mesh.pressure_edges) f << e[0] << " " << e[1] << "\n";
    f << "FIXED " << mesh.fixed_nodes.size() << "\n";
    for (int n : mesh.fixed_nodes) f << n << "\n";
    require(f.good(), Errc::io_error, "write failed: " + path);
}

}  // namespace ifd
