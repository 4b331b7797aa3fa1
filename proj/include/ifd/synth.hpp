#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "ifd/image.hpp"
#include "ifd/rng.hpp"

namespace ifd {

// Deterministic generator of seven-like two-stroke glyphs: a horizontal top
// bar joined to a slanted descender. Stands in for handwritten-digit input
// when no IDX files are available (desk-scale runs, smoke tests); the
// resulting bases exercise the identical preprocessing/meshing/simulation
// path as real data.
inline StructuralBasis synth_seven(Rng& rng) {
    StructuralBasis img;

    const double bar_y = rng.uniform(5.0, 9.0);
    const double bar_x0 = rng.uniform(5.0, 8.5);
    const double bar_x1 = rng.uniform(18.0, 22.5);
    const double bar_thick = rng.uniform(1.1, 1.9);

    const double tip_x = bar_x1 - rng.uniform(0.0, 2.0);
    const double base_x = rng.uniform(8.0, 13.0);
    const double base_y = rng.uniform(21.0, 24.5);
    const double leg_thick = rng.uniform(1.1, 1.9);

    auto stamp_segment = [&](double x0, double y0, double x1, double y1, double thick) {
        const double len = std::hypot(x1 - x0, y1 - y0);
        const int steps = std::max(2, static_cast<int>(len * 3));
        for (int s = 0; s <= steps; ++s) {
            const double u = static_cast<double>(s) / steps;
            const double cx = x0 + u * (x1 - x0);
            const double cy = y0 + u * (y1 - y0);
            const int rlo = std::max(0, static_cast<int>(std::floor(cy - thick - 1)));
            const int rhi = std::min(kImageSide - 1, static_cast<int>(std::ceil(cy + thick + 1)));
            const int clo = std::max(0, static_cast<int>(std::floor(cx - thick - 1)));
            const int chi = std::min(kImageSide - 1, static_cast<int>(std::ceil(cx + thick + 1)));
            for (int r = rlo; r <= rhi; ++r)
                for (int c = clo; c <= chi; ++c) {
                    const double dd = std::hypot(c - cx, r - cy);
                    const float v = static_cast<float>(std::clamp(thick + 0.5 - dd, 0.0, 1.0));
                    img.at(r, c) = std::max(img.at(r, c), v);
                }
        }
    };

    stamp_segment(bar_x0, bar_y, bar_x1, bar_y, bar_thick);
    stamp_segment(tip_x, bar_y, base_x, base_y, leg_thick);
    return img;
}

}  // namespace ifd
