#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "ifd/common.hpp"
#include "ifd/experiments.hpp"
#include "ifd/geometry.hpp"

namespace ifd {

// Report bundle writers: per-sample CSV, aggregate CSV, SVG histogram, SVG
// density map, and a plain-text summary with the seeds needed to reproduce.

inline void write_descriptor_csv_header(std::ofstream& f) {
    f << "id,h,w,A";
    for (int i = 0; i < kMedialAxisPoints; ++i) f << ",m" << i << "x,m" << i << "y";
    f << "\n";
}

inline void write_descriptor_csv_row(std::ofstream& f, int id, const DescriptorSet& d) {
    f << id << "," << d.height << "," << d.width << "," << d.hull_area;
    for (const auto& p : d.medial_axis) f << "," << p.x << "," << p.y;
    f << "\n";
}

inline void write_samples_csv(const VerificationResult& result, const std::string& path) {
    std::ofstream f(path);
    require(f.good(), Errc::io_error, "cannot open for write: " + path);
    f << std::setprecision(17);
    f << "id,ok,stage,h,w,A";
    for (int i = 0; i < kMedialAxisPoints; ++i) f << ",m" << i << "x,m" << i << "y";
    f << "\n";
    for (const auto& s : result.samples) {
        f << s.index << "," << (s.ok ? 1 : 0) << "," << failure_stage_name(s.stage);
        if (s.ok && s.achieved) {
            const auto& d = *s.achieved;
            f << "," << d.height << "," << d.width << "," << d.hull_area;
            for (const auto& p : d.medial_axis) f << "," << p.x << "," << p.y;
        }
        f << "\n";
    }
}

inline void write_aggregates_csv(const VerificationResult& result, const std::string& path) {
    std::ofstream f(path);
    require(f.good(), Errc::io_error, "cannot open for write: " + path);
    f << std::setprecision(17);
    const auto& a = result.aggregates;
    f << "n_total,n_success,fail_empty_component,fail_meshing,fail_newton,fail_descriptor\n";
    f << a.n_total << "," << a.n_success << "," << a.failures_by_stage[1] << ","
      << a.failures_by_stage[2] << "," << a.failures_by_stage[3] << ","
      << a.failures_by_stage[4] << "\n";
    f << "component,mean,median,stddev\n";
    for (size_t i = 0; i < a.mean.size(); ++i)
        f << i << "," << a.mean[i] << "," << a.median[i] << "," << a.stddev[i] << "\n";
}

// Single-series histogram as a standalone SVG.
inline void write_histogram_svg(const std::vector<int>& bins, double lo, double hi,
                                const std::string& title, double marker,
                                const std::string& path) {
    const int W = 480, H = 320, mL = 50, mB = 40, mT = 30, mR = 15;
    const int plot_w = W - mL - mR, plot_h = H - mT - mB;
    int peak = 1;
    for (int b : bins) peak = std::max(peak, b);

    std::ofstream f(path);
    require(f.good(), Errc::io_error, "cannot open for write: " + path);
    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    f << "<rect width='100%' height='100%' fill='white'/>\n";
    f << "<text x='" << W / 2 << "' y='18' text-anchor='middle' font-size='13'>" << title
      << "</text>\n";
    const double bw = static_cast<double>(plot_w) / static_cast<double>(bins.size());
    for (size_t i = 0; i < bins.size(); ++i) {
        const double bh = static_cast<double>(bins[i]) / peak * plot_h;
        f << "<rect x='" << mL + i * bw << "' y='" << mT + plot_h - bh << "' width='"
          << bw * 0.9 << "' height='" << bh << "' fill='#4878a8'/>\n";
    }
    if (marker > lo && marker < hi) {
        const double mx = mL + (marker - lo) / (hi - lo) * plot_w;
        f << "<line x1='" << mx << "' y1='" << mT << "' x2='" << mx << "' y2='" << mT + plot_h
          << "' stroke='#c03030' stroke-width='2' stroke-dasharray='4,3'/>\n";
    }
    f << "<line x1='" << mL << "' y1='" << mT + plot_h << "' x2='" << mL + plot_w << "' y2='"
      << mT + plot_h << "' stroke='black'/>\n";
    f << "<text x='" << mL << "' y='" << H - 12 << "' font-size='11'>" << lo << "</text>\n";
    f << "<text x='" << mL + plot_w << "' y='" << H - 12
      << "' text-anchor='end' font-size='11'>" << hi << "</text>\n";
    f << "</svg>\n";
}

// Density map: grid cells shaded dark where the density is high.
inline void write_density_svg(const DensityGrid& grid, const std::string& title,
                              const std::vector<Vec2>* target_axis, const std::string& path) {
    const int cell = 6;
    const int W = grid.nx * cell + 60, H = grid.ny * cell + 50;
    std::ofstream f(path);
    require(f.good(), Errc::io_error, "cannot open for write: " + path);
    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    f << "<rect width='100%' height='100%' fill='white'/>\n";
    f << "<text x='" << W / 2 << "' y='16' text-anchor='middle' font-size='13'>" << title
      << "</text>\n";
    const int ox = 40, oy = 26;
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            const double v = grid.at(ix, iy);
            if (v <= 0.0) continue;
            const int shade = static_cast<int>(255.0 * (1.0 - v));
            // y axis points up: flip rows
            f << "<rect x='" << ox + ix * cell << "' y='" << oy + (grid.ny - 1 - iy) * cell
              << "' width='" << cell << "' height='" << cell << "' fill='rgb(" << shade << ","
              << shade << "," << shade << ")'/>\n";
        }
    }
    if (target_axis) {
        f << "<polyline fill='none' stroke='#c03030' stroke-width='1.5' points='";
        for (const auto& p : *target_axis) {
            const double fx = (p.x - grid.x_lo) / (grid.x_hi - grid.x_lo) * (grid.nx - 1);
            const double fy = (p.y - grid.y_lo) / (grid.y_hi - grid.y_lo) * (grid.ny - 1);
            f << ox + fx * cell + cell / 2.0 << "," << oy + (grid.ny - 1 - fy) * cell + cell / 2.0
              << " ";
        }
        f << "'/>\n";
    }
    f << "<rect x='" << ox << "' y='" << oy << "' width='" << grid.nx * cell << "' height='"
      << grid.ny * cell << "' fill='none' stroke='black'/>\n";
    f << "</svg>\n";
}

}  // namespace ifd
