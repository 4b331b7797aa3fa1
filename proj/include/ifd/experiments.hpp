#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "ifd/common.hpp"
#include "ifd/diffusion.hpp"
#include "ifd/fem.hpp"
#include "ifd/geometry.hpp"
#include "ifd/image_ops.hpp"
#include "ifd/mesh.hpp"
#include "ifd/trainer.hpp"

namespace ifd {

struct TargetSpec {
    DescriptorKind kind = DescriptorKind::height;
    std::vector<double> values;  // 1, 2, or 60 components
    std::string provenance = "manual";  // "centroid" or "manual"

    void validate() const {
        require(static_cast<int>(values.size()) == descriptor_dim(kind), Errc::kind_mismatch,
                "target has " + std::to_string(values.size()) + " components, kind needs " +
                    std::to_string(descriptor_dim(kind)));
    }
};

enum class FailureStage { none, empty_component, meshing, newton_diverged, descriptor_degenerate };

inline const char* failure_stage_name(FailureStage s) {
    switch (s) {
        case FailureStage::none: return "ok";
        case FailureStage::empty_component: return "empty-component";
        case FailureStage::meshing: return "meshing";
        case FailureStage::newton_diverged: return "newton-diverged";
        case FailureStage::descriptor_degenerate: return "descriptor-degenerate";
    }
    return "?";
}

struct SampleVerification {
    int index = 0;
    StructuralBasis basis;
    bool ok = false;
    FailureStage stage = FailureStage::none;
    std::string reason;
    std::optional<DescriptorSet> achieved;
};

struct Aggregates {
    int n_total = 0;
    int n_success = 0;
    std::vector<double> mean, median, stddev;  // per descriptor component
    std::vector<int> histogram;                // first component only
    double hist_lo = 0.0, hist_hi = 0.0;
    std::vector<int> failures_by_stage;        // indexed by FailureStage
};

struct VerificationResult {
    TargetSpec target;
    std::vector<SampleVerification> samples;
    Aggregates aggregates;
};

// preprocess -> mesh -> inflate -> extract, classifying any failure by the
// stage it came from; never throws for bad inputs
inline SampleVerification verify_one(const StructuralBasis& basis, int index,
                                     const Material& mat = {}, const LoadSchedule& sched = {},
                                     const SolverConfig& cfg = {}) {
    SampleVerification out;
    out.index = index;
    out.basis = basis;
    FailureStage stage = FailureStage::empty_component;
    try {
        const LabeledDomain domain = preprocess(basis);
        stage = FailureStage::meshing;
        const QuadMesh mesh = build_mesh(domain);
        stage = FailureStage::newton_diverged;
        const DeformedState state = simulate(mesh, mat, sched, cfg);
        stage = FailureStage::descriptor_degenerate;
        out.achieved = descriptors_from_cloud(deformed_cloud(mesh, state));
        out.ok = true;
        out.stage = FailureStage::none;
    } catch (const Error& e) {
        out.ok = false;
        out.stage = stage;
        out.reason = e.what();
    }
    return out;
}

inline void compute_aggregates(VerificationResult& result, int hist_bins = 16) {
    Aggregates agg;
    agg.n_total = static_cast<int>(result.samples.size());
    agg.failures_by_stage.assign(5, 0);
    std::vector<std::vector<double>> achieved;
    for (const auto& s : result.samples) {
        if (s.ok && s.achieved) {
            achieved.push_back(descriptor_vector(*s.achieved, result.target.kind));
        } else {
            ++agg.failures_by_stage[static_cast<size_t>(s.stage)];
        }
    }
    agg.n_success = static_cast<int>(achieved.size());
    if (agg.n_success > 0) {
        const size_t dim = achieved.front().size();
        agg.mean.assign(dim, 0.0);
        agg.stddev.assign(dim, 0.0);
        agg.median.assign(dim, 0.0);
        for (const auto& a : achieved)
            for (size_t i = 0; i < dim; ++i) agg.mean[i] += a[i] / agg.n_success;
        for (const auto& a : achieved)
            for (size_t i = 0; i < dim; ++i) {
                const double d = a[i] - agg.mean[i];
                agg.stddev[i] += d * d;
            }
        for (size_t i = 0; i < dim; ++i)
            agg.stddev[i] = agg.n_success > 1
                                ? std::sqrt(agg.stddev[i] / (agg.n_success - 1))
                                : 0.0;
        for (size_t i = 0; i < dim; ++i) {
            std::vector<double> col;
            col.reserve(achieved.size());
            for (const auto& a : achieved) col.push_back(a[i]);
            std::sort(col.begin(), col.end());
            const size_t n = col.size();
            agg.median[i] = (n % 2 == 1) ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
        }
        // histogram over the first component
        std::vector<double> first;
        for (const auto& a : achieved) first.push_back(a[0]);
        agg.hist_lo = *std::min_element(first.begin(), first.end());
        agg.hist_hi = *std::max_element(first.begin(), first.end());
        if (agg.hist_hi <= agg.hist_lo) agg.hist_hi = agg.hist_lo + 1e-9;
        agg.histogram.assign(static_cast<size_t>(hist_bins), 0);
        for (double v : first) {
            int bin = static_cast<int>((v - agg.hist_lo) / (agg.hist_hi - agg.hist_lo) *
                                       hist_bins);
            bin = std::clamp(bin, 0, hist_bins - 1);
            ++agg.histogram[static_cast<size_t>(bin)];
        }
    }
    result.aggregates = std::move(agg);
}

// Parallel verification with deterministic result order (indexed slots).
inline VerificationResult verify_batch(const std::vector<StructuralBasis>& bases,
                                       const TargetSpec& target, int jobs = 1,
                                       const Material& mat = {}, const LoadSchedule& sched = {},
                                       const SolverConfig& cfg = {}) {
    VerificationResult result;
    result.target = target;
    result.samples.resize(bases.size());
    if (jobs <= 1) {
        for (size_t i = 0; i < bases.size(); ++i)
            result.samples[i] = verify_one(bases[i], static_cast<int>(i), mat, sched, cfg);
    } else {
        std::atomic<size_t> next{0};
        auto worker = [&] {
            while (true) {
                const size_t i = next.fetch_add(1);
                if (i >= bases.size()) return;
                result.samples[i] = verify_one(bases[i], static_cast<int>(i), mat, sched, cfg);
            }
        };
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    compute_aggregates(result);
    return result;
}

// Conditional generation: normalize the target with the checkpoint stats,
// run n guided trajectories, map outputs back to [0,1] images.
inline std::vector<StructuralBasis> generate_batch(DiffusionModel& model,
                                                   const TargetSpec& target, int n,
                                                   std::uint64_t seed,
                                                   const GuidanceConfig& guidance = {},
                                                   SampleTrace* trace = nullptr) {
    target.validate();
    require(target.kind == model.kind, Errc::kind_mismatch,
            std::string("checkpoint is for ") + descriptor_kind_name(model.kind) +
                ", target is " + descriptor_kind_name(target.kind));
    if (n == 0) return {};
    const std::vector<double> y_norm = model.norms.scale(target.values);
    const EpsModel eps_model = model.sampler_for(y_norm);
    const Tensor<float> x0 = sample(eps_model, n, model.schedule, guidance, seed, trace);
    std::vector<StructuralBasis> out(static_cast<size_t>(n));
    for (int b = 0; b < n; ++b) {
        const float* xb = x0.sample(b);
        for (int i = 0; i < kImagePixels; ++i)
            out[static_cast<size_t>(b)].px[static_cast<size_t>(i)] =
                0.5f * (xb[i] + 1.0f);
    }
    return out;
}

// Normalized 2D occupancy of medial-axis points over a fixed window,
// bilinear splatting, peak scaled to 1.
struct DensityGrid {
    int nx = 64, ny = 64;
    double x_lo = -0.6, x_hi = 0.6;
    double y_lo = 0.0, y_hi = 1.3;
    std::vector<double> cells;  // nx * ny, row-major in y-major order

    double& at(int ix, int iy) { return cells[static_cast<size_t>(iy) * nx + ix]; }
    double at(int ix, int iy) const { return cells[static_cast<size_t>(iy) * nx + ix]; }
};

inline DensityGrid medial_density(const VerificationResult& result, int nx = 64, int ny = 64) {
    DensityGrid grid;
    grid.nx = nx;
    grid.ny = ny;
    grid.cells.assign(static_cast<size_t>(nx) * ny, 0.0);
    int splatted = 0;
    for (const auto& s : result.samples) {
        if (!s.ok || !s.achieved) continue;
        ++splatted;
        for (const auto& p : s.achieved->medial_axis) {
            const double fx = (p.x - grid.x_lo) / (grid.x_hi - grid.x_lo) * (nx - 1);
            const double fy = (p.y - grid.y_lo) / (grid.y_hi - grid.y_lo) * (ny - 1);
            const int ix = static_cast<int>(std::floor(fx));
            const int iy = static_cast<int>(std::floor(fy));
            const double ax = fx - ix, ay = fy - iy;
            for (int dy = 0; dy <= 1; ++dy)
                for (int dx = 0; dx <= 1; ++dx) {
                    const int cx = ix + dx, cy = iy + dy;
                    if (cx < 0 || cx >= nx || cy < 0 || cy >= ny) continue;
                    const double wgt = (dx ? ax : 1.0 - ax) * (dy ? ay : 1.0 - ay);
                    grid.at(cx, cy) += wgt;
                }
        }
    }
    require(splatted > 0, Errc::no_successes, "no successful axes to accumulate");
    const double peak = *std::max_element(grid.cells.begin(), grid.cells.end());
    if (peak > 0.0)
        for (auto& c : grid.cells) c /= peak;
    return grid;
}

}  // namespace ifd
