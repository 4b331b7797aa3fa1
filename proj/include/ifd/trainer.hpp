#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "ifd/checkpoint.hpp"
#include "ifd/common.hpp"
#include "ifd/diffusion.hpp"
#include "ifd/geometry.hpp"
#include "ifd/optim.hpp"
#include "ifd/rng.hpp"
#include "ifd/schedule.hpp"
#include "ifd/store.hpp"
#include "ifd/unet.hpp"

namespace ifd {

struct TrainConfig {
    int epochs = 150;
    int batch_size = 100;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int checkpoint_every = 10;  // epochs
    double context_drop = 0.1;
    double lambda_vlb = 0.001;
    double grad_clip = 0.0;  // 0 = off
    std::uint64_t seed = 0;
};

// Min-max scaling of descriptor components to [0,1]; images map p -> 2p - 1.
// Components that are structurally zero across the whole set (the
// origin-aligned first medial-axis point) pass through as zero; any other
// constant component is an error.
struct NormalizationStats {
    std::vector<double> min, max;

    int dim() const { return static_cast<int>(min.size()); }

    double scale_component(double v, int i) const {
        return (v - min[static_cast<size_t>(i)]) /
               (max[static_cast<size_t>(i)] - min[static_cast<size_t>(i)]);
    }
    double unscale_component(double v, int i) const {
        return min[static_cast<size_t>(i)] +
               v * (max[static_cast<size_t>(i)] - min[static_cast<size_t>(i)]);
    }
    std::vector<double> scale(const std::vector<double>& y) const {
        require(static_cast<int>(y.size()) == dim(), Errc::dimension_mismatch,
                "descriptor dim mismatch in scaling");
        std::vector<double> out(y.size());
        for (size_t i = 0; i < y.size(); ++i)
            out[i] = scale_component(y[i], static_cast<int>(i));
        return out;
    }
    std::vector<double> unscale(const std::vector<double>& y) const {
        std::vector<double> out(y.size());
        for (size_t i = 0; i < y.size(); ++i)
            out[i] = unscale_component(y[i], static_cast<int>(i));
        return out;
    }
};

inline NormalizationStats compute_norms(const std::vector<std::vector<double>>& descriptors) {
    require(!descriptors.empty(), Errc::degenerate_data, "no descriptors to normalize");
    const size_t dim = descriptors.front().size();
    NormalizationStats s;
    s.min.assign(dim, std::numeric_limits<double>::infinity());
    s.max.assign(dim, -std::numeric_limits<double>::infinity());
    for (const auto& d : descriptors) {
        require(d.size() == dim, Errc::dimension_mismatch, "ragged descriptor set");
        for (size_t i = 0; i < dim; ++i) {
            s.min[i] = std::min(s.min[i], d[i]);
            s.max[i] = std::max(s.max[i], d[i]);
        }
    }
    for (size_t i = 0; i < dim; ++i) {
        if (s.max[i] > s.min[i]) continue;
        if (s.min[i] == 0.0) {
            // structurally zero component (medial-axis origin); identity map
            s.max[i] = 1.0;
            continue;
        }
        fail(Errc::constant_component, "descriptor component " + std::to_string(i) +
                                           " is constant at " + std::to_string(s.min[i]));
    }
    return s;
}

inline NormalizationStats compute_norms(const DatasetStore& store, DescriptorKind kind) {
    std::vector<std::vector<double>> all;
    for (const auto& rec : store.records)
        if (rec.descriptors) all.push_back(descriptor_vector(*rec.descriptors, kind));
    return compute_norms(all);
}

struct StepLog {
    int epoch = 0;
    int step = 0;
    double l_simple = 0.0;
    double l_vlb = 0.0;
    double total = 0.0;
    double wall_ms = 0.0;

    bool loss_equal(const StepLog& o) const {
        return epoch == o.epoch && step == o.step && l_simple == o.l_simple &&
               l_vlb == o.l_vlb && total == o.total;
    }
};

inline void write_train_log(const std::vector<StepLog>& log, const std::string& path) {
    std::ofstream f(path);
    require(f.good(), Errc::io_error, "cannot open for write: " + path);
    f << "epoch,step,l_simple,l_vlb,total,wall_ms\n";
    for (const auto& s : log)
        f << s.epoch << "," << s.step << "," << s.l_simple << "," << s.l_vlb << ","
          << s.total << "," << s.wall_ms << "\n";
}

// A trained (or training) conditional denoiser: U-Net plus descriptor
// embedding, with the shared noise schedule and normalization metadata.
struct DiffusionModel {
    UNetConfig unet_cfg;
    ContextEmbedConfig ctx_cfg;
    DescriptorKind kind = DescriptorKind::height;
    NoiseSchedule schedule;
    NormalizationStats norms;
    std::uint64_t seed = 0;
    int epoch = 0;

    std::unique_ptr<UNet<float>> unet;
    std::unique_ptr<ContextMlp<float>> ctx_mlp;
    ParamRefs<float> params;
    Adam<float> adam;

    void build() {
        unet = std::make_unique<UNet<float>>(unet_cfg);
        ctx_mlp = std::make_unique<ContextMlp<float>>(ctx_cfg);
        params.clear();
        unet->collect(params);
        ctx_mlp->collect(params);
    }

    void init_params() {
        Rng rng(derive_seed(seed, "init"));
        unet->init_params(rng);
        ctx_mlp->init_params(rng);
    }

    // context for a batch: sinusoidal time embedding plus (conditionally)
    // the embedded descriptor rows
    MatX<float> make_context(const std::vector<int>& t, const MatX<float>* y_norm) {
        MatX<float> ctx = MatX<float>::Zero(static_cast<int>(t.size()), unet_cfg.context_dim);
        add_time_embedding(ctx, t);
        if (y_norm) ctx += ctx_mlp->forward(*y_norm);
        return ctx;
    }

    // eps-model closure for the sampling loop, conditioning every element on
    // the same normalized target
    EpsModel sampler_for(const std::vector<double>& y_normalized) {
        std::vector<float> yrow(y_normalized.begin(), y_normalized.end());
        return [this, yrow](const Tensor<float>& x_t, int t, bool conditional) {
            const std::vector<int> ts(static_cast<size_t>(x_t.n), t);
            MatX<float> ctx;
            if (conditional) {
                MatX<float> y(x_t.n, static_cast<int>(yrow.size()));
                for (int b = 0; b < x_t.n; ++b)
                    for (size_t i = 0; i < yrow.size(); ++i)
                        y(b, static_cast<int>(i)) = yrow[i];
                ctx = make_context(ts, &y);
            } else {
                ctx = make_context(ts, nullptr);
            }
            return unet->forward(x_t, ctx);
        };
    }

    CheckpointMeta meta(const TrainConfig& cfg) const {
        CheckpointMeta m;
        m.schedule_kind = schedule.kind;
        m.schedule_T = schedule.T;
        m.descriptor_kind = kind;
        m.descriptor_dim = ctx_cfg.input_dim;
        m.norm_min = norms.min;
        m.norm_max = norms.max;
        m.epoch = epoch;
        m.seed = seed;
        m.unet = unet_cfg;
        m.context = ctx_cfg;
        m.adam = {adam.step, cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps};
        return m;
    }

    void save(const std::string& path, const TrainConfig& cfg) const {
        std::vector<std::tuple<std::string, std::vector<int>, const std::vector<float>*>> blocks;
        for (const Param<float>* p : params) blocks.emplace_back(p->name, p->shape, &p->value);
        for (size_t i = 0; i < params.size(); ++i) {
            blocks.emplace_back("adam.m:" + params[i]->name, params[i]->shape, &adam.m[i]);
            blocks.emplace_back("adam.v:" + params[i]->name, params[i]->shape, &adam.v[i]);
        }
        save_checkpoint(path, meta(cfg), blocks);
    }

    static DiffusionModel load(const std::string& path) {
        const CheckpointData data = load_checkpoint(path);
        DiffusionModel m;
        m.unet_cfg = data.meta.unet;
        m.ctx_cfg = data.meta.context;
        m.kind = data.meta.descriptor_kind;
        m.norms.min = data.meta.norm_min;
        m.norms.max = data.meta.norm_max;
        m.seed = data.meta.seed;
        m.epoch = data.meta.epoch;
        require(data.meta.schedule_kind == "cosine", Errc::corrupt_container,
                "unknown schedule kind: " + data.meta.schedule_kind);
        m.schedule = cosine_schedule(data.meta.schedule_T);
        m.build();
        restore_params(data, m.params);
        m.adam.lr = data.meta.adam.lr;
        m.adam.beta1 = data.meta.adam.beta1;
        m.adam.beta2 = data.meta.adam.beta2;
        m.adam.eps = data.meta.adam.eps;
        m.adam.step = data.meta.adam.step;
        m.adam.init(m.params);
        for (size_t i = 0; i < m.params.size(); ++i) {
            const auto im = data.blocks.find("adam.m:" + m.params[i]->name);
            const auto iv = data.blocks.find("adam.v:" + m.params[i]->name);
            if (im != data.blocks.end()) m.adam.m[i] = im->second.second;
            if (iv != data.blocks.end()) m.adam.v[i] = iv->second.second;
        }
        return m;
    }
};

struct TrainResult {
    std::vector<StepLog> log;
    std::vector<std::string> checkpoint_paths;
};

// One training run (or continuation). Epoch-scoped RNG streams make a resume
// from any checkpoint bit-identical to the uninterrupted run: epoch k always
// consumes the same draws no matter where the process started.
inline TrainResult train(DiffusionModel& model, const DatasetStore& store,
                         const TrainConfig& cfg, const std::string& out_dir,
                         int log_every = 1) {
    require(model.unet != nullptr, Errc::shape_mismatch, "model not built");
    std::vector<size_t> usable;
    for (size_t i = 0; i < store.records.size(); ++i)
        if (store.records[i].descriptors) usable.push_back(i);
    require(!usable.empty(), Errc::degenerate_data, "no records with descriptors");

    const int N = static_cast<int>(usable.size());
    const int D = descriptor_dim(model.kind);
    require(D == model.ctx_cfg.input_dim, Errc::descriptor_kind_mismatch,
            "model embeds " + std::to_string(model.ctx_cfg.input_dim) +
                "-dim descriptors, dataset kind needs " + std::to_string(D));

    // pre-scale every usable record once
    std::vector<std::array<float, kImagePixels>> x0_scaled(usable.size());
    std::vector<std::vector<double>> y_scaled(usable.size());
    for (size_t i = 0; i < usable.size(); ++i) {
        const auto& rec = store.records[usable[i]];
        for (int p = 0; p < kImagePixels; ++p)
            x0_scaled[i][static_cast<size_t>(p)] =
                2.0f * rec.basis.px[static_cast<size_t>(p)] - 1.0f;
        y_scaled[i] = model.norms.scale(descriptor_vector(*rec.descriptors, model.kind));
    }

    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    TrainResult result;
    const int T = model.schedule.T;
    LossWeights weights{cfg.lambda_vlb};

    for (int epoch = model.epoch + 1; epoch <= cfg.epochs; ++epoch) {
        Rng order_rng(derive_seed(cfg.seed, "epoch-order", static_cast<std::uint64_t>(epoch)));
        Rng noise_rng(derive_seed(cfg.seed, "epoch-noise", static_cast<std::uint64_t>(epoch)));
        std::vector<int> order(usable.size());
        for (int i = 0; i < N; ++i) order[static_cast<size_t>(i)] = i;
        order_rng.shuffle(order.begin(), order.end());

        const int n_steps = (N + cfg.batch_size - 1) / cfg.batch_size;
        for (int step = 0; step < n_steps; ++step) {
            const auto t0 = std::chrono::steady_clock::now();
            const int lo = step * cfg.batch_size;
            const int B = std::min(cfg.batch_size, N - lo);

            Tensor<float> x0(B, 1, kImageSide, kImageSide);
            Tensor<float> eps(B, 1, kImageSide, kImageSide);
            std::vector<int> t(static_cast<size_t>(B));
            std::vector<bool> dropped(static_cast<size_t>(B));
            MatX<float> y(B, D);
            for (int b = 0; b < B; ++b) {
                const int idx = order[static_cast<size_t>(lo + b)];
                std::copy_n(x0_scaled[static_cast<size_t>(idx)].data(), kImagePixels,
                            x0.sample(b));
                t[static_cast<size_t>(b)] = static_cast<int>(noise_rng.uniform_int(1, T));
                float* e = eps.sample(b);
                for (int p = 0; p < kImagePixels; ++p)
                    e[p] = static_cast<float>(noise_rng.normal());
                dropped[static_cast<size_t>(b)] = noise_rng.bernoulli(cfg.context_drop);
                for (int d = 0; d < D; ++d)
                    y(b, d) = static_cast<float>(y_scaled[static_cast<size_t>(idx)]
                                                         [static_cast<size_t>(d)]);
            }

            // forward: x_t, context (dropped rows keep only the time part)
            Tensor<float> x_t(B, 1, kImageSide, kImageSide);
            for (int b = 0; b < B; ++b)
                q_sample(x0.sample(b), eps.sample(b), static_cast<size_t>(x0.chw()),
                         t[static_cast<size_t>(b)], model.schedule, x_t.sample(b));
            MatX<float> y_masked = y;
            for (int b = 0; b < B; ++b)
                if (dropped[static_cast<size_t>(b)]) y_masked.row(b).setZero();
            MatX<float> zeta_d = model.ctx_mlp->forward(y_masked);
            for (int b = 0; b < B; ++b)
                if (dropped[static_cast<size_t>(b)]) zeta_d.row(b).setZero();
            MatX<float> ctx = zeta_d;
            add_time_embedding(ctx, t);

            Tensor<float> eps_hat = model.unet->forward(x_t, ctx);

            Tensor<float> d_eps_hat(B, 1, kImageSide, kImageSide);
            const HybridLoss loss =
                hybrid_loss(x0, t, eps, eps_hat, model.schedule, weights, &d_eps_hat);

            MatX<float> dctx;
            model.unet->backward(d_eps_hat, dctx);
            for (int b = 0; b < B; ++b)
                if (dropped[static_cast<size_t>(b)]) dctx.row(b).setZero();
            model.ctx_mlp->backward(dctx);

            model.adam.lr = cfg.lr;
            model.adam.beta1 = cfg.beta1;
            model.adam.beta2 = cfg.beta2;
            model.adam.eps = cfg.adam_eps;
            model.adam.update(model.params, cfg.grad_clip);

            if (step % log_every == 0) {
                const auto t1 = std::chrono::steady_clock::now();
                result.log.push_back(
                    {epoch, step, loss.simple, loss.vlb, loss.total,
                     std::chrono::duration<double, std::milli>(t1 - t0).count()});
            }
        }

        model.epoch = epoch;
        const bool at_interval = cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0;
        if (!out_dir.empty() && (at_interval || epoch == cfg.epochs)) {
            const std::string path = out_dir + "/ckpt_epoch" + std::to_string(epoch) + ".ifdc";
            model.save(path, cfg);
            result.checkpoint_paths.push_back(path);
        }
    }
    return result;
}

}  // namespace ifd
