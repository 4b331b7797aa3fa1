#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ifd/common.hpp"
#include "ifd/nn.hpp"
#include "ifd/rng.hpp"
#include "ifd/tensor.hpp"

namespace ifd {

inline constexpr int kContextDim = 256;

// Transformer-style positional embedding of the diffusion step: half sines,
// half cosines over geometrically spaced frequencies from 1 down to 1/10000.
template <typename T = float>
std::vector<T> sinusoidal_embed(int t, int dim = kContextDim) {
    const int half = dim / 2;
    std::vector<T> out(static_cast<size_t>(dim));
    for (int k = 0; k < half; ++k) {
        const double freq = std::pow(10000.0, -static_cast<double>(k) / (half - 1));
        out[static_cast<size_t>(k)] = static_cast<T>(std::sin(t * freq));
        out[static_cast<size_t>(half + k)] = static_cast<T>(std::cos(t * freq));
    }
    return out;
}

struct UNetConfig {
    int in_channels = 1;
    int width1 = 64, width2 = 128, width3 = 256;  // 28 -> 14 -> 7
    int context_dim = kContextDim;
    int groups = 8;

    void validate() const {
        require(width1 < width2 && width2 < width3, Errc::shape_mismatch,
                "channel widths must increase");
        require(context_dim == kContextDim, Errc::shape_mismatch, "context dim is fixed at 256");
    }
    int groups_for(int channels) const {
        int g = groups;
        while (g > 1 && channels % g != 0) g /= 2;
        return g;
    }
};

struct ContextEmbedConfig {
    int input_dim = 1;  // 1 scalar, 2 bbox, 60 medial
    int hidden = 200;
    int output_dim = kContextDim;
};

namespace nn {

template <typename T>
struct MatSiLU {
    MatX<T> x_cache;
    MatX<T> forward(const MatX<T>& x) {
        x_cache = x;
        return x.unaryExpr([](T v) { return silu_fwd(v); });
    }
    MatX<T> backward(const MatX<T>& dy) {
        return dy.cwiseProduct(x_cache.unaryExpr([](T v) { return silu_grad(v); }));
    }
};

}  // namespace nn

// Descriptor embedding: two hidden layers of 200 units with SiLU, linear
// output into the 256-dim context space. The unconditional branch replaces
// this output with the zero vector.
template <typename T = float>
struct ContextMlp {
    ContextEmbedConfig cfg;
    nn::Linear<T> fc1, fc2, fc3;
    nn::MatSiLU<T> act1, act2;

    explicit ContextMlp(const ContextEmbedConfig& c = {}) : cfg(c) {
        fc1.init("ctx.fc1", cfg.input_dim, cfg.hidden);
        fc2.init("ctx.fc2", cfg.hidden, cfg.hidden);
        fc3.init("ctx.fc3", cfg.hidden, cfg.output_dim);
    }

    void collect(ParamRefs<T>& out) {
        fc1.collect(out);
        fc2.collect(out);
        fc3.collect(out);
    }

    void init_params(Rng& rng) {
        nn::init_normal(fc1.w, cfg.input_dim, rng);
        nn::init_normal(fc2.w, cfg.hidden, rng);
        nn::init_normal(fc3.w, cfg.hidden, rng);
    }

    MatX<T> forward(const MatX<T>& y) {
        require(static_cast<int>(y.cols()) == cfg.input_dim, Errc::dimension_mismatch,
                "descriptor dim " + std::to_string(y.cols()) + " != " +
                    std::to_string(cfg.input_dim));
        return fc3.forward(act2.forward(fc2.forward(act1.forward(fc1.forward(y)))));
    }

    MatX<T> backward(const MatX<T>& dy) {
        return fc1.backward(act1.backward(fc2.backward(act2.backward(fc3.backward(dy)))));
    }
};

namespace nn {

// GN - SiLU - conv3x3 - (+ context shift) - GN - SiLU - conv3x3, residual.
template <typename T>
struct ResBlock {
    int in_c = 0, out_c = 0;
    GroupNorm<T> gn1, gn2;
    SiLU<T> act1, act2;
    Conv2d<T> conv1, conv2;
    Linear<T> film;  // context -> per-channel additive shift
    Conv2d<T> skip;  // 1x1 when in_c != out_c
    bool has_skip_conv = false;
    MatX<T> ctx_cache;

    void init(const std::string& name, int in_channels, int out_channels, int context_dim,
              const UNetConfig& cfg) {
        in_c = in_channels;
        out_c = out_channels;
        gn1.init(name + ".gn1", in_c, cfg.groups_for(in_c));
        conv1.init(name + ".conv1", in_c, out_c, 3);
        film.init(name + ".film", context_dim, out_c);
        gn2.init(name + ".gn2", out_c, cfg.groups_for(out_c));
        conv2.init(name + ".conv2", out_c, out_c, 3);
        has_skip_conv = in_c != out_c;
        if (has_skip_conv) skip.init(name + ".skip", in_c, out_c, 1);
    }

    void collect(ParamRefs<T>& out) {
        gn1.collect(out);
        conv1.collect(out);
        film.collect(out);
        gn2.collect(out);
        conv2.collect(out);
        if (has_skip_conv) skip.collect(out);
    }

    void init_params(Rng& rng) {
        init_normal(conv1.w, in_c * 9, rng);
        init_normal(conv2.w, out_c * 9, rng);
        init_normal(film.w, 0, rng, 0.0);  // conditioning fades in during training
        if (has_skip_conv) init_normal(skip.w, in_c, rng);
    }

    Tensor<T> forward(const Tensor<T>& x, const MatX<T>& ctx) {
        ctx_cache = ctx;
        Tensor<T> h = conv1.forward(act1.forward(gn1.forward(x)));
        const MatX<T> shift = film.forward(ctx);  // (B x out_c)
        for (int bi = 0; bi < h.n; ++bi)
            for (int c = 0; c < h.c; ++c) {
                T* p = h.sample(bi) + static_cast<size_t>(c) * h.hw();
                const T s = shift(bi, c);
                for (int i = 0; i < h.hw(); ++i) p[i] += s;
            }
        h = conv2.forward(act2.forward(gn2.forward(h)));
        if (has_skip_conv) {
            const Tensor<T> xs = skip.forward(x);
            for (size_t i = 0; i < h.size(); ++i) h.data[i] += xs.data[i];
        } else {
            for (size_t i = 0; i < h.size(); ++i) h.data[i] += x.data[i];
        }
        return h;
    }

    // returns dx; accumulates d(ctx) into dctx
    Tensor<T> backward(const Tensor<T>& dy, MatX<T>& dctx) {
        Tensor<T> dh = gn2.backward(act2.backward(conv2.backward(dy)));
        // context shift: gradient is the spatial sum per channel
        MatX<T> dshift = MatX<T>::Zero(dh.n, out_c);
        for (int bi = 0; bi < dh.n; ++bi)
            for (int c = 0; c < out_c; ++c) {
                const T* p = dh.sample(bi) + static_cast<size_t>(c) * dh.hw();
                T s = T(0);
                for (int i = 0; i < dh.hw(); ++i) s += p[i];
                dshift(bi, c) = s;
            }
        dctx += film.backward(dshift);
        Tensor<T> dx = gn1.backward(act1.backward(conv1.backward(dh)));
        if (has_skip_conv) {
            const Tensor<T> dxs = skip.backward(dy);
            for (size_t i = 0; i < dx.size(); ++i) dx.data[i] += dxs.data[i];
        } else {
            for (size_t i = 0; i < dx.size(); ++i) dx.data[i] += dy.data[i];
        }
        return dx;
    }
};

}  // namespace nn

// Epsilon-prediction U-Net over 28x28 single-channel images, three scales
// (28, 14, 7), two residual blocks per scale, stride-2 conv downsampling,
// nearest-neighbor upsampling with conv, skip concatenations.
template <typename T = float>
struct UNet {
    UNetConfig cfg;

    nn::Conv2d<T> conv_in;
    nn::ResBlock<T> enc1a, enc1b, enc2a, enc2b, enc3a, enc3b;
    nn::Conv2d<T> down1, down2;
    nn::Conv2d<T> upconv2, upconv1;
    nn::ResBlock<T> dec2a, dec2b, dec1a, dec1b;
    nn::GroupNorm<T> gn_out;
    nn::SiLU<T> act_out;
    nn::Conv2d<T> conv_out;

    explicit UNet(const UNetConfig& c = {}) : cfg(c) {
        cfg.validate();
        const int w1 = cfg.width1, w2 = cfg.width2, w3 = cfg.width3;
        conv_in.init("conv_in", cfg.in_channels, w1, 3);
        enc1a.init("enc1a", w1, w1, cfg.context_dim, cfg);
        enc1b.init("enc1b", w1, w1, cfg.context_dim, cfg);
        down1.init("down1", w1, w2, 3, 2);
        enc2a.init("enc2a", w2, w2, cfg.context_dim, cfg);
        enc2b.init("enc2b", w2, w2, cfg.context_dim, cfg);
        down2.init("down2", w2, w3, 3, 2);
        enc3a.init("enc3a", w3, w3, cfg.context_dim, cfg);
        enc3b.init("enc3b", w3, w3, cfg.context_dim, cfg);
        upconv2.init("upconv2", w3, w2, 3);
        dec2a.init("dec2a", w2 + w2, w2, cfg.context_dim, cfg);
        dec2b.init("dec2b", w2, w2, cfg.context_dim, cfg);
        upconv1.init("upconv1", w2, w1, 3);
        dec1a.init("dec1a", w1 + w1, w1, cfg.context_dim, cfg);
        dec1b.init("dec1b", w1, w1, cfg.context_dim, cfg);
        gn_out.init("out.gn", w1, cfg.groups_for(w1));
        conv_out.init("out.conv", w1, cfg.in_channels, 3);
    }

    void collect(ParamRefs<T>& out) {
        conv_in.collect(out);
        enc1a.collect(out);
        enc1b.collect(out);
        down1.collect(out);
        enc2a.collect(out);
        enc2b.collect(out);
        down2.collect(out);
        enc3a.collect(out);
        enc3b.collect(out);
        upconv2.collect(out);
        dec2a.collect(out);
        dec2b.collect(out);
        upconv1.collect(out);
        dec1a.collect(out);
        dec1b.collect(out);
        gn_out.collect(out);
        conv_out.collect(out);
    }

    void init_params(Rng& rng) {
        nn::init_normal(conv_in.w, cfg.in_channels * 9, rng);
        enc1a.init_params(rng);
        enc1b.init_params(rng);
        nn::init_normal(down1.w, cfg.width1 * 9, rng);
        enc2a.init_params(rng);
        enc2b.init_params(rng);
        nn::init_normal(down2.w, cfg.width2 * 9, rng);
        enc3a.init_params(rng);
        enc3b.init_params(rng);
        nn::init_normal(upconv2.w, cfg.width3 * 9, rng);
        dec2a.init_params(rng);
        dec2b.init_params(rng);
        nn::init_normal(upconv1.w, cfg.width2 * 9, rng);
        dec1a.init_params(rng);
        dec1b.init_params(rng);
        nn::init_normal(conv_out.w, 0, rng, 0.0);  // zero-init: fresh net predicts 0
    }

    // caches for backward
    Tensor<T> e1_cache, e2_cache;

    Tensor<T> forward(const Tensor<T>& x, const MatX<T>& ctx) {
        require(x.c == cfg.in_channels && x.h == 28 && x.w == 28, Errc::shape_mismatch,
                "UNet expects Bx1x28x28 input");
        require(static_cast<int>(ctx.rows()) == x.n &&
                    static_cast<int>(ctx.cols()) == cfg.context_dim,
                Errc::shape_mismatch, "context must be B x 256");

        Tensor<T> h = conv_in.forward(x);
        h = enc1a.forward(h, ctx);
        h = enc1b.forward(h, ctx);
        e1_cache = h;
        h = down1.forward(h);
        h = enc2a.forward(h, ctx);
        h = enc2b.forward(h, ctx);
        e2_cache = h;
        h = down2.forward(h);
        h = enc3a.forward(h, ctx);
        h = enc3b.forward(h, ctx);

        h = upconv2.forward(nn::upsample2_forward(h));
        h = nn::concat_channels(h, e2_cache);
        h = dec2a.forward(h, ctx);
        h = dec2b.forward(h, ctx);
        h = upconv1.forward(nn::upsample2_forward(h));
        h = nn::concat_channels(h, e1_cache);
        h = dec1a.forward(h, ctx);
        h = dec1b.forward(h, ctx);
        return conv_out.forward(act_out.forward(gn_out.forward(h)));
    }

    // returns d(input); fills dctx (B x 256)
    Tensor<T> backward(const Tensor<T>& d_eps, MatX<T>& dctx) {
        dctx = MatX<T>::Zero(d_eps.n, cfg.context_dim);

        Tensor<T> dh = gn_out.backward(act_out.backward(conv_out.backward(d_eps)));
        dh = dec1b.backward(dh, dctx);
        dh = dec1a.backward(dh, dctx);
        Tensor<T> dcat_a(dh.n, cfg.width1, 28, 28), de1(dh.n, cfg.width1, 28, 28);
        nn::split_channels(dh, dcat_a, de1);
        dh = nn::upsample2_backward(upconv1.backward(dcat_a));
        dh = dec2b.backward(dh, dctx);
        dh = dec2a.backward(dh, dctx);
        Tensor<T> dcat_b(dh.n, cfg.width2, 14, 14), de2(dh.n, cfg.width2, 14, 14);
        nn::split_channels(dh, dcat_b, de2);
        dh = nn::upsample2_backward(upconv2.backward(dcat_b));
        dh = enc3b.backward(dh, dctx);
        dh = enc3a.backward(dh, dctx);
        dh = down2.backward(dh);
        for (size_t i = 0; i < dh.size(); ++i) dh.data[i] += de2.data[i];
        dh = enc2b.backward(dh, dctx);
        dh = enc2a.backward(dh, dctx);
        dh = down1.backward(dh);
        for (size_t i = 0; i < dh.size(); ++i) dh.data[i] += de1.data[i];
        dh = enc1b.backward(dh, dctx);
        dh = enc1a.backward(dh, dctx);
        return conv_in.backward(dh);
    }
};

// null context contribution: the descriptor embedding is replaced by zero,
// the time embedding stays
template <typename T = float>
void add_time_embedding(MatX<T>& ctx, const std::vector<int>& t) {
    for (int b = 0; b < ctx.rows(); ++b) {
        const auto e = sinusoidal_embed<T>(t[static_cast<size_t>(b)],
                                           static_cast<int>(ctx.cols()));
        for (int k = 0; k < ctx.cols(); ++k) ctx(b, k) += e[static_cast<size_t>(k)];
    }
}

}  // namespace ifd
