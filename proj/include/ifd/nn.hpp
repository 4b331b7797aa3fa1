#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ifd/common.hpp"
#include "ifd/rng.hpp"
#include "ifd/tensor.hpp"

namespace ifd {

// Minimal training-capable layer set: convolutions via im2col + GEMM, group
// normalization, SiLU, linear. Every layer caches what its backward pass
// needs from the last forward call; backward accumulates parameter
// gradients and returns the input gradient. All layers are templated on the
// scalar so gradient checks can run in double.

template <typename T>
struct Param {
    std::string name;
    std::vector<int> shape;
    std::vector<T> value;
    std::vector<T> grad;

    void init_size() {
        size_t n = 1;
        for (int d : shape) n *= static_cast<size_t>(d);
        value.assign(n, T(0));
        grad.assign(n, T(0));
    }
    size_t size() const { return value.size(); }
};

template <typename T>
using ParamRefs = std::vector<Param<T>*>;

namespace nn {

template <typename T>
T silu_fwd(T x) {
    const T s = T(1) / (T(1) + std::exp(-x));
    return x * s;
}

template <typename T>
T silu_grad(T x) {
    const T s = T(1) / (T(1) + std::exp(-x));
    return s * (T(1) + x * (T(1) - s));
}

// elementwise SiLU over a tensor; caches the input
template <typename T>
struct SiLU {
    Tensor<T> x_cache;

    Tensor<T> forward(const Tensor<T>& x) {
        x_cache = x;
        Tensor<T> y(x.n, x.c, x.h, x.w);
        for (size_t i = 0; i < x.size(); ++i) y.data[i] = silu_fwd(x.data[i]);
        return y;
    }
    Tensor<T> backward(const Tensor<T>& dy) {
        Tensor<T> dx(dy.n, dy.c, dy.h, dy.w);
        for (size_t i = 0; i < dy.size(); ++i)
            dx.data[i] = dy.data[i] * silu_grad(x_cache.data[i]);
        return dx;
    }
};

// 2D convolution, square kernel, zero padding.
template <typename T>
struct Conv2d {
    int in_c = 0, out_c = 0, k = 3, stride = 1, pad = 1;
    Param<T> w;  // (out_c, in_c * k * k)
    Param<T> b;  // (out_c)
    Tensor<T> x_cache;

    void init(const std::string& name, int in_channels, int out_channels, int kernel,
              int stride_ = 1) {
        in_c = in_channels;
        out_c = out_channels;
        k = kernel;
        stride = stride_;
        pad = kernel / 2;
        w.name = name + ".w";
        w.shape = {out_c, in_c, k, k};
        w.init_size();
        b.name = name + ".b";
        b.shape = {out_c};
        b.init_size();
    }

    void collect(ParamRefs<T>& out) {
        out.push_back(&w);
        out.push_back(&b);
    }

    int out_dim(int in_dim) const { return (in_dim + 2 * pad - k) / stride + 1; }

    // patches: (in_c * k * k) x (oh * ow), row-major
    void im2col(const T* x, int h, int wd, int oh, int ow, T* cols) const {
        const int kk = k * k;
        for (int c = 0; c < in_c; ++c) {
            for (int t = 0; t < kk; ++t) {
                const int dr = t / k - pad, dc = t % k - pad;
                T* dst = cols + static_cast<size_t>(c * kk + t) * (oh * ow);
                const T* src = x + static_cast<size_t>(c) * h * wd;
                for (int r = 0; r < oh; ++r) {
                    const int rr = r * stride + dr;
                    if (rr < 0 || rr >= h) {
                        std::fill(dst, dst + ow, T(0));
                        dst += ow;
                        continue;
                    }
                    for (int q = 0; q < ow; ++q) {
                        const int cc = q * stride + dc;
                        *dst++ = (cc >= 0 && cc < wd) ? src[rr * wd + cc] : T(0);
                    }
                }
            }
        }
    }

    void col2im(const T* cols, int h, int wd, int oh, int ow, T* x) const {
        const int kk = k * k;
        for (int c = 0; c < in_c; ++c) {
            for (int t = 0; t < kk; ++t) {
                const int dr = t / k - pad, dc = t % k - pad;
                const T* src = cols + static_cast<size_t>(c * kk + t) * (oh * ow);
                T* dst = x + static_cast<size_t>(c) * h * wd;
                for (int r = 0; r < oh; ++r) {
                    const int rr = r * stride + dr;
                    if (rr < 0 || rr >= h) {
                        src += ow;
                        continue;
                    }
                    for (int q = 0; q < ow; ++q) {
                        const int cc = q * stride + dc;
                        if (cc >= 0 && cc < wd) dst[rr * wd + cc] += src[q];
                        ++src;
                    }
                }
            }
        }
    }

    Tensor<T> forward(const Tensor<T>& x) {
        require(x.c == in_c, Errc::shape_mismatch, w.name + ": channel mismatch");
        x_cache = x;
        const int oh = out_dim(x.h), ow = out_dim(x.w);
        Tensor<T> y(x.n, out_c, oh, ow);
        std::vector<T> cols(static_cast<size_t>(in_c * k * k) * oh * ow);
        Eigen::Map<const MatX<T>> W(w.value.data(), out_c, in_c * k * k);
        for (int bi = 0; bi < x.n; ++bi) {
            im2col(x.sample(bi), x.h, x.w, oh, ow, cols.data());
            Eigen::Map<const MatX<T>> C(cols.data(), in_c * k * k, oh * ow);
            Eigen::Map<MatX<T>> Y(y.sample(bi), out_c, oh * ow);
            Y.noalias() = W * C;
            for (int c = 0; c < out_c; ++c) Y.row(c).array() += b.value[static_cast<size_t>(c)];
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) {
        const int oh = dy.h, ow = dy.w;
        Tensor<T> dx(x_cache.n, in_c, x_cache.h, x_cache.w);
        std::vector<T> cols(static_cast<size_t>(in_c * k * k) * oh * ow);
        std::vector<T> dcols(cols.size());
        Eigen::Map<const MatX<T>> W(w.value.data(), out_c, in_c * k * k);
        Eigen::Map<MatX<T>> dW(w.grad.data(), out_c, in_c * k * k);
        for (int bi = 0; bi < dy.n; ++bi) {
            Eigen::Map<const MatX<T>> dY(dy.sample(bi), out_c, oh * ow);
            im2col(x_cache.sample(bi), x_cache.h, x_cache.w, oh, ow, cols.data());
            Eigen::Map<const MatX<T>> C(cols.data(), in_c * k * k, oh * ow);
            dW.noalias() += dY * C.transpose();
            for (int c = 0; c < out_c; ++c) b.grad[static_cast<size_t>(c)] += dY.row(c).sum();
            Eigen::Map<MatX<T>> dC(dcols.data(), in_c * k * k, oh * ow);
            dC.noalias() = W.transpose() * dY;
            col2im(dcols.data(), x_cache.h, x_cache.w, oh, ow, dx.sample(bi));
        }
        return dx;
    }
};

// GroupNorm over (channels/groups, H, W) per sample; affine.
template <typename T>
struct GroupNorm {
    int channels = 0, groups = 1;
    Param<T> gamma, beta;
    Tensor<T> xhat_cache;
    std::vector<T> invstd_cache;  // (n * groups)
    static constexpr double kEps = 1e-5;

    void init(const std::string& name, int channels_, int groups_) {
        channels = channels_;
        groups = groups_;
        require(channels % groups == 0, Errc::shape_mismatch, name + ": groups must divide C");
        gamma.name = name + ".g";
        gamma.shape = {channels};
        gamma.init_size();
        std::fill(gamma.value.begin(), gamma.value.end(), T(1));
        beta.name = name + ".b";
        beta.shape = {channels};
        beta.init_size();
    }

    void collect(ParamRefs<T>& out) {
        out.push_back(&gamma);
        out.push_back(&beta);
    }

    Tensor<T> forward(const Tensor<T>& x) {
        require(x.c == channels, Errc::shape_mismatch, gamma.name + ": channel mismatch");
        const int cg = channels / groups;
        const size_t gsz = static_cast<size_t>(cg) * x.hw();
        xhat_cache = Tensor<T>(x.n, x.c, x.h, x.w);
        invstd_cache.assign(static_cast<size_t>(x.n) * groups, T(0));
        Tensor<T> y(x.n, x.c, x.h, x.w);
        for (int bi = 0; bi < x.n; ++bi) {
            for (int g = 0; g < groups; ++g) {
                const T* xs = x.sample(bi) + static_cast<size_t>(g) * gsz;
                T* xh = xhat_cache.sample(bi) + static_cast<size_t>(g) * gsz;
                T* ys = y.sample(bi) + static_cast<size_t>(g) * gsz;
                double mean = 0.0;
                for (size_t i = 0; i < gsz; ++i) mean += static_cast<double>(xs[i]);
                mean /= static_cast<double>(gsz);
                double var = 0.0;
                for (size_t i = 0; i < gsz; ++i) {
                    const double d = static_cast<double>(xs[i]) - mean;
                    var += d * d;
                }
                var /= static_cast<double>(gsz);
                const T inv = static_cast<T>(1.0 / std::sqrt(var + kEps));
                invstd_cache[static_cast<size_t>(bi) * groups + g] = inv;
                for (size_t i = 0; i < gsz; ++i) {
                    xh[i] = static_cast<T>((static_cast<double>(xs[i]) - mean) * inv);
                    const int c = g * cg + static_cast<int>(i / static_cast<size_t>(x.hw()));
                    ys[i] = gamma.value[static_cast<size_t>(c)] * xh[i] +
                            beta.value[static_cast<size_t>(c)];
                }
            }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) {
        const int cg = channels / groups;
        const size_t gsz = static_cast<size_t>(cg) * dy.hw();
        Tensor<T> dx(dy.n, dy.c, dy.h, dy.w);
        for (int bi = 0; bi < dy.n; ++bi) {
            for (int g = 0; g < groups; ++g) {
                const T* dys = dy.sample(bi) + static_cast<size_t>(g) * gsz;
                const T* xh = xhat_cache.sample(bi) + static_cast<size_t>(g) * gsz;
                T* dxs = dx.sample(bi) + static_cast<size_t>(g) * gsz;
                const T inv = invstd_cache[static_cast<size_t>(bi) * groups + g];

                // dL/dxhat, plus the two reduction terms of the norm backward
                double sum_dxh = 0.0, sum_dxh_xh = 0.0;
                for (size_t i = 0; i < gsz; ++i) {
                    const int c = g * cg + static_cast<int>(i / static_cast<size_t>(dy.hw()));
                    const double dxh =
                        static_cast<double>(dys[i]) * static_cast<double>(gamma.value[static_cast<size_t>(c)]);
                    sum_dxh += dxh;
                    sum_dxh_xh += dxh * static_cast<double>(xh[i]);
                    gamma.grad[static_cast<size_t>(c)] += dys[i] * xh[i];
                    beta.grad[static_cast<size_t>(c)] += dys[i];
                }
                const double m = static_cast<double>(gsz);
                for (size_t i = 0; i < gsz; ++i) {
                    const int c = g * cg + static_cast<int>(i / static_cast<size_t>(dy.hw()));
                    const double dxh =
                        static_cast<double>(dys[i]) * static_cast<double>(gamma.value[static_cast<size_t>(c)]);
                    dxs[i] = static_cast<T>(static_cast<double>(inv) *
                                            (dxh - sum_dxh / m -
                                             static_cast<double>(xh[i]) * sum_dxh_xh / m));
                }
            }
        }
        return dx;
    }
};

// Fully connected layer on row-major (B x in) matrices.
template <typename T>
struct Linear {
    int in = 0, out = 0;
    Param<T> w;  // (out, in)
    Param<T> b;  // (out)
    MatX<T> x_cache;

    void init(const std::string& name, int in_, int out_) {
        in = in_;
        out = out_;
        w.name = name + ".w";
        w.shape = {out, in};
        w.init_size();
        b.name = name + ".b";
        b.shape = {out};
        b.init_size();
    }

    void collect(ParamRefs<T>& refs) {
        refs.push_back(&w);
        refs.push_back(&b);
    }

    MatX<T> forward(const MatX<T>& x) {
        require(x.cols() == in, Errc::dimension_mismatch, w.name + ": input width mismatch");
        x_cache = x;
        Eigen::Map<const MatX<T>> W(w.value.data(), out, in);
        MatX<T> y = x * W.transpose();
        for (int r = 0; r < y.rows(); ++r)
            for (int c = 0; c < out; ++c) y(r, c) += b.value[static_cast<size_t>(c)];
        return y;
    }

    MatX<T> backward(const MatX<T>& dy) {
        Eigen::Map<const MatX<T>> W(w.value.data(), out, in);
        Eigen::Map<MatX<T>> dW(w.grad.data(), out, in);
        dW.noalias() += dy.transpose() * x_cache;
        for (int c = 0; c < out; ++c) b.grad[static_cast<size_t>(c)] += dy.col(c).sum();
        return dy * W;
    }
};

// nearest-neighbor 2x upsample
template <typename T>
Tensor<T> upsample2_forward(const Tensor<T>& x) {
    Tensor<T> y(x.n, x.c, 2 * x.h, 2 * x.w);
    for (int bi = 0; bi < x.n; ++bi)
        for (int c = 0; c < x.c; ++c) {
            const T* xs = x.sample(bi) + static_cast<size_t>(c) * x.hw();
            T* ys = y.sample(bi) + static_cast<size_t>(c) * y.hw();
            for (int r = 0; r < x.h; ++r)
                for (int q = 0; q < x.w; ++q) {
                    const T v = xs[r * x.w + q];
                    ys[(2 * r) * y.w + 2 * q] = v;
                    ys[(2 * r) * y.w + 2 * q + 1] = v;
                    ys[(2 * r + 1) * y.w + 2 * q] = v;
                    ys[(2 * r + 1) * y.w + 2 * q + 1] = v;
                }
        }
    return y;
}

template <typename T>
Tensor<T> upsample2_backward(const Tensor<T>& dy) {
    Tensor<T> dx(dy.n, dy.c, dy.h / 2, dy.w / 2);
    for (int bi = 0; bi < dy.n; ++bi)
        for (int c = 0; c < dy.c; ++c) {
            const T* dys = dy.sample(bi) + static_cast<size_t>(c) * dy.hw();
            T* dxs = dx.sample(bi) + static_cast<size_t>(c) * dx.hw();
            for (int r = 0; r < dx.h; ++r)
                for (int q = 0; q < dx.w; ++q)
                    dxs[r * dx.w + q] = dys[(2 * r) * dy.w + 2 * q] +
                                        dys[(2 * r) * dy.w + 2 * q + 1] +
                                        dys[(2 * r + 1) * dy.w + 2 * q] +
                                        dys[(2 * r + 1) * dy.w + 2 * q + 1];
        }
    return dx;
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
    require(a.n == b.n && a.h == b.h && a.w == b.w, Errc::shape_mismatch, "concat shape mismatch");
    Tensor<T> y(a.n, a.c + b.c, a.h, a.w);
    for (int bi = 0; bi < a.n; ++bi) {
        std::copy_n(a.sample(bi), a.chw(), y.sample(bi));
        std::copy_n(b.sample(bi), b.chw(), y.sample(bi) + a.chw());
    }
    return y;
}

template <typename T>
void split_channels(const Tensor<T>& dy, Tensor<T>& da, Tensor<T>& db) {
    for (int bi = 0; bi < dy.n; ++bi) {
        std::copy_n(dy.sample(bi), da.chw(), da.sample(bi));
        std::copy_n(dy.sample(bi) + da.chw(), db.chw(), db.sample(bi));
    }
}

// Kaiming-style initialization for convs and linears; scale 0 leaves the
// parameter at zero (used for the FiLM projections and the output conv).
template <typename T>
void init_normal(Param<T>& p, int fan_in, Rng& rng, double gain = 1.0) {
    const double std = gain > 0.0 ? gain * std::sqrt(2.0 / fan_in) : 0.0;
    for (auto& v : p.value) v = static_cast<T>(std * rng.normal());
}

}  // namespace nn
}  // namespace ifd
