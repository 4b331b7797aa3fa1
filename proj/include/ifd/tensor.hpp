#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ifd/common.hpp"

namespace ifd {

// Dense NCHW activation/parameter storage. Small by design: the network code
// maps slices into Eigen matrices for the heavy lifting.
template <typename T>
struct Tensor {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<T> data;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_),
          data(static_cast<size_t>(n_) * c_ * h_ * w_, T(0)) {}

    size_t size() const { return data.size(); }
    int chw() const { return c * h * w; }
    int hw() const { return h * w; }

    T* sample(int b) { return data.data() + static_cast<size_t>(b) * chw(); }
    const T* sample(int b) const { return data.data() + static_cast<size_t>(b) * chw(); }

    void zero() { std::fill(data.begin(), data.end(), T(0)); }

    bool same_shape(const Tensor& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }

    bool all_finite() const {
        for (const T& v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }
};

template <typename T>
using MatX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// (C x HW) view of one sample's channels
template <typename T>
Eigen::Map<MatX<T>> channel_map(Tensor<T>& t, int b) {
    return Eigen::Map<MatX<T>>(t.sample(b), t.c, t.hw());
}

template <typename T>
Eigen::Map<const MatX<T>> channel_map(const Tensor<T>& t, int b) {
    return Eigen::Map<const MatX<T>>(t.sample(b), t.c, t.hw());
}

}  // namespace ifd
