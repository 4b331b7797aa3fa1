#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ifd/common.hpp"
#include "ifd/nn.hpp"

namespace ifd {

// Adam with bias correction. Moment buffers are exposed so checkpoints can
// round-trip the optimizer state bit-exactly.
template <typename T = float>
struct Adam {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t step = 0;
    std::vector<std::vector<T>> m, v;  // parallel to the param list

    void init(const ParamRefs<T>& params) {
        m.clear();
        v.clear();
        for (const Param<T>* p : params) {
            m.emplace_back(p->size(), T(0));
            v.emplace_back(p->size(), T(0));
        }
    }

    // applies accumulated gradients and clears them
    void update(const ParamRefs<T>& params, double grad_clip = 0.0) {
        require(m.size() == params.size(), Errc::shape_mismatch, "optimizer not initialized");
        double scale = 1.0;
        if (grad_clip > 0.0) {
            double norm2 = 0.0;
            for (const Param<T>* p : params)
                for (const T& g : p->grad) norm2 += static_cast<double>(g) * static_cast<double>(g);
            const double norm = std::sqrt(norm2);
            if (norm > grad_clip) scale = grad_clip / norm;
        }
        ++step;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (size_t pi = 0; pi < params.size(); ++pi) {
            Param<T>& p = *params[pi];
            auto& mp = m[pi];
            auto& vp = v[pi];
            for (size_t i = 0; i < p.size(); ++i) {
                const double g = static_cast<double>(p.grad[i]) * scale;
                mp[i] = static_cast<T>(beta1 * static_cast<double>(mp[i]) + (1.0 - beta1) * g);
                vp[i] = static_cast<T>(beta2 * static_cast<double>(vp[i]) + (1.0 - beta2) * g * g);
                const double mhat = static_cast<double>(mp[i]) / bc1;
                const double vhat = static_cast<double>(vp[i]) / bc2;
                p.value[i] = static_cast<T>(static_cast<double>(p.value[i]) -
                                            lr * mhat / (std::sqrt(vhat) + eps));
                p.grad[i] = T(0);
            }
        }
    }
};

}  // namespace ifd
