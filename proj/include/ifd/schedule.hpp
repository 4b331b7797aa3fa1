#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ifd/common.hpp"

namespace ifd {

// Diffusion coefficients, index 1..T (index 0 holds the alpha_bar_0 = 1
// convention so the t = 1 posterior is well-defined). After clipping, all
// derived arrays are rebuilt from beta so they stay mutually consistent.
struct NoiseSchedule {
    int T = 0;
    std::string kind;               // "cosine" or "custom"
    std::vector<double> beta;       // beta[0] = 0
    std::vector<double> alpha;      // 1 - beta
    std::vector<double> alpha_bar;  // prod alpha, alpha_bar[0] = 1

    double posterior_var(int t) const {  // beta_tilde
        return (1.0 - alpha_bar[static_cast<size_t>(t - 1)]) /
               (1.0 - alpha_bar[static_cast<size_t>(t)]) * beta[static_cast<size_t>(t)];
    }
    double posterior_coef_x0(int t) const {
        return std::sqrt(alpha_bar[static_cast<size_t>(t - 1)]) * beta[static_cast<size_t>(t)] /
               (1.0 - alpha_bar[static_cast<size_t>(t)]);
    }
    double posterior_coef_xt(int t) const {
        return std::sqrt(alpha[static_cast<size_t>(t)]) *
               (1.0 - alpha_bar[static_cast<size_t>(t - 1)]) /
               (1.0 - alpha_bar[static_cast<size_t>(t)]);
    }
};

inline NoiseSchedule schedule_from_betas(std::vector<double> betas, std::string kind = "custom") {
    NoiseSchedule s;
    s.T = static_cast<int>(betas.size());
    s.kind = std::move(kind);
    s.beta.assign(1, 0.0);
    s.beta.insert(s.beta.end(), betas.begin(), betas.end());
    s.alpha.resize(s.beta.size());
    s.alpha_bar.resize(s.beta.size());
    s.alpha[0] = 1.0;
    s.alpha_bar[0] = 1.0;
    for (int t = 1; t <= s.T; ++t) {
        require(s.beta[static_cast<size_t>(t)] > 0.0 && s.beta[static_cast<size_t>(t)] < 1.0,
                Errc::shape_mismatch, "beta out of (0,1) at t=" + std::to_string(t));
        s.alpha[static_cast<size_t>(t)] = 1.0 - s.beta[static_cast<size_t>(t)];
        s.alpha_bar[static_cast<size_t>(t)] =
            s.alpha_bar[static_cast<size_t>(t - 1)] * s.alpha[static_cast<size_t>(t)];
    }
    return s;
}

// f(t) = cos^2(((t/T + s)/(1 + s)) * pi/2), s = 0.008;
// beta_t = 1 - f(t)/f(t-1), clipped to <= 0.999 near the tail.
inline NoiseSchedule cosine_schedule(int T) {
    require(T >= 1, Errc::shape_mismatch, "schedule needs T >= 1");
    const double s = 0.008;
    const double pi_half = 1.5707963267948966;
    auto f = [&](double t) {
        const double c = std::cos((t / T + s) / (1.0 + s) * pi_half);
        return c * c;
    };
    const double f0 = f(0.0);
    std::vector<double> betas(static_cast<size_t>(T));
    double prev = 1.0;
    for (int t = 1; t <= T; ++t) {
        const double cur = f(static_cast<double>(t)) / f0;
        double beta = 1.0 - cur / prev;
        if (beta > 0.999) beta = 0.999;
        betas[static_cast<size_t>(t - 1)] = beta;
        prev *= 1.0 - beta;  // keep the running product consistent with the clip
    }
    return schedule_from_betas(std::move(betas), "cosine");
}

}  // namespace ifd
