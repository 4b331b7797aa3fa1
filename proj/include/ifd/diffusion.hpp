#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "ifd/common.hpp"
#include "ifd/rng.hpp"
#include "ifd/schedule.hpp"
#include "ifd/tensor.hpp"

namespace ifd {

struct GuidanceConfig {
    double drop_prob = 0.1;
    double strength = 1.0;
};

struct LossWeights {
    double lambda_vlb = 0.001;
};

// x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps
template <typename S>
void q_sample(const S* x0, const S* eps, size_t count, int t, const NoiseSchedule& sched, S* out) {
    const double ab = sched.alpha_bar[static_cast<size_t>(t)];
    const S a = static_cast<S>(std::sqrt(ab));
    const S b = static_cast<S>(std::sqrt(1.0 - ab));
    for (size_t i = 0; i < count; ++i) out[i] = a * x0[i] + b * eps[i];
}

template <typename S>
Tensor<S> q_sample(const Tensor<S>& x0, int t, const Tensor<S>& eps, const NoiseSchedule& sched) {
    require(x0.same_shape(eps), Errc::shape_mismatch, "x0 and eps shapes differ");
    Tensor<S> out(x0.n, x0.c, x0.h, x0.w);
    q_sample(x0.data.data(), eps.data.data(), x0.size(), t, sched, out.data.data());
    return out;
}

// Gaussian posterior q(x_{t-1} | x_t, x_0): mean per element plus the shared
// scalar variance beta_tilde_t.
template <typename S>
double posterior_mean_var(const S* x0, const S* xt, size_t count, int t, const NoiseSchedule& sched,
                          S* mean_out) {
    const S c0 = static_cast<S>(sched.posterior_coef_x0(t));
    const S ct = static_cast<S>(sched.posterior_coef_xt(t));
    for (size_t i = 0; i < count; ++i) mean_out[i] = c0 * x0[i] + ct * xt[i];
    return sched.posterior_var(t);
}

inline std::pair<double, double> posterior_mean_var(double x0, double xt, int t,
                                                    const NoiseSchedule& sched) {
    double mean = 0.0;
    const double var = posterior_mean_var(&x0, &xt, 1, t, sched, &mean);
    return {mean, var};
}

// mu_theta = (x_t - (1 - alpha_t)/sqrt(1 - abar_t) * eps_hat) / sqrt(alpha_t)
template <typename S>
void p_mean_from_eps(const S* xt, const S* eps_hat, size_t count, int t,
                     const NoiseSchedule& sched, S* out) {
    const double alpha = sched.alpha[static_cast<size_t>(t)];
    const double ab = sched.alpha_bar[static_cast<size_t>(t)];
    const S inv_sqrt_a = static_cast<S>(1.0 / std::sqrt(alpha));
    const S coef = static_cast<S>((1.0 - alpha) / std::sqrt(1.0 - ab));
    for (size_t i = 0; i < count; ++i) out[i] = inv_sqrt_a * (xt[i] - coef * eps_hat[i]);
}

inline double p_mean_from_eps(double xt, double eps_hat, int t, const NoiseSchedule& sched) {
    double out = 0.0;
    p_mean_from_eps(&xt, &eps_hat, 1, t, sched, &out);
    return out;
}

// eps_uncond + s (eps_cond - eps_uncond); s = 1 short-circuits to the
// conditional branch so "strength 1" is bit-exactly conditional sampling.
template <typename S>
Tensor<S> guided_eps(const Tensor<S>& eps_cond, const Tensor<S>& eps_uncond, double s) {
    require(eps_cond.same_shape(eps_uncond), Errc::shape_mismatch, "guidance shapes differ");
    if (s == 1.0) return eps_cond;
    if (s == 0.0) return eps_uncond;
    Tensor<S> out(eps_cond.n, eps_cond.c, eps_cond.h, eps_cond.w);
    const S sf = static_cast<S>(s);
    for (size_t i = 0; i < out.size(); ++i)
        out.data[i] = eps_uncond.data[i] + sf * (eps_cond.data[i] - eps_uncond.data[i]);
    return out;
}

// KL( N(mu_q, var_q) || N(mu_p, var_p) ) per dimension.
inline double gaussian_kl(double mu_q, double var_q, double mu_p, double var_p) {
    return 0.5 * (std::log(var_p / var_q) + (var_q + (mu_q - mu_p) * (mu_q - mu_p)) / var_p - 1.0);
}

struct HybridLoss {
    double total = 0.0;
    double simple = 0.0;
    double vlb = 0.0;
};

// Hybrid objective over a batch with per-element timesteps:
//   L_simple: MSE between eps and eps_hat over every element and pixel.
//   L_vlb per element, matched to its sampled t:
//     t == 1      -> Gaussian NLL of x0 under p(x0 | x1), variance beta_1
//     1 < t < T   -> KL( N(mu_tilde, beta_tilde) || N(mu_theta, beta_t) )
//     t == T      -> KL( q(x_T | x0) || N(0, I) )   (constant in theta)
// Variances are the fixed sigma_t^2 = beta_t; the VLB trains the mean
// jointly (no stop-gradient). Optionally accumulates d(total)/d(eps_hat).
template <typename S>
HybridLoss hybrid_loss(const Tensor<S>& x0, const std::vector<int>& t, const Tensor<S>& eps,
                       const Tensor<S>& eps_hat, const NoiseSchedule& sched,
                       const LossWeights& weights, Tensor<S>* d_eps_hat = nullptr) {
    require(x0.same_shape(eps) && x0.same_shape(eps_hat), Errc::shape_mismatch,
            "loss input shapes differ");
    require(static_cast<int>(t.size()) == x0.n, Errc::shape_mismatch, "t batch length mismatch");
    const int B = x0.n;
    const size_t D = static_cast<size_t>(x0.chw());
    if (d_eps_hat) {
        require(d_eps_hat->same_shape(x0), Errc::shape_mismatch, "gradient shape mismatch");
        d_eps_hat->zero();
    }

    HybridLoss loss;
    const double inv_bd = 1.0 / (static_cast<double>(B) * static_cast<double>(D));
    std::vector<double> mu_theta(D);

    for (int b = 0; b < B; ++b) {
        const int tb = t[b];
        require(tb >= 1 && tb <= sched.T, Errc::shape_mismatch,
                "t out of range: " + std::to_string(tb));
        const S* x0b = x0.sample(b);
        const S* eb = eps.sample(b);
        const S* ehb = eps_hat.sample(b);
        S* gb = d_eps_hat ? d_eps_hat->sample(b) : nullptr;

        for (size_t i = 0; i < D; ++i) {
            const double diff = static_cast<double>(ehb[i]) - static_cast<double>(eb[i]);
            loss.simple += diff * diff * inv_bd;
            if (gb) gb[i] += static_cast<S>(2.0 * diff * inv_bd);
        }

        const double beta = sched.beta[static_cast<size_t>(tb)];
        const double alpha = sched.alpha[static_cast<size_t>(tb)];
        const double ab = sched.alpha_bar[static_cast<size_t>(tb)];
        // d mu_theta / d eps_hat
        const double dmu_deps = -(1.0 - alpha) / (std::sqrt(alpha) * std::sqrt(1.0 - ab));

        double vlb_b = 0.0;
        if (tb == sched.T) {
            // prior term, no dependence on the model
            for (size_t i = 0; i < D; ++i) {
                const double m = std::sqrt(ab) * static_cast<double>(x0b[i]);
                vlb_b += gaussian_kl(m, 1.0 - ab, 0.0, 1.0);
            }
        } else {
            // mu_theta from the model's eps at this step
            const double sqrt_ab_coef = std::sqrt(ab);
            const double sig_coef = std::sqrt(1.0 - ab);
            for (size_t i = 0; i < D; ++i) {
                const double xt =
                    sqrt_ab_coef * static_cast<double>(x0b[i]) + sig_coef * static_cast<double>(eb[i]);
                mu_theta[i] =
                    (xt - (1.0 - alpha) / sig_coef * static_cast<double>(ehb[i])) / std::sqrt(alpha);
            }
            if (tb == 1) {
                // continuous Gaussian log-likelihood with variance beta_1
                const double log2pi = 1.8378770664093453;
                for (size_t i = 0; i < D; ++i) {
                    const double r = static_cast<double>(x0b[i]) - mu_theta[i];
                    vlb_b += 0.5 * (log2pi + std::log(beta)) + r * r / (2.0 * beta);
                    if (gb)
                        gb[i] += static_cast<S>(weights.lambda_vlb / B * (-r / beta) * dmu_deps);
                }
            } else {
                const double var_q = sched.posterior_var(tb);
                const double c0 = sched.posterior_coef_x0(tb);
                const double ct = sched.posterior_coef_xt(tb);
                for (size_t i = 0; i < D; ++i) {
                    const double xt = sqrt_ab_coef * static_cast<double>(x0b[i]) +
                                      sig_coef * static_cast<double>(eb[i]);
                    const double mu_q = c0 * static_cast<double>(x0b[i]) + ct * xt;
                    vlb_b += gaussian_kl(mu_q, var_q, mu_theta[i], beta);
                    if (gb)
                        gb[i] += static_cast<S>(weights.lambda_vlb / B *
                                                ((mu_theta[i] - mu_q) / beta) * dmu_deps);
                }
            }
        }
        loss.vlb += vlb_b / B;
    }

    loss.total = loss.simple + weights.lambda_vlb * loss.vlb;
    require(std::isfinite(loss.total), Errc::non_finite_loss, "hybrid loss is not finite");
    return loss;
}

// One denoiser evaluation for a whole batch; `conditional` selects between
// the context branch and the null-context branch.
using EpsModel = std::function<Tensor<float>(const Tensor<float>& x_t, int t, bool conditional)>;

struct SampleTrace {
    std::vector<int> steps;                 // which t values to snapshot
    std::vector<std::pair<int, Tensor<float>>> frames;  // filled by sample()
};

// Ancestral sampling loop, t = T..1, sigma_t = sqrt(beta_t), z = 0 at t = 1.
// Per-element RNG streams derived from (seed, element) keep batches
// reproducible under any parallel split. Output clamped to [-1, 1].
inline Tensor<float> sample(const EpsModel& model, int batch, const NoiseSchedule& sched,
                            const GuidanceConfig& guidance, std::uint64_t seed,
                            SampleTrace* trace = nullptr) {
    Tensor<float> x(batch, 1, 28, 28);
    std::vector<Rng> streams;
    streams.reserve(static_cast<size_t>(batch));
    for (int b = 0; b < batch; ++b) streams.emplace_back(derive_seed(seed, "sample", b));
    for (int b = 0; b < batch; ++b) {
        float* xb = x.sample(b);
        for (int i = 0; i < x.chw(); ++i) xb[i] = static_cast<float>(streams[b].normal());
    }

    for (int t = sched.T; t >= 1; --t) {
        Tensor<float> eps_c = model(x, t, true);
        Tensor<float> eps =
            (guidance.strength == 1.0) ? std::move(eps_c)
                                       : guided_eps(eps_c, model(x, t, false), guidance.strength);
        const double sigma = std::sqrt(sched.beta[static_cast<size_t>(t)]);
        for (int b = 0; b < batch; ++b) {
            float* xb = x.sample(b);
            const float* eb = eps.sample(b);
            p_mean_from_eps(xb, eb, static_cast<size_t>(x.chw()), t, sched, xb);
            if (t > 1) {
                for (int i = 0; i < x.chw(); ++i)
                    xb[i] += static_cast<float>(sigma * streams[b].normal());
            }
        }
        require(x.all_finite(), Errc::non_finite_state,
                "trajectory diverged at t=" + std::to_string(t));
        if (trace) {
            for (int s : trace->steps)
                if (s == t) trace->frames.emplace_back(t, x);
        }
    }
    for (auto& v : x.data) v = std::clamp(v, -1.0f, 1.0f);
    return x;
}

}  // namespace ifd
