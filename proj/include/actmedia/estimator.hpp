#pragma once

// Log-likelihood over (G1, G2), constrained maximization with
// method-of-moments initialization, error bars from observed Fisher
// information, and a brute-force grid oracle.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "actmedia/channel.hpp"
#include "actmedia/homodyne.hpp"

namespace actmedia {

struct FitOptions {
    double tol_loglik = 1e-8;
    double tol_param = 1e-6;
    int max_iters = 2000;
    int restarts = 3;
};

struct FisherErrors {
    double dg1 = 0.0;
    double dg2 = 0.0;
    bool singular = false;   // observed information not positive definite
    bool boundary = false;   // estimate too close to the G >= 0 boundary
};

struct FitResult {
    Gains gains_hat;
    FisherErrors err;
    double loglik = -std::numeric_limits<double>::infinity();
    bool converged = false;
    int iters = 0;
    Gains init;
    bool init_clamped = false;   // moment initializer hit a physical boundary
    bool probe_weak = false;     // |alpha0| too small for the initializer
};

/// Direct evaluation of the log-likelihood: sum of per-sample log
/// densities.  Fixed left-to-right order, so the result is reproducible.
inline double log_likelihood(const Dataset& dataset, const Gains& gains) {
    if (dataset.samples.empty()) {
        throw std::invalid_argument("log_likelihood: empty dataset");
    }
    double sum = 0.0;
    for (const auto& s : dataset.samples) {
        sum += homodyne_logpdf(s.value, s.phase, dataset.probe, gains, dataset.config);
    }
    return sum;
}

/// Precomputed sufficient statistics for the Gaussian likelihood.  The
/// log-likelihood depends on the data only through n, sum x^2, sum x m and
/// sum m^2 with m_k = Re(alpha0 e^{-i phi_k}), which makes each evaluation
/// O(1) regardless of sample size.
class LikelihoodSurface {
public:
    explicit LikelihoodSurface(const Dataset& dataset)
        : time_(dataset.config.time), eta_(dataset.config.eta),
          n_(static_cast<double>(dataset.samples.size())) {
        if (dataset.samples.empty()) {
            throw std::invalid_argument("LikelihoodSurface: empty dataset");
        }
        for (const auto& s : dataset.samples) {
            const double m = dataset.probe.alpha_re * std::cos(s.phase) +
                             dataset.probe.alpha_im * std::sin(s.phase);
            sxx_ += s.value * s.value;
            sxm_ += s.value * m;
            smm_ += m * m;
        }
    }

    [[nodiscard]] double operator()(const Gains& gains) const {
        const DerivedChannel ch = derive_channel(gains, time_);
        const double s_sq = total_variance_param(ch, eta_);
        const double rss = sxx_ - 2.0 * ch.g * sxm_ + ch.g * ch.g * smm_;
        return -0.5 * n_ * std::log(kPi * s_sq) - rss / s_sq;
    }

    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(n_); }

private:
    double time_;
    double eta_;
    double n_;
    double sxx_ = 0.0;
    double sxm_ = 0.0;
    double smm_ = 0.0;
};

struct MomentInit {
    Gains gains;
    bool clamped = false;
    bool probe_weak = false;  // fell back to g = 1
};

/// Method-of-moments initializer: least-squares regression of x on
/// (cos phi, sin phi) estimates the amplitude factor g (the probe is
/// known); the residual variance estimates s^2/2; invert_channel maps both
/// back to (G1, G2).
inline MomentInit moment_init(const Dataset& dataset) {
    const std::size_t n = dataset.samples.size();
    if (n < 10) throw std::invalid_argument("moment_init: need at least 10 samples");

    double scc = 0, scs = 0, sss = 0, sxc = 0, sxs = 0, sxx = 0;
    for (const auto& s : dataset.samples) {
        const double c = std::cos(s.phase);
        const double sn = std::sin(s.phase);
        scc += c * c;
        scs += c * sn;
        sss += sn * sn;
        sxc += s.value * c;
        sxs += s.value * sn;
        sxx += s.value * s.value;
    }

    MomentInit out;
    const ProbeState& probe = dataset.probe;
    const double probe_sq = probe.norm_sq();

    double g_est = 1.0;
    double rss = sxx;
    if (probe_sq < 1e-12) {
        out.probe_weak = true;  // mean carries no information about g
    } else {
        const double det = scc * sss - scs * scs;
        double a, b;
        if (std::abs(det) > 1e-12 * n * n) {
            a = (sss * sxc - scs * sxs) / det;
            b = (scc * sxs - scs * sxc) / det;
        } else {
            // Degenerate phase design (all phases equal): single regressor.
            a = sxc / std::max(scc, 1e-300);
            b = 0.0;
        }
        g_est = (a * probe.alpha_re + b * probe.alpha_im) / probe_sq;
        rss = sxx - 2.0 * (a * sxc + b * sxs) +
              a * a * scc + 2.0 * a * b * scs + b * b * sss;
        if (!(g_est > 0.0)) {
            g_est = 1e-6;
            out.clamped = true;
        }
        if (rss < 0.0) rss = 0.0;
    }

    const double s_sq_est = 2.0 * rss / static_cast<double>(n);
    const InvertedGains inv = invert_channel(
        g_est, std::max(s_sq_est, 1e-12), dataset.config.time, dataset.config.eta);
    out.gains = inv.gains;
    out.clamped = out.clamped || inv.clamped;
    return out;
}

/// Observed information matrix -d^2 L / dG_i dG_j by central finite
/// differences.  `step_scale` is the relative step (default 1e-4 with an
/// absolute floor of the same size).
inline std::array<double, 4> observed_information(const Dataset& dataset,
                                                  const Gains& gains_hat,
                                                  double step_scale = 1e-4) {
    const LikelihoodSurface lik(dataset);
    const double h1 = step_scale * std::max(1.0, gains_hat.g1);
    const double h2 = step_scale * std::max(1.0, gains_hat.g2);

    const auto at = [&](double d1, double d2) {
        return lik(Gains{gains_hat.g1 + d1, gains_hat.g2 + d2});
    };

    const double f0 = at(0, 0);
    const double d11 = (at(h1, 0) - 2.0 * f0 + at(-h1, 0)) / (h1 * h1);
    const double d22 = (at(0, h2) - 2.0 * f0 + at(0, -h2)) / (h2 * h2);
    const double d12 = (at(h1, h2) - at(h1, -h2) - at(-h1, h2) + at(-h1, -h2)) /
                       (4.0 * h1 * h2);
    return {-d11, -d12, -d12, -d22};
}

inline FisherErrors fisher_errors(const Dataset& dataset, const Gains& gains_hat,
                                  double step_scale = 1e-4) {
    FisherErrors out;
    const double h1 = step_scale * std::max(1.0, gains_hat.g1);
    const double h2 = step_scale * std::max(1.0, gains_hat.g2);
    if (gains_hat.g1 <= 10.0 * h1 || gains_hat.g2 <= 10.0 * h2) {
        out.boundary = true;
        out.dg1 = out.dg2 = std::numeric_limits<double>::infinity();
        return out;
    }
    const std::array<double, 4> info = observed_information(dataset, gains_hat, step_scale);
    const double det = info[0] * info[3] - info[1] * info[2];
    if (!(det > 0.0) || !(info[0] > 0.0)) {
        out.singular = true;
        out.dg1 = out.dg2 = std::numeric_limits<double>::infinity();
        return out;
    }
    out.dg1 = std::sqrt(info[3] / det);
    out.dg2 = std::sqrt(info[0] / det);
    return out;
}

namespace detail {

// Nelder-Mead on a 2-D objective; minimizes f.  Returns the best vertex.
struct SimplexResult {
    std::array<double, 2> x;
    double f;
    int iters;
    bool converged;
};

template <class Func>
SimplexResult nelder_mead_2d(const Func& f, std::array<double, 2> x0,
                                   double step, double tol_f, double tol_x,
                                   int max_iters) {
    struct Vertex {
        std::array<double, 2> x;
        double f;
    };
    std::array<Vertex, 3> v;
    v[0] = {x0, f(x0)};
    v[1] = {{x0[0] + step, x0[1]}, 0.0};
    v[1].f = f(v[1].x);
    v[2] = {{x0[0], x0[1] + step}, 0.0};
    v[2].f = f(v[2].x);

    const auto order = [&] {
        std::sort(v.begin(), v.end(),
                  [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    };

    int iters = 0;
    bool converged = false;
    for (; iters < max_iters; ++iters) {
        order();
        const double f_spread = std::abs(v[2].f - v[0].f);
        const double x_spread = std::max(
            std::max(std::abs(v[1].x[0] - v[0].x[0]), std::abs(v[2].x[0] - v[0].x[0])),
            std::max(std::abs(v[1].x[1] - v[0].x[1]), std::abs(v[2].x[1] - v[0].x[1])));
        if (f_spread < tol_f && x_spread < tol_x) {
            converged = true;
            break;
        }

        const std::array<double, 2> centroid{0.5 * (v[0].x[0] + v[1].x[0]),
                                             0.5 * (v[0].x[1] + v[1].x[1])};
        const auto along = [&](double coef) {
            return std::array<double, 2>{centroid[0] + coef * (v[2].x[0] - centroid[0]),
                                         centroid[1] + coef * (v[2].x[1] - centroid[1])};
        };

        const std::array<double, 2> xr = along(-1.0);
        const double fr = f(xr);
        if (fr < v[0].f) {
            const std::array<double, 2> xe = along(-2.0);
            const double fe = f(xe);
            v[2] = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
        } else if (fr < v[1].f) {
            v[2] = {xr, fr};
        } else {
            const bool outside = fr < v[2].f;
            const std::array<double, 2> xc = along(outside ? -0.5 : 0.5);
            const double fc = f(xc);
            if (fc < std::min(fr, v[2].f)) {
                v[2] = {xc, fc};
            } else {
                // Shrink toward the best vertex.
                for (int i = 1; i < 3; ++i) {
                    v[i].x = {0.5 * (v[i].x[0] + v[0].x[0]),
                              0.5 * (v[i].x[1] + v[0].x[1])};
                    v[i].f = f(v[i].x);
                }
            }
        }
    }
    order();
    return {v[0].x, v[0].f, iters, converged};
}

}  // namespace detail

/// Maximizes the log-likelihood over (G1, G2) >= 0 by Nelder-Mead in
/// log-transformed coordinates, started from the moment initializer plus
/// perturbed restarts.  Fisher error bars are attached to the result.
inline FitResult mle_fit(const Dataset& dataset, const FitOptions& options = {}) {
    if (dataset.samples.size() < 4) {
        throw std::invalid_argument("mle_fit: degenerate dataset (fewer than 4 samples)");
    }

    FitResult result;
    if (dataset.samples.size() >= 10) {
        const MomentInit init = moment_init(dataset);
        result.init = init.gains;
        result.init_clamped = init.clamped;
        result.probe_weak = init.probe_weak;
    } else {
        result.init = Gains{1.0, 1.0};
    }

    const LikelihoodSurface lik(dataset);
    constexpr double kLogFloor = 1e-12;
    const auto to_gains = [](const std::array<double, 2>& u) {
        const double g1 = std::exp(std::min(u[0], 50.0)) - kLogFloor;
        const double g2 = std::exp(std::min(u[1], 50.0)) - kLogFloor;
        return Gains{std::max(g1, 0.0), std::max(g2, 0.0)};
    };
    const auto objective = [&](const std::array<double, 2>& u) {
        return -lik(to_gains(u));
    };

    // Deterministic +/-20% multiplicative jitter pattern for restarts.
    static constexpr double kJitter[][2] = {
        {1.0, 1.0}, {1.2, 0.8}, {0.8, 1.2}, {1.2, 1.2}, {0.8, 0.8},
        {1.2, 1.0}, {0.8, 1.0}, {1.0, 1.2}, {1.0, 0.8}};
    const int n_starts = std::min(1 + std::max(options.restarts, 0),
                                  static_cast<int>(std::size(kJitter)));

    double best_f = std::numeric_limits<double>::infinity();
    std::array<double, 2> best_u{0.0, 0.0};
    int total_iters = 0;
    bool any_converged = false;
    for (int i = 0; i < n_starts; ++i) {
        const std::array<double, 2> u0{
            std::log(result.init.g1 * kJitter[i][0] + kLogFloor),
            std::log(result.init.g2 * kJitter[i][1] + kLogFloor)};
        const auto run = detail::nelder_mead_2d(
            objective, u0, 0.1, options.tol_loglik, options.tol_param,
            options.max_iters);
        total_iters += run.iters;
        if (run.f < best_f) {
            best_f = run.f;
            best_u = run.x;
            any_converged = run.converged;
        }
    }

    result.gains_hat = to_gains(best_u);
    result.loglik = -best_f;
    // The initializer itself stays a candidate, so a converged fit can
    // never report a lower log-likelihood than its starting point.
    const double init_ll = lik(result.init);
    if (init_ll > result.loglik) {
        result.gains_hat = result.init;
        result.loglik = init_ll;
    }
    result.iters = total_iters;
    result.converged = any_converged;
    result.err = fisher_errors(dataset, result.gains_hat);
    return result;
}

/// Exhaustive log-likelihood maximization on a (steps x steps) grid.
/// Ties break toward smaller G1, then smaller G2.
inline Gains grid_search_oracle(const Dataset& dataset, const Gains& lo,
                                const Gains& hi, int steps) {
    if (steps < 2) throw std::invalid_argument("grid_search_oracle: steps must be >= 2");
    if (!(lo.g1 < hi.g1) || !(lo.g2 < hi.g2)) {
        throw std::invalid_argument("grid_search_oracle: need lo < hi componentwise");
    }
    const LikelihoodSurface lik(dataset);
    Gains best = lo;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < steps; ++i) {
        const double g1 = lo.g1 + (hi.g1 - lo.g1) * i / (steps - 1);
        for (int j = 0; j < steps; ++j) {
            const double g2 = lo.g2 + (hi.g2 - lo.g2) * j / (steps - 1);
            const double ll = lik(Gains{g1, g2});
            if (ll > best_ll) {
                best_ll = ll;
                best = Gains{g1, g2};
            }
        }
    }
    return best;
}

/// Flat key=value block for harness consumption.
inline void write_fit_result(std::ostream& os, const FitResult& r,
                             std::uint64_t seed) {
    char buf[40];
    const auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    os << "g1_hat=" << fmt(r.gains_hat.g1) << "\n"
       << "g2_hat=" << fmt(r.gains_hat.g2) << "\n"
       << "dg1=" << fmt(r.err.dg1) << "\n"
       << "dg2=" << fmt(r.err.dg2) << "\n"
       << "loglik=" << fmt(r.loglik) << "\n"
       << "converged=" << (r.converged ? 1 : 0) << "\n"
       << "iters=" << r.iters << "\n"
       << "seed=" << seed << "\n";
}

}  // namespace actmedia
