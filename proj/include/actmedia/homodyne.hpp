#pragma once

// Analytic homodyne probability density with efficiency correction, a
// seedable Monte Carlo sampler at uniformly random phases, and a
// quadrature-based oracle that rebuilds the density from the Wigner
// function.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "actmedia/channel.hpp"
#include "actmedia/quadrature.hpp"

namespace actmedia {

inline constexpr double kPi = 3.14159265358979323846;

/// Name of the RNG scheme recorded in Dataset metadata.  mt19937_64
/// uniforms mapped to (0,1] by a fixed bit shift, Gaussians via the
/// Box-Muller transform (two uniforms per variate, no rejection), so
/// replay from the seed is exact.
inline constexpr const char* kGeneratorName = "mt19937_64-boxmuller";

struct QuadratureSample {
    double phase = 0.0;  // local-oscillator phase, in [0, pi)
    double value = 0.0;  // homodyne outcome x
};

/// A homodyne data set together with everything needed to regenerate it
/// bit-for-bit: probe, channel config, and RNG seed.
struct Dataset {
    std::vector<QuadratureSample> samples;
    ProbeState probe;
    ChannelConfig config;
    std::uint64_t seed = 0;
    std::string generator = kGeneratorName;
};

/// Total variance parameter s^2 = delta^2 + g^2/2 + (1-eta)/(2 eta).
inline double total_variance_param(const DerivedChannel& channel, double eta) {
    if (!(eta > 0.0) || !(eta <= 1.0)) {
        throw std::invalid_argument("total_variance_param: eta must be in (0,1]");
    }
    return channel.s_sq + (1.0 - eta) / (2.0 * eta);
}

/// Mean homodyne outcome g * Re(alpha0 e^{-i phi}).
inline double homodyne_mean(const ProbeState& probe, double g, double phi) {
    return g * (probe.alpha_re * std::cos(phi) + probe.alpha_im * std::sin(phi));
}

inline double homodyne_logpdf(double x, double phi, const ProbeState& probe,
                              const Gains& gains, const ChannelConfig& config) {
    const DerivedChannel ch = derive_channel(gains, config.time);
    const double s_sq = total_variance_param(ch, config.eta);
    const double d = x - homodyne_mean(probe, ch.g, phi);
    return -0.5 * std::log(kPi * s_sq) - d * d / s_sq;
}

inline double homodyne_pdf(double x, double phi, const ProbeState& probe,
                           const Gains& gains, const ChannelConfig& config) {
    return std::exp(homodyne_logpdf(x, phi, probe, gains, config));
}

namespace detail {

// Uniform in (0, 1], full 53-bit resolution.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

// One standard normal per call; always consumes exactly two uniforms.
inline double standard_normal(std::mt19937_64& rng) {
    const double u1 = uniform_unit(rng);
    const double u2 = uniform_unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace detail

/// Draws n (phase, quadrature) pairs: phases i.i.d. uniform on [0, pi),
/// outcomes Gaussian with mean g Re(alpha0 e^{-i phi}) and variance s^2/2.
/// Deterministic given the seed.
inline Dataset sample_dataset(const ProbeState& probe, const ChannelConfig& config,
                              std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_dataset: n must be >= 1");
    if (!config.valid()) throw std::invalid_argument("sample_dataset: invalid config");

    const DerivedChannel ch = derive_channel(config.gains, config.time);
    const double s_sq = total_variance_param(ch, config.eta);
    const double sigma = std::sqrt(0.5 * s_sq);

    Dataset ds;
    ds.probe = probe;
    ds.config = config;
    ds.seed = seed;
    ds.samples.reserve(n);

    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < n; ++k) {
        const double phi = kPi * (detail::uniform_unit(rng) - 0x1.0p-53);  // [0, pi)
        const double x = homodyne_mean(probe, ch.g, phi) +
                         sigma * detail::standard_normal(rng);
        ds.samples.push_back(QuadratureSample{phi, x});
    }
    return ds;
}

/// Numerical oracle for homodyne_pdf: integrates the rotated output Wigner
/// function over Im(alpha), then applies the efficiency smearing as a 1-D
/// Gaussian convolution.  Throws if the quadrature does not converge to
/// 1e-8.
inline double wigner_marginal_numeric(const ProbeState& probe,
                                      const DerivedChannel& channel, double eta,
                                      double phi, double x) {
    if (!(eta > 0.0) || !(eta <= 1.0)) {
        throw std::invalid_argument("wigner_marginal_numeric: eta must be in (0,1]");
    }
    // Rotated center: the marginal at phase phi sees the Wigner function of
    // alpha e^{i phi}, a Gaussian centered at g alpha0 e^{-i phi}.
    const double c_re = channel.g * (probe.alpha_re * std::cos(phi) +
                                     probe.alpha_im * std::sin(phi));
    const double c_im = channel.g * (probe.alpha_im * std::cos(phi) -
                                     probe.alpha_re * std::sin(phi));
    const double sigma_w = std::sqrt(0.5 * channel.s_sq);

    const auto marginal = [&](double xx) {
        const auto integrand = [&](double y) {
            const double dre = xx - c_re;
            const double dim = y - c_im;
            return std::exp(-(dre * dre + dim * dim) / channel.s_sq) /
                   (kPi * channel.s_sq);
        };
        const IntegrationResult r = integrate_adaptive(
            integrand, c_im - 8.0 * sigma_w, c_im + 8.0 * sigma_w);
        if (r.error_estimate > 1e-8) {
            throw std::runtime_error("wigner_marginal_numeric: quadrature did not converge");
        }
        return r.value;
    };

    if (eta == 1.0) return marginal(x);

    // Efficiency smearing: convolution with a Gaussian of x-variance
    // (1-eta)/(4 eta), matching the additive term in the variance parameter.
    const double var_eta = (1.0 - eta) / (4.0 * eta);
    const double sigma_eta = std::sqrt(var_eta);
    const auto kernel_times_marginal = [&](double z) {
        return std::exp(-0.5 * z * z / var_eta) /
               std::sqrt(2.0 * kPi * var_eta) * marginal(x - z);
    };
    const IntegrationResult r = integrate_adaptive(
        kernel_times_marginal, -8.0 * sigma_eta, 8.0 * sigma_eta);
    if (r.error_estimate > 1e-8) {
        throw std::runtime_error("wigner_marginal_numeric: quadrature did not converge");
    }
    return r.value;
}

}  // namespace actmedia
