#pragma once

// Closed-form Gaussian solution for propagation of a single optical mode
// through a linear absorbing/amplifying medium with rates (G1, G2).
//
// Conventions: x = Re(alpha), coherent-state quadrature variance 1/4.
// Homodyne conventions differ by factors of 2 between references; every
// formula in this library follows the normalization above.

#include <cmath>
#include <limits>
#include <stdexcept>

namespace actmedia {

/// Absorption (g1) and amplification (g2) rates, dimensionless per unit
/// effective time. The estimation target.
struct Gains {
    double g1 = 0.0;
    double g2 = 0.0;

    [[nodiscard]] bool valid() const {
        return std::isfinite(g1) && std::isfinite(g2) && g1 >= 0.0 && g2 >= 0.0;
    }
};

/// Coherent probe amplitude alpha0.
struct ProbeState {
    double alpha_re = 0.0;
    double alpha_im = 0.0;

    [[nodiscard]] double norm_sq() const {
        return alpha_re * alpha_re + alpha_im * alpha_im;
    }
};

/// Medium parameters plus interaction time t and detector efficiency eta.
struct ChannelConfig {
    Gains gains;
    double time = 1.0;   // effective interaction time, >= 0
    double eta = 1.0;    // quantum efficiency, in (0, 1]

    [[nodiscard]] bool valid() const {
        return gains.valid() && std::isfinite(time) && time >= 0.0 &&
               eta > 0.0 && eta <= 1.0;
    }
};

/// Derived channel descriptors at fixed interaction time.
///
/// q        decay rate Q = (G1 - G2) / 2
/// g        amplitude factor e^{-Qt}
/// delta_sq added-noise variance
/// s_sq     total pre-detection variance parameter delta_sq + g^2/2
/// gain_factor  propagation gain e^{(G2-G1) t} (= g^2)
struct DerivedChannel {
    double q = 0.0;
    double g = 1.0;
    double delta_sq = 0.0;
    double s_sq = 0.5;
    double gain_factor = 1.0;
};

namespace detail {

// (1 - e^{-2Qt}) / (4Q), switching to the Taylor expansion
// t/2 (1 - Qt + (2/3)(Qt)^2) when |Qt| is small enough that the direct
// expression cancels catastrophically.
inline double decay_variance_kernel(double q, double t) {
    const double qt = q * t;
    if (std::abs(qt) < 1e-6) {
        return 0.5 * t * (1.0 - qt + (2.0 / 3.0) * qt * qt);
    }
    return (1.0 - std::exp(-2.0 * qt)) / (4.0 * q);
}

}  // namespace detail

inline DerivedChannel derive_channel(const Gains& gains, double time) {
    if (!gains.valid() || !(time >= 0.0) || !std::isfinite(time)) {
        throw std::invalid_argument("derive_channel: invalid gains or time");
    }
    DerivedChannel ch;
    ch.q = 0.5 * (gains.g1 - gains.g2);
    ch.g = std::exp(-ch.q * time);
    ch.delta_sq = (gains.g1 + gains.g2) * detail::decay_variance_kernel(ch.q, time);
    ch.s_sq = ch.delta_sq + 0.5 * ch.g * ch.g;
    ch.gain_factor = std::exp((gains.g2 - gains.g1) * time);
    return ch;
}

/// Propagation gain (or deamplification) e^{(G2-G1) t}.
inline double propagation_gain(const Gains& gains, double time) {
    if (!gains.valid() || !(time >= 0.0) || !std::isfinite(time)) {
        throw std::invalid_argument("propagation_gain: invalid gains or time");
    }
    return std::exp((gains.g2 - gains.g1) * time);
}

/// Convenience mapping from atomic populations: G1 = gamma N1, G2 = gamma N2.
inline Gains gains_from_atoms(double gamma, double n1, double n2) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("gains_from_atoms: gamma must be positive");
    }
    if (!(n1 >= 0.0) || !(n2 >= 0.0)) {
        throw std::invalid_argument("gains_from_atoms: populations must be nonnegative");
    }
    return Gains{gamma * n1, gamma * n2};
}

/// Output Wigner function for a coherent probe: Gaussian centered at
/// g*alpha0 with width delta_sq + g^2/2, evaluated at point (re, im).
inline double output_wigner(const ProbeState& probe, const DerivedChannel& channel,
                            double point_re, double point_im) {
    const double width = channel.s_sq;
    const double dre = point_re - channel.g * probe.alpha_re;
    const double dim = point_im - channel.g * probe.alpha_im;
    const double pi = 3.14159265358979323846;
    return std::exp(-(dre * dre + dim * dim) / width) / (pi * width);
}

/// Result of the method-of-moments channel inversion.  `clamped` is set
/// whenever the observed moments were non-physical and a component (or the
/// implied delta_sq) was clamped to its boundary.
struct InvertedGains {
    Gains gains;
    bool clamped = false;
};

/// Recover (G1, G2) from an observed amplitude factor and total variance
/// parameter.  Exact inverse of the forward map wherever g != 1; the
/// balanced limit uses delta_sq = (G1+G2) t / 2.
inline InvertedGains invert_channel(double g_obs, double s_sq_obs, double time,
                                    double eta) {
    if (!(g_obs > 0.0) || !(time > 0.0) || !(eta > 0.0) || !(eta <= 1.0)) {
        throw std::invalid_argument("invert_channel: invalid moments or config");
    }
    InvertedGains out;
    const double diff = -2.0 * std::log(g_obs) / time;  // G1 - G2
    double delta_sq = s_sq_obs - 0.5 * g_obs * g_obs - (1.0 - eta) / (2.0 * eta);
    if (delta_sq < 0.0) {
        delta_sq = 0.0;
        out.clamped = true;
    }
    const double q = 0.5 * diff;
    double sum;  // G1 + G2
    if (std::abs(q * time) < 1e-6) {
        sum = delta_sq / detail::decay_variance_kernel(q, time);
    } else {
        sum = delta_sq * 4.0 * q / (1.0 - g_obs * g_obs);
    }
    double g1 = 0.5 * (sum + diff);
    double g2 = 0.5 * (sum - diff);
    if (g1 < 0.0) {
        g1 = 0.0;
        out.clamped = true;
    }
    if (g2 < 0.0) {
        g2 = 0.0;
        out.clamped = true;
    }
    out.gains = Gains{g1, g2};
    return out;
}

}  // namespace actmedia
