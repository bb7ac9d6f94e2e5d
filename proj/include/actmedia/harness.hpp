#pragma once

// Experiment runner: seeded Monte Carlo ensembles of sample -> fit cycles
// over parameter sweeps, with CSV report and plot-data emission.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "actmedia/channel.hpp"
#include "actmedia/estimator.hpp"
#include "actmedia/homodyne.hpp"

namespace actmedia {

inline constexpr const char* kArtifactVersion = "1.0.0";

enum class SweepAxis { none, n_data, eta, g2 };

struct ExperimentConfig {
    ProbeState probe;
    Gains gains_true;
    double time = 1.0;
    double eta = 1.0;
    std::size_t n_data = 10000;
    std::size_t n_trials = 50;
    std::uint64_t base_seed = 1;
    SweepAxis axis = SweepAxis::none;
    std::vector<double> sweep;   // sorted ascending when present
    FitOptions fit;
};

struct ReportRow {
    double sweep_value = 0.0;
    Gains gains_true;
    double g1_mean = 0.0, g1_std = 0.0, g1_fisher = 0.0;
    double g2_mean = 0.0, g2_std = 0.0, g2_fisher = 0.0;
    std::size_t trials = 0;     // successful trials aggregated in this row
    std::size_t excluded = 0;   // failed trials
    // Mean absolute estimation error per component; the quantity plotted
    // against N and eta.
    double g1_err = 0.0, g2_err = 0.0;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;
    std::uint64_t base_seed = 0;
    std::string generator = kGeneratorName;
    std::string version = kArtifactVersion;
};

struct PowerLawFit {
    double slope = 0.0;
    double intercept = 0.0;  // in log space
    double r_squared = 1.0;
};

/// Ordinary least squares on (log n, log err).
inline PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) {
        throw std::invalid_argument("fit_power_law: need at least 3 points");
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (const auto& [n, err] : points) {
        if (!(n > 0.0) || !(err > 0.0)) {
            throw std::invalid_argument("fit_power_law: values must be positive");
        }
        const double lx = std::log(n);
        const double ly = std::log(err);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    const double m = static_cast<double>(points.size());
    const double cov = sxy - sx * sy / m;
    const double var_x = sxx - sx * sx / m;
    const double var_y = syy - sy * sy / m;
    PowerLawFit fit;
    fit.slope = cov / var_x;
    fit.intercept = (sy - fit.slope * sx) / m;
    fit.r_squared = var_y > 0.0 ? cov * cov / (var_x * var_y) : 1.0;
    return fit;
}

namespace detail {

// One ensemble of independent sample -> fit cycles; trial i uses seed
// base_seed + i.
inline ReportRow run_ensemble(const ProbeState& probe, const Gains& gains_true,
                              double time, double eta, std::size_t n_data,
                              std::size_t n_trials, std::uint64_t base_seed,
                              const FitOptions& fit_options, double sweep_value) {
    ReportRow row;
    row.sweep_value = sweep_value;
    row.gains_true = gains_true;
    const ChannelConfig config{gains_true, time, eta};

    std::vector<FitResult> fits;
    fits.reserve(n_trials);
    for (std::size_t i = 0; i < n_trials; ++i) {
        const Dataset ds = sample_dataset(probe, config, n_data, base_seed + i);
        FitResult fit;
        try {
            fit = mle_fit(ds, fit_options);
        } catch (const std::exception&) {
            ++row.excluded;
            continue;
        }
        if (!fit.converged || !std::isfinite(fit.err.dg1) || !std::isfinite(fit.err.dg2)) {
            ++row.excluded;
            continue;
        }
        fits.push_back(fit);
    }
    row.trials = fits.size();
    if (fits.empty()) return row;

    const double m = static_cast<double>(fits.size());
    double m1 = 0, m2 = 0, f1 = 0, f2 = 0, e1 = 0, e2 = 0;
    for (const auto& fit : fits) {
        m1 += fit.gains_hat.g1;
        m2 += fit.gains_hat.g2;
        f1 += fit.err.dg1;
        f2 += fit.err.dg2;
        e1 += std::abs(fit.gains_hat.g1 - gains_true.g1);
        e2 += std::abs(fit.gains_hat.g2 - gains_true.g2);
    }
    row.g1_mean = m1 / m;
    row.g2_mean = m2 / m;
    row.g1_fisher = f1 / m;
    row.g2_fisher = f2 / m;
    row.g1_err = e1 / m;
    row.g2_err = e2 / m;

    double v1 = 0, v2 = 0;
    for (const auto& fit : fits) {
        v1 += (fit.gains_hat.g1 - row.g1_mean) * (fit.gains_hat.g1 - row.g1_mean);
        v2 += (fit.gains_hat.g2 - row.g2_mean) * (fit.gains_hat.g2 - row.g2_mean);
    }
    if (fits.size() > 1) {
        v1 /= (m - 1.0);
        v2 /= (m - 1.0);
    }
    row.g1_std = std::sqrt(v1);
    row.g2_std = std::sqrt(v2);
    return row;
}

inline void check_row_health(const ReportRow& row) {
    const std::size_t total = row.trials + row.excluded;
    if (total == 0 || row.excluded * 10 > total) {
        std::ostringstream msg;
        msg << "row at sweep value " << row.sweep_value << ": " << row.excluded
            << " of " << total << " trials failed (more than 10%)";
        throw std::runtime_error(msg.str());
    }
}

}  // namespace detail

/// Ensemble estimation at fixed G1 for each G2 in the sweep.
inline ExperimentReport run_table(const ExperimentConfig& config) {
    if (config.axis != SweepAxis::g2 || config.sweep.empty()) {
        throw std::invalid_argument("run_table: needs a g2 sweep");
    }
    ExperimentReport report;
    report.base_seed = config.base_seed;
    for (const double g2 : config.sweep) {
        const Gains gains{config.gains_true.g1, g2};
        ReportRow row = detail::run_ensemble(
            config.probe, gains, config.time, config.eta, config.n_data,
            config.n_trials, config.base_seed, config.fit, g2);
        detail::check_row_health(row);
        report.rows.push_back(row);
    }
    return report;
}

struct ScalingReport {
    ExperimentReport report;
    PowerLawFit g1_fit;
    PowerLawFit g2_fit;
};

/// Mean estimation error versus sample size N, with a log-log power-law
/// fit of the error decay per component.
inline ScalingReport run_n_scaling(const ExperimentConfig& config) {
    if (config.axis != SweepAxis::n_data || config.sweep.size() < 4) {
        throw std::invalid_argument("run_n_scaling: needs an n_data sweep with >= 4 points");
    }
    if (config.sweep.back() < config.sweep.front() * 31.6) {
        throw std::invalid_argument("run_n_scaling: sweep must span at least 1.5 decades");
    }
    ScalingReport out;
    out.report.base_seed = config.base_seed;
    std::vector<std::pair<double, double>> pts1, pts2;
    for (const double n : config.sweep) {
        const auto n_data = static_cast<std::size_t>(n);
        ReportRow row = detail::run_ensemble(
            config.probe, config.gains_true, config.time, config.eta, n_data,
            config.n_trials, config.base_seed, config.fit, n);
        detail::check_row_health(row);
        out.report.rows.push_back(row);
        // Fit the per-run statistical error (the quantity the study plots
        // against N), averaged over the ensemble.
        pts1.emplace_back(n, row.g1_fisher);
        pts2.emplace_back(n, row.g2_fisher);
    }
    out.g1_fit = fit_power_law(pts1);
    out.g2_fit = fit_power_law(pts2);
    return out;
}

/// Estimation error versus detector efficiency at fixed N.
inline ExperimentReport run_eta_sweep(const ExperimentConfig& config) {
    if (config.axis != SweepAxis::eta || config.sweep.empty()) {
        throw std::invalid_argument("run_eta_sweep: needs an eta sweep");
    }
    for (const double eta : config.sweep) {
        if (!(eta > 0.0) || !(eta <= 1.0)) {
            throw std::invalid_argument("run_eta_sweep: eta values must lie in (0,1]");
        }
    }
    ExperimentReport report;
    report.base_seed = config.base_seed;
    for (const double eta : config.sweep) {
        ReportRow row = detail::run_ensemble(
            config.probe, config.gains_true, config.time, eta, config.n_data,
            config.n_trials, config.base_seed, config.fit, eta);
        detail::check_row_health(row);
        report.rows.push_back(row);
    }
    return report;
}

namespace detail {

inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline void write_report_csv(std::ostream& os, const ExperimentReport& report) {
    os << "# base_seed=" << report.base_seed << "\n"
       << "# generator=" << report.generator << "\n"
       << "# version=" << report.version << "\n"
       << "sweep_value,g1_true,g2_true,g1_mean,g1_std,g1_fisher,"
          "g2_mean,g2_std,g2_fisher,trials\n";
    for (const auto& r : report.rows) {
        using detail::fmt_g;
        os << fmt_g(r.sweep_value) << "," << fmt_g(r.gains_true.g1) << ","
           << fmt_g(r.gains_true.g2) << "," << fmt_g(r.g1_mean) << ","
           << fmt_g(r.g1_std) << "," << fmt_g(r.g1_fisher) << ","
           << fmt_g(r.g2_mean) << "," << fmt_g(r.g2_std) << ","
           << fmt_g(r.g2_fisher) << "," << r.trials << "\n";
    }
}

/// Plot data: x is the sweep value, y the mean per-run statistical error
/// per component, and the error bar the ensemble spread of the estimates.
inline void write_plot_csv(std::ostream& os, const ExperimentReport& report) {
    os << "x,y1,y1err,y2,y2err\n";
    for (const auto& r : report.rows) {
        using detail::fmt_g;
        os << fmt_g(r.sweep_value) << "," << fmt_g(r.g1_fisher) << ","
           << fmt_g(r.g1_std) << "," << fmt_g(r.g2_fisher) << ","
           << fmt_g(r.g2_std) << "\n";
    }
}

/// Writes via a temp file renamed into place, so a failed run never leaves
/// a partial artifact.
template <class WriteFn>
void write_file_atomic(const std::string& path, const WriteFn& write_fn) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp);
        if (!os) throw std::runtime_error("cannot open '" + tmp + "' for writing");
        write_fn(os);
        if (!os) throw std::runtime_error("write to '" + tmp + "' failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw std::runtime_error("cannot rename '" + tmp + "' to '" + path + "'");
    }
}

}  // namespace actmedia
