#pragma once

// Command-line experiment runner.  Subcommands: simulate, estimate, table,
// scaling, eta-sweep.  Exit codes: 0 success, 1 usage error, 2 data error,
// 3 fit-failure threshold exceeded.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "actmedia/dataset_io.hpp"
#include "actmedia/estimator.hpp"
#include "actmedia/harness.hpp"

namespace actmedia {

namespace detail {

struct PhysicalFlags {
    double g1 = 3.0;
    double g2 = 1.0;
    double alpha_re = 4.0;
    double alpha_im = 0.0;
    double eta = 0.6;
    double time = 1.0;
};

inline void add_physical_flags(CLI::App* cmd, PhysicalFlags& p) {
    cmd->add_option("--g1", p.g1, "absorption parameter G1");
    cmd->add_option("--g2", p.g2, "amplification parameter G2");
    cmd->add_option("--alpha", p.alpha_re, "probe amplitude, real part");
    cmd->add_option("--alpha-im", p.alpha_im, "probe amplitude, imaginary part");
    cmd->add_option("--eta", p.eta, "quantum efficiency in (0,1]");
    cmd->add_option("--t", p.time, "effective interaction time");
}

inline void emit_report(const ExperimentReport& report, const std::string& out,
                        const std::string& plot) {
    write_file_atomic(out, [&](std::ostream& os) { write_report_csv(os, report); });
    if (!plot.empty()) {
        write_file_atomic(plot, [&](std::ostream& os) { write_plot_csv(os, report); });
    }
}

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args,
                   std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"Homodyne characterization of absorbing/amplifying optical media"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file; flags override it");

    detail::PhysicalFlags phys;
    std::size_t n_data = 10000;
    std::size_t n_trials = 50;
    std::uint64_t seed = 1;
    std::string out_path;
    std::string plot_path;
    std::string in_path;
    std::vector<double> sweep;

    auto* simulate = app.add_subcommand("simulate", "generate a homodyne dataset CSV");
    detail::add_physical_flags(simulate, phys);
    simulate->add_option("--n", n_data, "number of samples");
    simulate->add_option("--seed", seed, "RNG seed");
    simulate->add_option("--out", out_path, "output dataset CSV")->required();

    auto* estimate = app.add_subcommand("estimate", "ML fit of (G1, G2) from a dataset CSV");
    estimate->add_option("--in", in_path, "input dataset CSV")->required();
    estimate->add_option("--out", out_path, "output fit-result file (default: stdout)");

    auto* table = app.add_subcommand("table", "ensemble estimation over a G2 sweep");
    detail::add_physical_flags(table, phys);
    table->add_option("--n", n_data, "samples per trial");
    table->add_option("--trials", n_trials, "trials per sweep point");
    table->add_option("--seed", seed, "base seed; trial i uses seed+i");
    table->add_option("--sweep", sweep, "G2 sweep values")->delimiter(',');
    table->add_option("--out", out_path, "output report CSV")->required();
    table->add_option("--plot", plot_path, "optional plot-data CSV");

    auto* scaling = app.add_subcommand("scaling", "error scaling versus sample size N");
    detail::add_physical_flags(scaling, phys);
    scaling->add_option("--trials", n_trials, "trials per sweep point");
    scaling->add_option("--seed", seed, "base seed");
    scaling->add_option("--sweep", sweep, "N sweep values")->delimiter(',');
    scaling->add_option("--out", out_path, "output report CSV")->required();
    scaling->add_option("--plot", plot_path, "optional plot-data CSV");

    auto* eta_sweep = app.add_subcommand("eta-sweep", "error versus detector efficiency");
    detail::add_physical_flags(eta_sweep, phys);
    eta_sweep->add_option("--n", n_data, "samples per trial");
    eta_sweep->add_option("--trials", n_trials, "trials per sweep point");
    eta_sweep->add_option("--seed", seed, "base seed");
    eta_sweep->add_option("--sweep", sweep, "eta sweep values")->delimiter(',');
    eta_sweep->add_option("--out", out_path, "output report CSV")->required();
    eta_sweep->add_option("--plot", plot_path, "optional plot-data CSV");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("actmedia");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    const auto probe = ProbeState{phys.alpha_re, phys.alpha_im};
    const auto gains = Gains{phys.g1, phys.g2};

    try {
        if (simulate->parsed()) {
            const ChannelConfig config{gains, phys.time, phys.eta};
            if (!config.valid()) {
                err << "error: invalid physical parameters\n";
                return 1;
            }
            const Dataset ds = sample_dataset(probe, config, n_data, seed);
            write_file_atomic(out_path, [&](std::ostream& os) { write_dataset(os, ds); });
            return 0;
        }

        if (estimate->parsed()) {
            Dataset ds;
            try {
                ds = read_dataset_file(in_path);
            } catch (const DatasetFormatError& e) {
                err << "error: " << in_path << ": " << e.what();
                if (e.line > 0) err << " (line " << e.line << ")";
                err << "\n";
                return 2;
            }
            const FitResult fit = mle_fit(ds);
            if (out_path.empty()) {
                write_fit_result(out, fit, ds.seed);
            } else {
                write_file_atomic(out_path, [&](std::ostream& os) {
                    write_fit_result(os, fit, ds.seed);
                });
            }
            return fit.converged ? 0 : 3;
        }

        ExperimentConfig config;
        config.probe = probe;
        config.gains_true = gains;
        config.time = phys.time;
        config.eta = phys.eta;
        config.n_data = n_data;
        config.n_trials = n_trials;
        config.base_seed = seed;

        if (table->parsed()) {
            config.axis = SweepAxis::g2;
            config.sweep = sweep.empty() ? std::vector<double>{1, 2, 3, 4, 5} : sweep;
            detail::emit_report(run_table(config), out_path, plot_path);
            return 0;
        }
        if (scaling->parsed()) {
            config.axis = SweepAxis::n_data;
            config.sweep = sweep.empty()
                               ? std::vector<double>{1000, 3000, 10000, 30000, 100000}
                               : sweep;
            if (scaling->count("--trials") == 0) config.n_trials = 20;
            const ScalingReport result = run_n_scaling(config);
            detail::emit_report(result.report, out_path, plot_path);
            out << "g1_slope=" << detail::fmt_g(result.g1_fit.slope) << "\n"
                << "g2_slope=" << detail::fmt_g(result.g2_fit.slope) << "\n";
            return 0;
        }
        if (eta_sweep->parsed()) {
            config.axis = SweepAxis::eta;
            config.sweep = sweep.empty()
                               ? std::vector<double>{0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}
                               : sweep;
            if (eta_sweep->count("--n") == 0) config.n_data = 5000;
            detail::emit_report(run_eta_sweep(config), out_path, plot_path);
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::runtime_error& e) {
        err << "error: " << e.what() << "\n";
        return std::string(e.what()).find("trials failed") != std::string::npos ? 3 : 2;
    }
    return 1;
}

}  // namespace actmedia
