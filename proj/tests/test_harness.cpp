#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "actmedia/harness.hpp"

using namespace actmedia;
using Catch::Approx;

TEST_CASE("power-law fit recovers an exact power law") {
    const PowerLawFit fit = fit_power_law({{10.0, 1.0},
                                           {100.0, 0.316227766016837933},
                                           {1000.0, 0.1}});
    CHECK(fit.slope == Approx(-0.5).margin(1e-9));
    CHECK(fit.r_squared == Approx(1.0).margin(1e-9));
}

TEST_CASE("power-law fit of flat data has zero slope") {
    const PowerLawFit fit = fit_power_law({{1.0, 0.7}, {2.0, 0.7}, {4.0, 0.7}});
    CHECK(fit.slope == Approx(0.0).margin(1e-12));
}

TEST_CASE("power-law fit is stable under small perturbations") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> noise(-0.01, 0.01);
    std::vector<std::pair<double, double>> pts;
    for (const double n : {1e2, 3e2, 1e3, 3e3, 1e4, 3e4, 1e5}) {
        pts.emplace_back(n, 3.0 * std::pow(n, -0.5) * (1.0 + noise(rng)));
    }
    const PowerLawFit fit = fit_power_law(pts);
    CHECK(fit.slope == Approx(-0.5).margin(0.02));
}

TEST_CASE("power-law fit rejects nonpositive inputs") {
    CHECK_THROWS_AS(fit_power_law({{1.0, 1.0}, {2.0, 0.0}, {3.0, 1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(fit_power_law({{1.0, 1.0}, {2.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("degenerate single-trial run produces a report without crashing") {
    ExperimentConfig config;
    config.probe = ProbeState{4.0, 0.0};
    config.gains_true = Gains{3.0, 0.0};
    config.eta = 0.6;
    config.n_data = 10;
    config.n_trials = 1;
    config.base_seed = 3;
    config.axis = SweepAxis::g2;
    config.sweep = {1.0};
    const ExperimentReport report = run_table(config);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].trials == 1);
}

TEST_CASE("table run aggregates a small ensemble") {
    ExperimentConfig config;
    config.probe = ProbeState{4.0, 0.0};
    config.gains_true = Gains{3.0, 0.0};
    config.eta = 0.6;
    config.n_data = 2000;
    config.n_trials = 8;
    config.base_seed = 10;
    config.axis = SweepAxis::g2;
    config.sweep = {1.0, 2.0};
    const ExperimentReport report = run_table(config);
    REQUIRE(report.rows.size() == 2);
    for (const auto& row : report.rows) {
        CHECK(row.trials == 8);
        CHECK(row.gains_true.g1 == 3.0);
        CHECK(std::abs(row.g1_mean - 3.0) < 0.5);
        CHECK(std::abs(row.g2_mean - row.sweep_value) < 0.5);
        CHECK(row.g1_std > 0.0);
        CHECK(row.g1_fisher > 0.0);
    }
}

TEST_CASE("report and plot CSV layout") {
    ExperimentReport report;
    report.base_seed = 42;
    ReportRow row;
    row.sweep_value = 1.0;
    row.gains_true = Gains{3.0, 1.0};
    row.g1_mean = 2.97;
    row.g1_std = 0.03;
    row.g1_fisher = 0.035;
    row.g2_mean = 0.97;
    row.g2_std = 0.033;
    row.g2_fisher = 0.033;
    row.g1_err = 0.02;
    row.g2_err = 0.025;
    row.trials = 50;
    report.rows.push_back(row);

    std::ostringstream os;
    write_report_csv(os, report);
    const std::string text = os.str();
    CHECK(text.find("sweep_value,g1_true,g2_true,g1_mean,g1_std,g1_fisher,"
                    "g2_mean,g2_std,g2_fisher,trials") != std::string::npos);
    CHECK(text.find("# base_seed=42") != std::string::npos);
    CHECK(text.find(",50\n") != std::string::npos);

    std::ostringstream plot;
    write_plot_csv(plot, report);
    CHECK(plot.str().rfind("x,y1,y1err,y2,y2err\n", 0) == 0);
}

TEST_CASE("eta sweep rejects out-of-range values") {
    ExperimentConfig config;
    config.axis = SweepAxis::eta;
    config.sweep = {0.5, 1.2};
    CHECK_THROWS_AS(run_eta_sweep(config), std::invalid_argument);
}

TEST_CASE("scaling run demands a wide enough sweep") {
    ExperimentConfig config;
    config.probe = ProbeState{4.0, 0.0};
    config.gains_true = Gains{3.0, 1.0};
    config.axis = SweepAxis::n_data;
    config.sweep = {1000, 2000, 3000, 4000};
    CHECK_THROWS_AS(run_n_scaling(config), std::invalid_argument);
}

TEST_CASE("scaling run on a reduced grid shows error decay") {
    ExperimentConfig config;
    config.probe = ProbeState{4.0, 0.0};
    config.gains_true = Gains{3.0, 1.0};
    config.eta = 0.6;
    config.n_trials = 5;
    config.base_seed = 100;
    config.axis = SweepAxis::n_data;
    config.sweep = {500, 2000, 8000, 32000};
    const ScalingReport result = run_n_scaling(config);
    REQUIRE(result.report.rows.size() == 4);
    CHECK(result.report.rows.front().g1_err > result.report.rows.back().g1_err);
    CHECK(result.g1_fit.slope < -0.2);
    CHECK(result.g2_fit.slope < -0.2);
}
