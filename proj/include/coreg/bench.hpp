#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coreg/simulate.hpp"

namespace coreg {

/// Timing grids: sample-size sweep at fixed p and dimension sweep at fixed n.
struct BenchSpec {
    int fixed_p = 200;
    std::vector<int> n_values = {100, 200, 400, 600, 800, 1000};
    int fixed_n = 100;
    std::vector<int> p_values = {100, 200, 500, 1000, 2000};
    int replications = 20;
    double sigma2 = 0.5;
    double effect_size = 0.3;
    double alpha = 0.05;
    std::uint64_t seed = 20250810;
    std::vector<MethodTag> methods = {MethodTag::OLS, MethodTag::CoReg,
                                      MethodTag::SvdFactor};

    void validate() const {
        if (replications < 1) throw invalid_input("BenchSpec: replications < 1");
        if (methods.empty()) throw invalid_input("BenchSpec: no methods");
        for (int n : n_values)
            if (n < 20) throw invalid_input("BenchSpec: n too small");
        for (int p : p_values)
            if (p < 15) throw invalid_input("BenchSpec: p too small");
    }
};

struct BenchCell {
    std::string grid;  // "n" or "p"
    int p = 0;
    int n = 0;
    std::vector<double> mean_seconds;  // parallel to spec.methods
    double wall_seconds = 0.0;         // whole cell: generation + all fits
};

struct BenchReport {
    BenchSpec spec;
    std::vector<BenchCell> cells;

    /// Least-squares slope of log(seconds) on log(p) over the p-grid cells
    /// for one method; quantifies empirical scaling in the outcome dimension.
    double loglog_slope_p(MethodTag method) const {
        std::vector<double> xs, ys;
        for (const auto& cell : cells) {
            if (cell.grid != "p") continue;
            for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
                if (spec.methods[mi] == method && cell.mean_seconds[mi] > 0.0) {
                    xs.push_back(std::log(static_cast<double>(cell.p)));
                    ys.push_back(std::log(cell.mean_seconds[mi]));
                }
            }
        }
        if (xs.size() < 2) return 0.0;
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= xs.size();
        my /= ys.size();
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        return sxx > 0.0 ? sxy / sxx : 0.0;
    }
};

namespace detail {

/// Times one (p, n) cell. The exact block design (zero within-block jitter)
/// is PSD by construction, so the covariance and its factor are built once
/// per cell and only the per-replication draws and fits are timed.
inline BenchCell bench_cell(const BenchSpec& spec, const std::string& grid,
                            int p, int n, std::uint64_t cell_seed,
                            const RunOptions& options) {
    const auto cell_start = std::chrono::steady_clock::now();
    BenchCell cell;
    cell.grid = grid;
    cell.p = p;
    cell.n = n;
    cell.mean_seconds.assign(spec.methods.size(), 0.0);

    ScenarioSpec scenario;
    scenario.sigma_spec = BlockSigmaSpec::paper_design(p, spec.sigma2);
    scenario.sigma_spec.within_block_sd = 0.0;
    scenario.n = n;
    scenario.n_true_signals = p / 5;
    scenario.effect_size = spec.effect_size;
    scenario.n_replications = spec.replications;
    scenario.alpha = spec.alpha;
    scenario.master_seed = cell_seed;
    scenario.validate();

    RngStream sigma_rng(cell_seed, sigma_stream(0));
    const SymmetricMatrix sigma =
        generate_block_sigma(scenario.sigma_spec, sigma_rng);
    const MvnSampler sampler(Eigen::VectorXd::Zero(p), sigma);
    const GroundTruth truth = generate_truth(scenario);

    Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(p, scenario.q);
    for (int idx : truth.signal_indices) coef(idx, 1) = scenario.effect_size;

    for (int r = 0; r < spec.replications; ++r) {
        RngStream x_rng(cell_seed, x_stream(r));
        Eigen::MatrixXd predictor_rows = x_rng.normal_matrix(scenario.q - 1, n);
        Design design = Design::make(predictor_rows, {"x1"}, true);
        RngStream noise_rng(cell_seed, noise_stream(r));
        Eigen::MatrixXd y =
            coef * design.x() + sampler.sample(n, noise_rng).values();
        Dataset data{DataMatrix::vars_by_samples(std::move(y)),
                     std::move(design), truth};
        std::optional<int> coreg_k;
        for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
            MethodOutput out = run_method(spec.methods[mi], data, options,
                                          coreg_k, spec.alpha);
            if (spec.methods[mi] == MethodTag::CoReg) coreg_k = out.coreg_k;
            cell.mean_seconds[mi] += out.seconds;
        }
    }
    for (double& s : cell.mean_seconds) s /= spec.replications;
    cell.wall_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - cell_start)
                            .count();
    return cell;
}

}  // namespace detail

/// Runs both timing grids serially (timing fidelity beats parallel speed
/// here) and reports mean fit seconds per method per cell.
inline BenchReport run_bench(const BenchSpec& spec,
                             const RunOptions& options = {}) {
    spec.validate();
    BenchReport report;
    report.spec = spec;
    std::uint64_t cell_index = 0;
    for (int n : spec.n_values)
        report.cells.push_back(detail::bench_cell(
            spec, "n", spec.fixed_p, n, spec.seed + 1000 * cell_index++, options));
    for (int p : spec.p_values)
        report.cells.push_back(detail::bench_cell(
            spec, "p", p, spec.fixed_n, spec.seed + 1000 * cell_index++, options));
    return report;
}

}  // namespace coreg
