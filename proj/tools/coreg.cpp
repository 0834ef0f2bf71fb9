// coreg: CLI for co-expression network guided multivariate regression.
//
// Subcommands: fit, network, simulate, replicability, bench.
// Exit codes: 0 success, 2 user/config error, 3 numerical/model failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "coreg/coreg.hpp"

namespace fs = std::filesystem;
using coreg::json;

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<double> alpha;
    std::vector<double> lambda_grid;
    std::vector<std::string> methods;
    int threads = 0;  // 0 = COREG_THREADS env, then 1
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool needs_config = true) {
    auto* opt = cmd->add_option("--config", flags.config_path,
                                "JSON configuration file");
    if (needs_config) opt->required();
    cmd->add_option("--seed", flags.seed, "Master seed override");
    cmd->add_option("--out", flags.out_dir, "Output directory override");
    cmd->add_option("--alpha", flags.alpha, "BH level override");
    cmd->add_option("--lambda-grid", flags.lambda_grid,
                    "Comma-separated lambda grid override")
        ->delimiter(',');
    cmd->add_option("--methods", flags.methods,
                    "Comma-separated methods (ols, svd, coreg)")
        ->delimiter(',');
    cmd->add_option("--threads", flags.threads,
                    "Worker threads (default: COREG_THREADS env or 1)");
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw coreg::io_error("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw coreg::io_error("config " + path + " is not valid JSON: " + e.what());
    }
    return j;
}

fs::path resolve_out_dir(const json& config, const CommonFlags& flags) {
    std::string dir = config.value("out_dir", std::string("coreg_out"));
    if (flags.out_dir) dir = *flags.out_dir;
    return fs::path(dir);
}

coreg::FactorOptions factor_options(const json& config, const CommonFlags& flags) {
    coreg::FactorOptions opts;
    if (config.contains("lambda_grid"))
        opts.lambda_grid = config.at("lambda_grid").get<std::vector<double>>();
    if (!flags.lambda_grid.empty()) opts.lambda_grid = flags.lambda_grid;
    for (double l : opts.lambda_grid)
        if (!(l > 1.0) || !(l <= 2.0))
            throw coreg::invalid_input("lambda grid value " + std::to_string(l) +
                                       " outside the valid range (1, 2]");
    opts.acceptance_threshold = config.value("tau", 0.05);
    const std::string norm = config.value("norm", std::string("spectral"));
    if (norm == "spectral")
        opts.norm = coreg::ReconstructionNorm::Spectral;
    else if (norm == "frobenius")
        opts.norm = coreg::ReconstructionNorm::Frobenius;
    else
        throw coreg::invalid_input("norm must be 'spectral' or 'frobenius'");
    const std::string style = config.value("loading_style", std::string("binary"));
    if (style == "binary")
        opts.style = coreg::LoadingStyle::Binary;
    else if (style == "eigenvector")
        opts.style = coreg::LoadingStyle::Eigenvector;
    else
        throw coreg::invalid_input("loading_style must be 'binary' or 'eigenvector'");
    return opts;
}

std::vector<coreg::MethodTag> resolve_methods(const json& config,
                                              const CommonFlags& flags) {
    std::vector<std::string> names = {"ols", "coreg", "svd"};
    if (config.contains("methods"))
        names = config.at("methods").get<std::vector<std::string>>();
    if (!flags.methods.empty()) names = flags.methods;
    return coreg::parse_methods(names);
}

coreg::RunOptions run_options(const json& config, const CommonFlags& flags) {
    coreg::RunOptions options;
    options.factor = factor_options(config, flags);
    options.threads = flags.threads > 0 ? flags.threads
                                        : config.value("threads", 0);
    if (config.contains("svd_factors"))
        options.svd_factors = config.at("svd_factors").get<int>();
    return options;
}

void write_json(const fs::path& path, const json& j) {
    coreg::atomic_write(path, j.dump(2) + "\n");
}

/// Loads the samples-by-columns CSV named in the config and splits it into
/// outcomes (p x n) and a design with intercept.
struct FitInput {
    coreg::DataMatrix outcomes;
    coreg::Design design;
    std::vector<std::string> outcome_names;
};

FitInput load_fit_input(const json& config, bool predictors_required) {
    if (!config.contains("input"))
        throw coreg::invalid_input("config is missing 'input' (CSV path)");
    const coreg::CsvTable table = coreg::read_csv(config.at("input").get<std::string>());

    std::vector<std::string> predictor_names;
    if (config.contains("predictors"))
        predictor_names = config.at("predictors").get<std::vector<std::string>>();
    if (predictors_required && predictor_names.empty())
        throw coreg::invalid_input("config names no predictor columns");

    std::vector<std::string> outcome_names;
    if (config.contains("outcomes") && !config.at("outcomes").empty()) {
        outcome_names = config.at("outcomes").get<std::vector<std::string>>();
    } else {
        for (const auto& col : table.columns) {
            if (std::find(predictor_names.begin(), predictor_names.end(), col) ==
                predictor_names.end())
                outcome_names.push_back(col);
        }
    }
    if (outcome_names.empty())
        throw coreg::invalid_input("no outcome columns left after removing predictors");

    const Eigen::Index n = table.values.rows();
    Eigen::MatrixXd predictor_rows(
        static_cast<Eigen::Index>(predictor_names.size()), n);
    for (std::size_t i = 0; i < predictor_names.size(); ++i)
        predictor_rows.row(static_cast<Eigen::Index>(i)) =
            table.values.col(table.column_index(predictor_names[i])).transpose();

    Eigen::MatrixXd y(static_cast<Eigen::Index>(outcome_names.size()), n);
    for (std::size_t i = 0; i < outcome_names.size(); ++i)
        y.row(static_cast<Eigen::Index>(i)) =
            table.values.col(table.column_index(outcome_names[i])).transpose();

    coreg::Design design =
        coreg::Design::make(predictor_rows, predictor_names, true);
    return FitInput{coreg::DataMatrix::vars_by_samples(std::move(y)),
                    std::move(design), std::move(outcome_names)};
}

// ---- subcommands -----------------------------------------------------------

int cmd_fit(const CommonFlags& flags) {
    const json config = load_config(flags.config_path);
    const fs::path out = resolve_out_dir(config, flags);
    const double alpha = flags.alpha.value_or(config.value("alpha", 0.05));
    const coreg::FactorOptions opts = factor_options(config, flags);

    FitInput input = load_fit_input(config, true);
    coreg::CoRegAnalysis analysis = coreg::run_coreg(
        input.outcomes, input.design, opts, alpha, input.outcome_names);

    coreg::atomic_write(out / "inference.csv",
                        coreg::inference_to_csv(analysis.inference));

    json summary = coreg::inference_summary_json(analysis.inference);
    summary["fell_back_to_ols"] = analysis.fell_back_to_ols;
    summary["n_samples"] = static_cast<int>(input.outcomes.n_samples());

    coreg::render_heatmap(analysis.residual_corr, std::nullopt,
                          out / "heatmap_residual_corr.svg",
                          "residual correlation");
    if (analysis.selection) {
        summary["lambda_star"] = analysis.selection->lambda_star;
        summary["K"] = analysis.selection->model.loadings.k();
        write_json(out / "modules.json",
                   coreg::selection_to_json(*analysis.selection));
        const std::vector<int> perm = coreg::reorder_permutation(
            analysis.selection->model.loadings.partition);
        coreg::render_heatmap(analysis.residual_corr, perm,
                              out / "heatmap_residual_corr_reordered.svg",
                              "residual correlation, reordered by modules");
    } else {
        write_json(out / "modules.json",
                   json{{"modules", json::array()},
                        {"singletons", json::array()},
                        {"note", "no modules passed acceptance; OLS fallback"}});
        coreg::render_heatmap(analysis.residual_corr, std::nullopt,
                              out / "heatmap_residual_corr_reordered.svg",
                              "residual correlation (no modules found)");
    }
    write_json(out / "summary.json", summary);
    std::cout << "fit: wrote " << out.string() << "\n";
    return 0;
}

int cmd_network(const CommonFlags& flags) {
    const json config = load_config(flags.config_path);
    const fs::path out = resolve_out_dir(config, flags);
    const coreg::FactorOptions opts = factor_options(config, flags);

    FitInput input = load_fit_input(config, false);
    coreg::RegressionFit step1 = coreg::fit_ols(input.outcomes, input.design);
    auto [cov, corr] = coreg::residual_dependence(step1);
    coreg::render_heatmap(corr, std::nullopt, out / "heatmap_residual_corr.svg",
                          "residual correlation");

    coreg::SelectionResult sel = coreg::select_lambda(cov, step1.residuals, opts);
    write_json(out / "modules.json", coreg::selection_to_json(sel));
    const std::vector<int> perm =
        coreg::reorder_permutation(sel.model.loadings.partition);
    coreg::render_heatmap(corr, perm, out / "heatmap_residual_corr_reordered.svg",
                          "residual correlation, reordered by modules");
    std::cout << "network: wrote " << out.string() << "\n";
    return 0;
}

std::string cell_tag(const coreg::ScenarioSpec& spec) {
    std::ostringstream tag;
    tag << "n" << spec.n << "_sigma" << spec.sigma_spec.noise_scale;
    return tag.str();
}

int cmd_simulate(const CommonFlags& flags) {
    const json config = load_config(flags.config_path);
    const fs::path out = resolve_out_dir(config, flags);
    if (!config.contains("scenario"))
        throw coreg::invalid_input("config is missing 'scenario'");
    coreg::ScenarioSpec base = coreg::scenario_from_json(config.at("scenario"));
    if (flags.seed) base.master_seed = *flags.seed;
    if (flags.alpha) base.alpha = *flags.alpha;
    const std::vector<coreg::MethodTag> methods = resolve_methods(config, flags);
    const coreg::RunOptions options = run_options(config, flags);

    std::vector<int> n_grid = {base.n};
    std::vector<double> sigma_grid = {base.sigma_spec.noise_scale};
    if (config.contains("grid")) {
        const json& grid = config.at("grid");
        if (grid.contains("n")) n_grid = grid.at("n").get<std::vector<int>>();
        if (grid.contains("sigma2"))
            sigma_grid = grid.at("sigma2").get<std::vector<double>>();
    }

    json cells = json::array();
    for (double sigma2 : sigma_grid) {
        for (int n : n_grid) {
            coreg::ScenarioSpec spec = base;
            spec.n = n;
            spec.sigma_spec.noise_scale = sigma2;
            spec.validate();
            const coreg::ScenarioReport report =
                coreg::run_scenario(spec, methods, options);
            const std::string tag = cell_tag(spec);
            coreg::atomic_write(out / ("replications_" + tag + ".csv"),
                                coreg::scenario_rows_to_csv(report));
            for (const auto& agg : report.aggregates) {
                const std::string method = coreg::method_name(agg.method);
                coreg::atomic_write(out / ("roc_" + method + "_" + tag + ".csv"),
                                    coreg::mean_roc_to_csv(agg));
                coreg::render_roc({{method, agg.mean_roc}},
                                  out / ("roc_" + method + "_" + tag + ".svg"),
                                  method + " mean ROC, " + tag);
            }
            json cell = coreg::scenario_report_to_json(report);
            cell["tag"] = tag;
            cells.push_back(std::move(cell));
            std::cout << "simulate: finished cell " << tag << "\n";
        }
    }
    write_json(out / "aggregate.json", json{{"cells", cells}});
    std::cout << "simulate: wrote " << out.string() << "\n";
    return 0;
}

int cmd_replicability(const CommonFlags& flags) {
    const json config = load_config(flags.config_path);
    const fs::path out = resolve_out_dir(config, flags);
    if (!config.contains("arm1") || !config.contains("arm2"))
        throw coreg::invalid_input("config needs 'arm1' and 'arm2' scenarios");
    coreg::ScenarioSpec arm1 = coreg::scenario_from_json(config.at("arm1"));
    coreg::ScenarioSpec arm2 = coreg::scenario_from_json(config.at("arm2"));
    std::uint64_t truth_seed =
        config.value("shared_truth_seed", static_cast<std::uint64_t>(arm1.master_seed));
    if (flags.seed) {
        arm1.master_seed = *flags.seed;
        arm2.master_seed = *flags.seed + 1;
        truth_seed = *flags.seed;
    }
    if (flags.alpha) {
        arm1.alpha = *flags.alpha;
        arm2.alpha = *flags.alpha;
    }
    const std::vector<coreg::MethodTag> methods = resolve_methods(config, flags);
    const coreg::RunOptions options = run_options(config, flags);

    const coreg::ReplicabilityReport report =
        coreg::run_replicability(arm1, arm2, truth_seed, methods, options);
    write_json(out / "venn.json", coreg::replicability_report_to_json(report));
    coreg::atomic_write(out / "replications.csv",
                        coreg::replicability_rows_to_csv(report));

    std::vector<coreg::VennRow> rows;
    for (const auto& agg : report.aggregates) {
        const double total = std::max(report.arm1.n_true_signals, 1);
        rows.push_back({coreg::method_name(agg.method), agg.mean_only1,
                        agg.mean_intersection, agg.mean_only2,
                        agg.mean_only1 / total, agg.prop_intersection,
                        agg.mean_only2 / total});
    }
    coreg::render_venn_panel(rows, out / "venn.svg",
                             "mean true-positive overlap across replications");
    std::cout << "replicability: wrote " << out.string() << "\n";
    return 0;
}

int cmd_bench(const CommonFlags& flags) {
    const json config = load_config(flags.config_path);
    const fs::path out = resolve_out_dir(config, flags);
    coreg::BenchSpec spec = coreg::bench_from_json(config);
    if (flags.seed) spec.seed = *flags.seed;
    if (flags.alpha) spec.alpha = *flags.alpha;
    if (!flags.methods.empty()) spec.methods = coreg::parse_methods(flags.methods);
    const coreg::RunOptions options = run_options(config, flags);

    const coreg::BenchReport report = coreg::run_bench(spec, options);
    write_json(out / "bench.json", coreg::bench_report_to_json(report));
    coreg::atomic_write(out / "bench.csv", coreg::bench_report_to_csv(report));
    std::cout << "bench: wrote " << out.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CoReg: co-expression network guided multivariate regression"};
    app.require_subcommand(1);

    CommonFlags fit_flags, network_flags, sim_flags, rep_flags, bench_flags;
    CLI::App* fit = app.add_subcommand(
        "fit", "Fit CoReg to a CSV dataset and run inference");
    add_common_flags(fit, fit_flags);
    CLI::App* network = app.add_subcommand(
        "network", "Extract co-expression modules only");
    add_common_flags(network, network_flags);
    CLI::App* simulate = app.add_subcommand(
        "simulate", "Run the block-covariance simulation benchmark");
    add_common_flags(simulate, sim_flags);
    CLI::App* replicability = app.add_subcommand(
        "replicability", "Run the two-laboratory replicability experiment");
    add_common_flags(replicability, rep_flags);
    CLI::App* bench = app.add_subcommand(
        "bench", "Run the timing grids");
    add_common_flags(bench, bench_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (fit->parsed()) return cmd_fit(fit_flags);
        if (network->parsed()) return cmd_network(network_flags);
        if (simulate->parsed()) return cmd_simulate(sim_flags);
        if (replicability->parsed()) return cmd_replicability(rep_flags);
        if (bench->parsed()) return cmd_bench(bench_flags);
    } catch (const coreg::invalid_input& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const coreg::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const coreg::numeric_error& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
