#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coreg/baselines.hpp"
#include "coreg/error.hpp"
#include "coreg/matrix.hpp"
#include "coreg/metrics.hpp"
#include "coreg/parallel.hpp"
#include "coreg/pipeline.hpp"
#include "coreg/rng.hpp"
#include "coreg/stats.hpp"

namespace coreg {

/// Interconnected block covariance recipe: dense diagonal blocks with
/// jittered within-block correlations, constant inter-block correlations,
/// uncorrelated singleton variables, and a global variance scale sigma^2.
struct BlockSigmaSpec {
    std::vector<int> block_sizes;
    std::vector<double> block_mean_corr;
    double within_block_sd = 0.02;
    struct InterBlock {
        int block_i = 0;
        int block_j = 0;
        double corr = 0.0;
    };
    std::vector<InterBlock> inter_block;
    int n_singletons = 0;
    double noise_scale = 1.0;  // sigma^2

    int total_p() const {
        return std::accumulate(block_sizes.begin(), block_sizes.end(), 0) +
               n_singletons;
    }

    void validate() const {
        if (block_sizes.size() != block_mean_corr.size())
            throw invalid_input("BlockSigmaSpec: sizes/means length mismatch");
        for (int s : block_sizes)
            if (s < 1) throw invalid_input("BlockSigmaSpec: block size < 1");
        for (double m : block_mean_corr)
            if (!(m > -1.0) || !(m < 1.0))
                throw invalid_input("BlockSigmaSpec: block mean outside (-1, 1)");
        for (const auto& ib : inter_block) {
            if (ib.block_i < 0 || ib.block_j < 0 ||
                ib.block_i >= static_cast<int>(block_sizes.size()) ||
                ib.block_j >= static_cast<int>(block_sizes.size()) ||
                ib.block_i == ib.block_j)
                throw invalid_input("BlockSigmaSpec: bad inter-block pair");
            if (!(ib.corr > -1.0) || !(ib.corr < 1.0))
                throw invalid_input("BlockSigmaSpec: inter-block corr outside (-1, 1)");
        }
        if (n_singletons < 0) throw invalid_input("BlockSigmaSpec: negative singletons");
        if (!(within_block_sd >= 0.0))
            throw invalid_input("BlockSigmaSpec: negative within-block sd");
        if (!(noise_scale > 0.0))
            throw invalid_input("BlockSigmaSpec: sigma^2 must be positive");
        if (total_p() < 1) throw invalid_input("BlockSigmaSpec: empty spec");
    }

    /// Paper-style design scaled to dimension p: three equal blocks of p/5
    /// with means 0.8/0.6/0.4, inter-block -0.4 between the first two, and
    /// the remaining 2p/5 variables as singletons.
    static BlockSigmaSpec paper_design(int p, double sigma2) {
        if (p < 15) throw invalid_input("paper_design: p must be >= 15");
        BlockSigmaSpec spec;
        const int b = p / 5;
        spec.block_sizes = {b, b, b};
        spec.block_mean_corr = {0.8, 0.6, 0.4};
        spec.inter_block = {{0, 1, -0.4}};
        spec.n_singletons = p - 3 * b;
        spec.noise_scale = sigma2;
        return spec;
    }
};

/// Draws the block correlation matrix, repairs it to PSD, and scales by
/// sigma^2. Fails when the PSD repair moves any entry more than 0.15 from
/// its target, which signals an unrealisable spec rather than noise.
inline SymmetricMatrix generate_block_sigma(const BlockSigmaSpec& spec,
                                            RngStream& rng) {
    spec.validate();
    const int p = spec.total_p();
    Eigen::MatrixXd target = Eigen::MatrixXd::Identity(p, p);

    std::vector<int> offsets(spec.block_sizes.size(), 0);
    int off = 0;
    for (std::size_t b = 0; b < spec.block_sizes.size(); ++b) {
        offsets[b] = off;
        off += spec.block_sizes[b];
    }

    for (std::size_t b = 0; b < spec.block_sizes.size(); ++b) {
        const int lo = offsets[b];
        const int hi = lo + spec.block_sizes[b];
        for (int i = lo; i < hi; ++i) {
            for (int j = i + 1; j < hi; ++j) {
                double c = spec.block_mean_corr[b];
                if (spec.within_block_sd > 0.0)
                    c += spec.within_block_sd * rng.normal();
                c = std::clamp(c, -0.99, 0.99);
                target(i, j) = target(j, i) = c;
            }
        }
    }
    for (const auto& ib : spec.inter_block) {
        const int alo = offsets[ib.block_i], ahi = alo + spec.block_sizes[ib.block_i];
        const int blo = offsets[ib.block_j], bhi = blo + spec.block_sizes[ib.block_j];
        for (int i = alo; i < ahi; ++i)
            for (int j = blo; j < bhi; ++j) target(i, j) = target(j, i) = ib.corr;
    }

    SymmetricMatrix repaired = nearest_psd_correlation(SymmetricMatrix(target));
    const double distortion =
        (repaired.matrix() - target).cwiseAbs().maxCoeff();
    if (distortion > 0.15)
        throw invalid_input("generate_block_sigma: PSD repair moved entries by " +
                            std::to_string(distortion) +
                            " (> 0.15); spec is unrealisable");
    return SymmetricMatrix(spec.noise_scale * repaired.matrix());
}

/// One simulation setting: covariance recipe, sample size, design width,
/// signal layout, replication count, test level and master seed.
struct ScenarioSpec {
    BlockSigmaSpec sigma_spec;
    int n = 200;
    int q = 2;  // intercept + predictors; predictor of interest is row 1
    int n_true_signals = 100;
    double effect_size = 0.3;
    int n_replications = 100;
    double alpha = 0.05;
    std::uint64_t master_seed = 20250810;
    /// Signal locations are drawn from this seed; defaults to master_seed.
    /// Replicability runs point both arms at one shared value.
    std::optional<std::uint64_t> truth_seed;

    void validate() const {
        sigma_spec.validate();
        if (q < 2) throw invalid_input("ScenarioSpec: q must be >= 2");
        if (n <= q) throw invalid_input("ScenarioSpec: need n > q");
        if (n_true_signals < 0 || n_true_signals > sigma_spec.total_p())
            throw invalid_input("ScenarioSpec: n_true_signals outside [0, p]");
        if (n_replications < 1)
            throw invalid_input("ScenarioSpec: n_replications must be >= 1");
        if (!(alpha > 0.0) || !(alpha < 1.0))
            throw invalid_input("ScenarioSpec: alpha outside (0, 1)");
    }
};

struct GroundTruth {
    std::vector<int> signal_indices;  // sorted ascending

    std::vector<char> mask(int p) const {
        std::vector<char> m(p, 0);
        for (int i : signal_indices) m[i] = 1;
        return m;
    }
};

namespace detail {

// Stream layout per scenario: stream 0 draws the signal locations (shared
// across replications), then replication r owns streams 4r+1..4r+3 for
// sigma, X, and noise, so replications can run in any order.
constexpr std::uint64_t kTruthStream = 0;
inline std::uint64_t sigma_stream(int r) { return 4ULL * r + 1; }
inline std::uint64_t x_stream(int r) { return 4ULL * r + 2; }
inline std::uint64_t noise_stream(int r) { return 4ULL * r + 3; }

/// Largest-remainder apportionment of `total` signals over segment sizes.
inline std::vector<int> proportional_counts(const std::vector<int>& sizes,
                                            int total_vars, int total) {
    std::vector<int> counts(sizes.size(), 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    int assigned = 0;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        const double ideal = static_cast<double>(total) * sizes[s] / total_vars;
        counts[s] = static_cast<int>(ideal);
        assigned += counts[s];
        remainders.emplace_back(-(ideal - counts[s]), s);  // descending remainder
    }
    std::stable_sort(remainders.begin(), remainders.end());
    for (std::size_t i = 0; assigned < total && i < remainders.size(); ++i) {
        const std::size_t s = remainders[i].second;
        if (counts[s] < sizes[s]) {
            ++counts[s];
            ++assigned;
        }
    }
    // Whatever is still missing (segments saturated) goes anywhere with room.
    for (std::size_t s = 0; assigned < total && s < sizes.size(); ++s) {
        while (counts[s] < sizes[s] && assigned < total) {
            ++counts[s];
            ++assigned;
        }
    }
    return counts;
}

/// Draws k of the indices [offset, offset + size) without replacement.
inline void sample_indices(int offset, int size, int k, RngStream& rng,
                           std::vector<int>& out) {
    std::vector<int> pool(size);
    std::iota(pool.begin(), pool.end(), offset);
    for (int i = 0; i < k; ++i) {
        const auto j =
            i + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(size - i)));
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
}

}  // namespace detail

/// Signal locations for a scenario: spread over blocks and the singleton set
/// proportionally to their sizes, sampled without replacement inside each
/// segment. Depends only on the truth seed, not the replication.
inline GroundTruth generate_truth(const ScenarioSpec& scenario) {
    scenario.validate();
    const int p = scenario.sigma_spec.total_p();
    RngStream rng(scenario.truth_seed.value_or(scenario.master_seed),
                  detail::kTruthStream);
    std::vector<int> sizes = scenario.sigma_spec.block_sizes;
    if (scenario.sigma_spec.n_singletons > 0)
        sizes.push_back(scenario.sigma_spec.n_singletons);
    const std::vector<int> counts =
        detail::proportional_counts(sizes, p, scenario.n_true_signals);
    GroundTruth truth;
    int offset = 0;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        detail::sample_indices(offset, sizes[s], counts[s], rng,
                               truth.signal_indices);
        offset += sizes[s];
    }
    std::sort(truth.signal_indices.begin(), truth.signal_indices.end());
    return truth;
}

struct Dataset {
    DataMatrix outcomes;  // p x n
    Design design;
    GroundTruth truth;
};

/// Generates one replication: draws the block covariance, the predictors,
/// and Y ~ MVN(B X, Sigma) with B carrying effect_size at the truth indices
/// of the predictor of interest. Deterministic per (master_seed, replication).
inline Dataset generate_dataset(const ScenarioSpec& scenario, int replication) {
    scenario.validate();
    if (replication < 0 || replication >= scenario.n_replications)
        throw invalid_input("generate_dataset: replication index out of range");
    const int p = scenario.sigma_spec.total_p();
    const int n = scenario.n;

    GroundTruth truth = generate_truth(scenario);
    // Ground truth is the set of outcomes with nonzero coefficients; a zero
    // effect size zeroes B entirely.
    if (scenario.effect_size == 0.0) truth.signal_indices.clear();

    RngStream sigma_rng(scenario.master_seed, detail::sigma_stream(replication));
    const SymmetricMatrix sigma = generate_block_sigma(scenario.sigma_spec, sigma_rng);

    RngStream x_rng(scenario.master_seed, detail::x_stream(replication));
    Eigen::MatrixXd predictor_rows = x_rng.normal_matrix(scenario.q - 1, n);
    std::vector<std::string> names;
    for (int i = 1; i < scenario.q; ++i) names.push_back("x" + std::to_string(i));
    Design design = Design::make(predictor_rows, std::move(names), true);

    Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(p, scenario.q);
    for (int idx : truth.signal_indices) coef(idx, 1) = scenario.effect_size;

    RngStream noise_rng(scenario.master_seed, detail::noise_stream(replication));
    MvnSampler sampler(Eigen::VectorXd::Zero(p), sigma);
    Eigen::MatrixXd y =
        coef * design.x() + sampler.sample(n, noise_rng).values();
    return Dataset{DataMatrix::vars_by_samples(std::move(y)), std::move(design),
                   std::move(truth)};
}

/// Scores one finished test table against the truth for the predictor of
/// interest (design row 1): confusion counts from the rejection flags plus
/// the p-value ROC sweep.
inline MetricsSummary evaluate(const InferenceResult& result,
                               const GroundTruth& truth, int predictor = 1) {
    const Index p = result.n_outcomes();
    if (predictor < 0 ||
        predictor >= static_cast<int>(result.predictor_names.size()))
        throw invalid_input("evaluate: predictor index out of range");
    std::vector<double> pv(static_cast<std::size_t>(p));
    std::vector<char> rejected(static_cast<std::size_t>(p));
    for (Index l = 0; l < p; ++l) {
        pv[l] = result.at(l, predictor).p_value;
        rejected[l] = result.at(l, predictor).rejected ? 1 : 0;
    }
    return compute_metrics(pv, rejected, truth.mask(static_cast<int>(p)));
}

/// Options shared by the scenario, replicability and bench drivers.
struct RunOptions {
    FactorOptions factor;
    int threads = 1;
    /// Factor count for the SVD surrogate; when unset it copies the K that
    /// CoReg selected on the same data, isolating structure from dimension.
    std::optional<int> svd_factors;
};

struct ReplicationRecord {
    int replication = 0;
    MethodTag method = MethodTag::OLS;
    MetricsSummary metrics;
    double seconds = 0.0;
    bool failed = false;
    std::string error;
};

struct MethodAggregate {
    MethodTag method = MethodTag::OLS;
    int n_success = 0;
    int n_failed = 0;
    double mean_sensitivity = 0.0, sd_sensitivity = 0.0;
    double mean_specificity = 0.0, sd_specificity = 0.0;
    double mean_f1 = 0.0, sd_f1 = 0.0;
    double mean_fdr = 0.0, sd_fdr = 0.0;
    double mean_auc = 0.0, sd_auc = 0.0;
    double mean_fpr = 0.0;  // empirical FP / (FP + TN), for null calibration
    double mean_seconds = 0.0;
    int sensitivity_defined_count = 0;
    std::vector<std::pair<double, double>> mean_roc;  // fixed fpr grid
};

struct ScenarioReport {
    ScenarioSpec spec;
    std::vector<MethodTag> methods;
    std::vector<ReplicationRecord> rows;  // replication-major, method order
    std::vector<MethodAggregate> aggregates;
};

namespace detail {

struct MethodOutput {
    InferenceResult inference;
    double seconds = 0.0;
    int coreg_k = 0;  // filled for CoReg runs only
};

/// Runs one method on one dataset, timing fit plus inference but not data
/// generation or scoring. coreg_k carries CoReg's selected K to the SVD
/// surrogate when the caller did not pin a factor count.
inline MethodOutput run_method(MethodTag method, const Dataset& data,
                               const RunOptions& options,
                               std::optional<int> coreg_k, double alpha) {
    const auto t0 = std::chrono::steady_clock::now();
    MethodOutput out{InferenceResult{}, 0.0, 0};
    switch (method) {
        case MethodTag::OLS:
            out.inference = ols_univariate(data.outcomes, data.design, alpha);
            break;
        case MethodTag::CoReg: {
            CoRegAnalysis analysis =
                run_coreg(data.outcomes, data.design, options.factor, alpha);
            out.coreg_k = analysis.selection
                              ? analysis.selection->model.loadings.k()
                              : 0;
            out.inference = std::move(analysis.inference);
            break;
        }
        case MethodTag::SvdFactor: {
            int k = options.svd_factors.value_or(coreg_k.value_or(-1));
            if (k < 0) {
                // No CoReg run to copy from: select on this data just for K.
                RegressionFit step1 = fit_ols(data.outcomes, data.design);
                try {
                    SelectionResult sel =
                        select_lambda(sample_covariance(step1.residuals),
                                      step1.residuals, options.factor);
                    k = static_cast<int>(sel.model.loadings.k());
                } catch (const no_structure_error&) {
                    k = 0;
                }
            }
            out.inference =
                svd_factor_baseline(data.outcomes, data.design, k, alpha);
            break;
        }
    }
    out.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return out;
}

inline void mean_sd(const std::vector<double>& xs, double& mean, double& sd) {
    mean = 0.0;
    sd = 0.0;
    if (xs.empty()) return;
    mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    if (xs.size() < 2) return;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / (xs.size() - 1));
}

inline std::vector<double> roc_fpr_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 50; ++i) g.push_back(i * 0.02);
    return g;
}

inline MethodAggregate aggregate_method(MethodTag method,
                                        const std::vector<ReplicationRecord>& rows) {
    MethodAggregate agg;
    agg.method = method;
    std::vector<double> sens, spec, f1, fdr, auc, secs, fpr;
    const std::vector<double> grid = roc_fpr_grid();
    std::vector<double> tpr_sum(grid.size(), 0.0);
    for (const auto& row : rows) {
        if (row.method != method) continue;
        if (row.failed) {
            ++agg.n_failed;
            continue;
        }
        ++agg.n_success;
        const MetricsSummary& m = row.metrics;
        if (m.sensitivity_defined) {
            sens.push_back(m.sensitivity);
            ++agg.sensitivity_defined_count;
        }
        spec.push_back(m.specificity);
        f1.push_back(m.f1);
        fdr.push_back(m.fdr);
        auc.push_back(m.auc);
        secs.push_back(row.seconds);
        fpr.push_back(m.fp + m.tn > 0
                          ? static_cast<double>(m.fp) / (m.fp + m.tn)
                          : 0.0);
        for (std::size_t i = 0; i < grid.size(); ++i)
            tpr_sum[i] += roc_tpr_at(m.roc_points, grid[i]);
    }
    mean_sd(sens, agg.mean_sensitivity, agg.sd_sensitivity);
    mean_sd(spec, agg.mean_specificity, agg.sd_specificity);
    mean_sd(f1, agg.mean_f1, agg.sd_f1);
    mean_sd(fdr, agg.mean_fdr, agg.sd_fdr);
    mean_sd(auc, agg.mean_auc, agg.sd_auc);
    double sd_unused = 0.0;
    mean_sd(secs, agg.mean_seconds, sd_unused);
    mean_sd(fpr, agg.mean_fpr, sd_unused);
    if (agg.n_success > 0) {
        agg.mean_roc.reserve(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            agg.mean_roc.emplace_back(grid[i], tpr_sum[i] / agg.n_success);
    }
    return agg;
}

}  // namespace detail

/// Runs every method over every replication and aggregates. Replications run
/// concurrently (distinct RNG streams); results land in per-index slots so
/// the report is bit-identical across runs and thread counts. A failing
/// replication is recorded and skipped, never fatal.
inline ScenarioReport run_scenario(const ScenarioSpec& scenario,
                                   const std::vector<MethodTag>& methods,
                                   const RunOptions& options = {}) {
    scenario.validate();
    if (methods.empty()) throw invalid_input("run_scenario: no methods");
    ScenarioReport report;
    report.spec = scenario;
    report.methods = methods;
    report.rows.resize(static_cast<std::size_t>(scenario.n_replications) *
                       methods.size());

    parallel_for(scenario.n_replications, resolve_threads(options.threads),
                 [&](int r) {
        std::optional<Dataset> data;
        std::string gen_error;
        try {
            data = generate_dataset(scenario, r);
        } catch (const error& e) {
            gen_error = e.what();
        }
        std::optional<int> coreg_k;
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            ReplicationRecord& row =
                report.rows[static_cast<std::size_t>(r) * methods.size() + mi];
            row.replication = r;
            row.method = methods[mi];
            if (!data) {
                row.failed = true;
                row.error = gen_error;
                continue;
            }
            try {
                detail::MethodOutput out = detail::run_method(
                    methods[mi], *data, options, coreg_k, scenario.alpha);
                if (methods[mi] == MethodTag::CoReg) coreg_k = out.coreg_k;
                row.metrics = evaluate(out.inference, data->truth);
                row.seconds = out.seconds;
            } catch (const error& e) {
                row.failed = true;
                row.error = e.what();
            }
        }
    });

    for (MethodTag m : methods)
        report.aggregates.push_back(detail::aggregate_method(m, report.rows));
    return report;
}

/// Two-laboratory replicability: both arms share signal locations through
/// shared_truth_seed while everything else (noise level, effect size, seeds)
/// may differ. Reports mean Venn counts of true positives per method.
struct ReplicabilityRow {
    int replication = 0;
    MethodTag method = MethodTag::OLS;
    int tp1 = 0, tp2 = 0, intersection = 0;
    bool failed = false;
    std::string error;
};

struct ReplicabilityAggregate {
    MethodTag method = MethodTag::OLS;
    int n_success = 0;
    int n_failed = 0;
    double mean_tp1 = 0.0, mean_tp2 = 0.0;
    double mean_only1 = 0.0, mean_intersection = 0.0, mean_only2 = 0.0;
    /// Fractions of the shared signal count.
    double prop_tp1 = 0.0, prop_tp2 = 0.0, prop_intersection = 0.0;
};

struct ReplicabilityReport {
    ScenarioSpec arm1, arm2;
    std::uint64_t shared_truth_seed = 0;
    std::vector<MethodTag> methods;
    std::vector<ReplicabilityRow> rows;
    std::vector<ReplicabilityAggregate> aggregates;
};

inline ReplicabilityReport run_replicability(const ScenarioSpec& spec1,
                                             const ScenarioSpec& spec2,
                                             std::uint64_t shared_truth_seed,
                                             const std::vector<MethodTag>& methods,
                                             const RunOptions& options = {}) {
    if (spec1.sigma_spec.total_p() != spec2.sigma_spec.total_p())
        throw invalid_input("run_replicability: arms have different p");
    if (spec1.n_true_signals != spec2.n_true_signals)
        throw invalid_input("run_replicability: arms have different signal counts");
    if (spec1.n_replications != spec2.n_replications)
        throw invalid_input("run_replicability: arms have different replications");
    ScenarioSpec arm1 = spec1, arm2 = spec2;
    arm1.truth_seed = shared_truth_seed;
    arm2.truth_seed = shared_truth_seed;
    arm1.validate();
    arm2.validate();
    if (methods.empty()) throw invalid_input("run_replicability: no methods");

    ReplicabilityReport report;
    report.arm1 = arm1;
    report.arm2 = arm2;
    report.shared_truth_seed = shared_truth_seed;
    report.methods = methods;
    report.rows.resize(static_cast<std::size_t>(arm1.n_replications) *
                       methods.size());

    parallel_for(arm1.n_replications, resolve_threads(options.threads),
                 [&](int r) {
        std::optional<Dataset> d1, d2;
        std::string gen_error;
        try {
            d1 = generate_dataset(arm1, r);
            d2 = generate_dataset(arm2, r);
        } catch (const error& e) {
            gen_error = e.what();
        }
        std::optional<int> k1, k2;
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            ReplicabilityRow& row =
                report.rows[static_cast<std::size_t>(r) * methods.size() + mi];
            row.replication = r;
            row.method = methods[mi];
            if (!d1 || !d2) {
                row.failed = true;
                row.error = gen_error;
                continue;
            }
            try {
                detail::MethodOutput o1 = detail::run_method(
                    methods[mi], *d1, options, k1, arm1.alpha);
                detail::MethodOutput o2 = detail::run_method(
                    methods[mi], *d2, options, k2, arm2.alpha);
                if (methods[mi] == MethodTag::CoReg) {
                    k1 = o1.coreg_k;
                    k2 = o2.coreg_k;
                }
                const std::vector<char> mask =
                    d1->truth.mask(static_cast<int>(o1.inference.n_outcomes()));
                for (std::size_t l = 0; l < mask.size(); ++l) {
                    if (!mask[l]) continue;
                    const bool r1 =
                        o1.inference.at(static_cast<Index>(l), 1).rejected;
                    const bool r2 =
                        o2.inference.at(static_cast<Index>(l), 1).rejected;
                    row.tp1 += r1 ? 1 : 0;
                    row.tp2 += r2 ? 1 : 0;
                    row.intersection += (r1 && r2) ? 1 : 0;
                }
            } catch (const error& e) {
                row.failed = true;
                row.error = e.what();
            }
        }
    });

    for (MethodTag m : methods) {
        ReplicabilityAggregate agg;
        agg.method = m;
        for (const auto& row : report.rows) {
            if (row.method != m) continue;
            if (row.failed) {
                ++agg.n_failed;
                continue;
            }
            ++agg.n_success;
            agg.mean_tp1 += row.tp1;
            agg.mean_tp2 += row.tp2;
            agg.mean_intersection += row.intersection;
        }
        if (agg.n_success > 0) {
            agg.mean_tp1 /= agg.n_success;
            agg.mean_tp2 /= agg.n_success;
            agg.mean_intersection /= agg.n_success;
        }
        agg.mean_only1 = agg.mean_tp1 - agg.mean_intersection;
        agg.mean_only2 = agg.mean_tp2 - agg.mean_intersection;
        const double total = std::max(arm1.n_true_signals, 1);
        agg.prop_tp1 = agg.mean_tp1 / total;
        agg.prop_tp2 = agg.mean_tp2 / total;
        agg.prop_intersection = agg.mean_intersection / total;
        report.aggregates.push_back(agg);
    }
    return report;
}

}  // namespace coreg
