#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "coreg/simulate.hpp"
#include "coreg/stats.hpp"

using namespace coreg;

namespace {

ScenarioSpec tiny_scenario() {
    ScenarioSpec spec;
    spec.sigma_spec.block_sizes = {8, 6};
    spec.sigma_spec.block_mean_corr = {0.8, 0.6};
    spec.sigma_spec.inter_block = {{0, 1, -0.4}};
    spec.sigma_spec.n_singletons = 10;
    spec.sigma_spec.within_block_sd = 0.03;
    spec.sigma_spec.noise_scale = 0.5;
    spec.n = 80;
    spec.n_true_signals = 6;
    spec.effect_size = 0.6;
    spec.n_replications = 3;
    spec.master_seed = 20250810;
    return spec;
}

}  // namespace

TEST_CASE("generate_block_sigma matches the paper layout", "[simulate]") {
    BlockSigmaSpec spec = BlockSigmaSpec::paper_design(500, 0.5);
    CHECK(spec.block_sizes == std::vector<int>{100, 100, 100});
    CHECK(spec.n_singletons == 200);
    CHECK(spec.total_p() == 500);
    RngStream rng(20250810, 1);
    SymmetricMatrix sigma = generate_block_sigma(spec, rng);
    CHECK(sigma.dim() == 500);
    // diagonal is sigma^2 and entries scale with it
    for (int i : {0, 150, 499}) CHECK(sigma(i, i) == Catch::Approx(0.5).margin(1e-6));
    // block means land near their targets (in correlation units)
    double b1 = 0.0;
    int n1 = 0;
    for (int i = 0; i < 100; ++i)
        for (int j = i + 1; j < 100; ++j) {
            b1 += sigma(i, j) / 0.5;
            ++n1;
        }
    CHECK(std::abs(b1 / n1 - 0.8) < 0.02);
    // inter-block of the first two blocks is negative
    double b12 = 0.0;
    for (int i = 0; i < 100; ++i)
        for (int j = 100; j < 200; ++j) b12 += sigma(i, j) / 0.5;
    CHECK(std::abs(b12 / 10000.0 + 0.4) < 0.02);
    // singleton cross-entries are zero up to repair distortion
    CHECK(std::abs(sigma(450, 499)) < 0.05);
    CHECK(min_eigenvalue(sigma.matrix()) >= -1e-8);
}

TEST_CASE("generate_block_sigma single unit block", "[simulate]") {
    BlockSigmaSpec spec;
    spec.block_sizes = {1};
    spec.block_mean_corr = {0.5};
    spec.noise_scale = 0.7;
    RngStream rng(1, 1);
    SymmetricMatrix sigma = generate_block_sigma(spec, rng);
    CHECK(sigma.dim() == 1);
    CHECK(sigma(0, 0) == Catch::Approx(0.7));
}

TEST_CASE("generate_block_sigma with zero jitter is exact", "[simulate]") {
    BlockSigmaSpec spec;
    spec.block_sizes = {5, 4};
    spec.block_mean_corr = {0.7, 0.5};
    spec.inter_block = {{0, 1, -0.3}};
    spec.n_singletons = 3;
    spec.within_block_sd = 0.0;
    spec.noise_scale = 1.0;
    RngStream rng(2, 2);
    SymmetricMatrix sigma = generate_block_sigma(spec, rng);
    CHECK(sigma(0, 1) == Catch::Approx(0.7).margin(1e-9));
    CHECK(sigma(5, 6) == Catch::Approx(0.5).margin(1e-9));
    CHECK(sigma(0, 5) == Catch::Approx(-0.3).margin(1e-9));
    CHECK(sigma(9, 10) == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("generate_block_sigma rejects unrepairable targets", "[simulate]") {
    BlockSigmaSpec spec;
    spec.block_sizes = {3, 3, 3};
    spec.block_mean_corr = {0.9, 0.9, 0.9};
    // mutually strong negative inter-correlations cannot coexist
    spec.inter_block = {{0, 1, -0.9}, {0, 2, -0.9}, {1, 2, -0.9}};
    spec.within_block_sd = 0.0;
    RngStream rng(3, 3);
    CHECK_THROWS_AS(generate_block_sigma(spec, rng), invalid_input);
}

TEST_CASE("generate_truth spreads signals proportionally", "[simulate]") {
    ScenarioSpec spec;
    spec.sigma_spec = BlockSigmaSpec::paper_design(500, 0.5);
    spec.n = 100;
    spec.n_true_signals = 100;
    GroundTruth truth = generate_truth(spec);
    REQUIRE(truth.signal_indices.size() == 100);
    int in_b1 = 0, in_b2 = 0, in_b3 = 0, in_s = 0;
    for (int idx : truth.signal_indices) {
        if (idx < 100) ++in_b1;
        else if (idx < 200) ++in_b2;
        else if (idx < 300) ++in_b3;
        else ++in_s;
    }
    CHECK(in_b1 == 20);
    CHECK(in_b2 == 20);
    CHECK(in_b3 == 20);
    CHECK(in_s == 40);
}

TEST_CASE("generate_dataset is deterministic and honors the truth seed", "[simulate]") {
    ScenarioSpec spec = tiny_scenario();
    Dataset a = generate_dataset(spec, 1);
    Dataset b = generate_dataset(spec, 1);
    CHECK((a.outcomes.values() - b.outcomes.values()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.truth.signal_indices == b.truth.signal_indices);

    Dataset c = generate_dataset(spec, 2);
    CHECK((a.outcomes.values() - c.outcomes.values()).cwiseAbs().maxCoeff() > 0.0);
    CHECK(a.truth.signal_indices == c.truth.signal_indices);  // truth is shared

    ScenarioSpec other = spec;
    other.truth_seed = 999;
    Dataset d = generate_dataset(other, 1);
    CHECK(d.truth.signal_indices != a.truth.signal_indices);
}

TEST_CASE("zero effect leaves the truth empty", "[simulate]") {
    ScenarioSpec spec = tiny_scenario();
    spec.effect_size = 0.0;
    Dataset data = generate_dataset(spec, 0);
    // B entries are all zero, so no outcome is truly associated
    CHECK(data.truth.signal_indices.empty());
    MetricsSummary m =
        evaluate(ols_univariate(data.outcomes, data.design, 0.05), data.truth);
    CHECK_FALSE(m.sensitivity_defined);
}

TEST_CASE("run_scenario aggregates and stays deterministic across threads", "[simulate]") {
    ScenarioSpec spec = tiny_scenario();
    const std::vector<MethodTag> methods = {MethodTag::OLS, MethodTag::CoReg,
                                            MethodTag::SvdFactor};
    RunOptions serial;
    serial.threads = 1;
    RunOptions parallel;
    parallel.threads = 4;
    ScenarioReport a = run_scenario(spec, methods, serial);
    ScenarioReport b = run_scenario(spec, methods, parallel);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].method == b.rows[i].method);
        CHECK(a.rows[i].failed == b.rows[i].failed);
        if (!a.rows[i].failed) {
            CHECK(a.rows[i].metrics.tp == b.rows[i].metrics.tp);
            CHECK(a.rows[i].metrics.auc == b.rows[i].metrics.auc);
        }
    }
    REQUIRE(a.aggregates.size() == 3);
    for (const auto& agg : a.aggregates) {
        CHECK(agg.n_failed == 0);
        CHECK(agg.n_success == spec.n_replications);
        CHECK(agg.mean_auc >= 0.0);
        CHECK(agg.mean_auc <= 1.0);
    }
}

TEST_CASE("null scenario keeps the false positive rate near alpha", "[simulate]") {
    // Blocks wide enough that the own-residual share of each factor score
    // (1 / block size) stays negligible; tiny blocks would overfit.
    ScenarioSpec spec;
    spec.sigma_spec.block_sizes = {20, 20};
    spec.sigma_spec.block_mean_corr = {0.8, 0.6};
    spec.sigma_spec.inter_block = {{0, 1, -0.4}};
    spec.sigma_spec.n_singletons = 20;
    spec.sigma_spec.noise_scale = 0.5;
    spec.n = 100;
    spec.n_true_signals = 10;
    spec.effect_size = 0.0;
    spec.n_replications = 30;
    spec.master_seed = 20250810;
    ScenarioReport report =
        run_scenario(spec, {MethodTag::OLS, MethodTag::CoReg}, RunOptions{});
    for (const auto& agg : report.aggregates) {
        CHECK(agg.mean_fpr <= spec.alpha + 0.03);
        CHECK(agg.sensitivity_defined_count == 0);
    }
}

TEST_CASE("CoReg beats OLS on sensitivity in the block design", "[simulate]") {
    // moderate effect so that OLS is underpowered but CoReg benefits from
    // variance removal
    ScenarioSpec spec = tiny_scenario();
    spec.n = 60;
    spec.effect_size = 0.25;
    spec.n_replications = 10;
    ScenarioReport report =
        run_scenario(spec, {MethodTag::OLS, MethodTag::CoReg}, RunOptions{});
    const MethodAggregate& ols = report.aggregates[0];
    const MethodAggregate& coreg = report.aggregates[1];
    CHECK(coreg.mean_sensitivity >= ols.mean_sensitivity);
    CHECK(coreg.mean_auc >= ols.mean_auc - 0.02);
}

TEST_CASE("replicability shares the truth and counts overlap", "[simulate]") {
    ScenarioSpec arm1 = tiny_scenario();
    arm1.sigma_spec.noise_scale = 0.5;
    ScenarioSpec arm2 = tiny_scenario();
    arm2.sigma_spec.noise_scale = 1.0;
    arm2.master_seed = 555;  // different data seed, same truth
    ReplicabilityReport report = run_replicability(
        arm1, arm2, 4242, {MethodTag::OLS, MethodTag::CoReg}, RunOptions{});
    REQUIRE(report.aggregates.size() == 2);
    for (const auto& agg : report.aggregates) {
        CHECK(agg.n_failed == 0);
        CHECK(agg.mean_intersection <= agg.mean_tp1 + 1e-12);
        CHECK(agg.mean_intersection <= agg.mean_tp2 + 1e-12);
        CHECK(agg.prop_intersection >= 0.0);
        CHECK(agg.prop_intersection <= 1.0);
    }
}

TEST_CASE("identical replicability arms overlap completely", "[simulate]") {
    ScenarioSpec arm = tiny_scenario();
    ReplicabilityReport report =
        run_replicability(arm, arm, 4242, {MethodTag::OLS}, RunOptions{});
    for (const auto& row : report.rows) {
        REQUIRE_FALSE(row.failed);
        CHECK(row.tp1 == row.tp2);
        CHECK(row.intersection == row.tp1);
    }
}

TEST_CASE("replicability rejects mismatched arms", "[simulate]") {
    ScenarioSpec arm1 = tiny_scenario();
    ScenarioSpec arm2 = tiny_scenario();
    arm2.sigma_spec.n_singletons += 5;
    CHECK_THROWS_AS(
        run_replicability(arm1, arm2, 1, {MethodTag::OLS}, RunOptions{}),
        invalid_input);
}
