#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "coreg/factor.hpp"
#include "coreg/regression.hpp"
#include "coreg/rng.hpp"
#include "coreg/simulate.hpp"
#include "coreg/stats.hpp"
#include "helpers.hpp"

using namespace coreg;

namespace {

ModulePartition make_partition(std::vector<std::vector<int>> modules,
                               std::vector<int> singletons, double lambda = 1.5) {
    ModulePartition p;
    p.modules = std::move(modules);
    p.singletons = std::move(singletons);
    p.lambda = lambda;
    return p;
}

/// Exact interconnected block correlation: three blocks with constant
/// within-block correlation and a constant negative cross block, singletons
/// uncorrelated (the Fig. S3-style design at reduced scale).
Eigen::MatrixXd exact_block_correlation(const std::vector<int>& sizes,
                                        const std::vector<double>& within,
                                        double cross01, int singletons) {
    int p = singletons;
    for (int s : sizes) p += s;
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(p, p);
    int off = 0;
    std::vector<int> offsets;
    for (int s : sizes) {
        offsets.push_back(off);
        for (int i = off; i < off + s; ++i)
            for (int j = off; j < off + s; ++j)
                if (i != j) r(i, j) = within[offsets.size() - 1];
        off += s;
    }
    for (int i = offsets[0]; i < offsets[0] + sizes[0]; ++i)
        for (int j = offsets[1]; j < offsets[1] + sizes[1]; ++j)
            r(i, j) = r(j, i) = cross01;
    return r;
}

}  // namespace

TEST_CASE("build_loadings is the membership indicator matrix", "[factor]") {
    ModulePartition part = make_partition({{0, 1}, {2}}, {3});
    part.modules[1] = {2};  // invalid: module of size 1
    CHECK_THROWS_AS(build_loadings(part, 4), invalid_input);

    ModulePartition ok = make_partition({{0, 1}, {2, 3}}, {4});
    LoadingMatrix l = build_loadings(ok, 5);
    Eigen::MatrixXd expected(5, 2);
    expected << 1, 0, 1, 0, 0, 1, 0, 1, 0, 0;
    CHECK((l.values - expected).cwiseAbs().maxCoeff() == 0.0);

    // every row has at most one nonzero, exactly
    for (int j = 0; j < 5; ++j) {
        int nz = 0;
        for (int k = 0; k < 2; ++k) nz += l.values(j, k) != 0.0 ? 1 : 0;
        CHECK(nz <= 1);
    }
}

TEST_CASE("build_loadings of a single all-covering module", "[factor]") {
    ModulePartition part = make_partition({{0, 1, 2, 3}}, {});
    LoadingMatrix l = build_loadings(part, 4);
    CHECK(l.values.cols() == 1);
    CHECK((l.values - Eigen::MatrixXd::Ones(4, 1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_loadings refuses an empty partition", "[factor]") {
    ModulePartition part = make_partition({}, {0, 1, 2});
    CHECK_THROWS_AS(build_loadings(part, 3), no_structure_error);
}

TEST_CASE("L^T L is diagonal with module sizes", "[factor]") {
    ModulePartition part = make_partition({{0, 1}, {2, 3, 4}, {5, 6, 7, 8}}, {9});
    LoadingMatrix l = build_loadings(part, 10);
    Eigen::MatrixXd gram = l.values.transpose() * l.values;
    Eigen::MatrixXd expected = Eigen::Vector3d(2, 3, 4).asDiagonal();
    CHECK((gram - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("factor_scores averages block-constant residuals", "[factor]") {
    ModulePartition part = make_partition({{0, 1, 2}}, {});
    LoadingMatrix l = build_loadings(part, 3);
    Eigen::MatrixXd e(3, 4);
    e << 1, 2, 3, 4, 1, 2, 3, 4, 1, 2, 3, 4;  // all module rows equal
    DataMatrix f = factor_scores(l, DataMatrix::vars_by_samples(e));
    CHECK((f.values() - e.row(0)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("factor_scores hand mean", "[factor]") {
    ModulePartition part = make_partition({{0, 1}}, {});
    LoadingMatrix l = build_loadings(part, 2);
    Eigen::MatrixXd e(2, 2);
    e << 1, 3, 3, 1;
    DataMatrix f = factor_scores(l, DataMatrix::vars_by_samples(e));
    CHECK(f.values()(0, 0) == Catch::Approx(2.0));
    CHECK(f.values()(0, 1) == Catch::Approx(2.0));
}

TEST_CASE("factor_scores matches the normal-equations oracle", "[factor]") {
    RngStream rng(20250810, 11);
    ModulePartition part = make_partition({{0, 2, 4}, {1, 3, 5, 7}}, {6, 8, 9});
    LoadingMatrix l = build_loadings(part, 10);
    Eigen::MatrixXd e = rng.normal_matrix(10, 15);
    DataMatrix f = factor_scores(l, DataMatrix::vars_by_samples(e));
    // independent route: full-pivot LU solve of (L^T L) F = L^T E
    Eigen::MatrixXd oracle = (l.values.transpose() * l.values)
                                 .fullPivLu()
                                 .solve(l.values.transpose() * e);
    CHECK((f.values() - oracle).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("reconstruct_covariance fills constant blocks", "[factor]") {
    ModulePartition part = make_partition({{0, 1, 2}}, {3, 4});
    LoadingMatrix l = build_loadings(part, 5);
    Eigen::MatrixXd sf(1, 1);
    sf << 0.8;
    SymmetricMatrix rec = reconstruct_covariance(l, SymmetricMatrix(sf));
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            CHECK(rec(i, j) == Catch::Approx(i < 3 && j < 3 ? 0.8 : 0.0));
}

TEST_CASE("block-constant correlation is reconstructed exactly", "[factor]") {
    // Proposition-level identity: with the true partition and Sigma_F from
    // block means, off-diagonals of R - L Sigma_F L^T vanish.
    Eigen::MatrixXd r =
        exact_block_correlation({4, 3, 3}, {0.8, 0.6, 0.4}, -0.4, 5);
    ModulePartition part =
        make_partition({{0, 1, 2, 3}, {4, 5, 6}, {7, 8, 9}}, {10, 11, 12, 13, 14});
    LoadingMatrix l = build_loadings(part, 15);
    Eigen::MatrixXd sf(3, 3);
    sf << 0.8, -0.4, 0.0, -0.4, 0.6, 0.0, 0.0, 0.0, 0.4;
    SymmetricMatrix rec = reconstruct_covariance(l, SymmetricMatrix(sf));
    double max_off = 0.0;
    for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 15; ++j)
            if (i != j) max_off = std::max(max_off, std::abs(r(i, j) - rec(i, j)));
    CHECK(max_off <= 1e-10);

    // anticorrelated modules appear as negative cross blocks
    CHECK(rec(0, 4) == Catch::Approx(-0.4));
}

TEST_CASE("nuclear norm of binary loadings is sum of sqrt sizes", "[factor]") {
    ModulePartition part = make_partition({{0, 1}, {2, 3, 4}, {5, 6, 7, 8}}, {9});
    LoadingMatrix l = build_loadings(part, 10);
    const double expected = std::sqrt(2.0) + std::sqrt(3.0) + std::sqrt(4.0);
    CHECK(l.nuclear_norm() == Catch::Approx(expected).epsilon(1e-12));

    // cross-check against the SVD route
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(l.values);
    CHECK(svd.singularValues().sum() == Catch::Approx(expected).epsilon(1e-10));
}

TEST_CASE("select_lambda on a single-element grid returns it", "[factor]") {
    RngStream rng(20250810, 12);
    Eigen::MatrixXd r = exact_block_correlation({5, 5}, {0.7, 0.7}, 0.0, 0);
    DataMatrix e = mvn_sample(Eigen::VectorXd::Zero(10), SymmetricMatrix(r), 300, rng);
    Design design = Design::intercept_only(300);
    RegressionFit fit = fit_ols(e, design);
    SymmetricMatrix cov = sample_covariance(fit.residuals);
    FactorOptions opts;
    opts.lambda_grid = {1.4};
    SelectionResult sel = select_lambda(cov, fit.residuals, opts);
    CHECK(sel.lambda_star == 1.4);
    CHECK(sel.breakdown.size() == 1);
}

TEST_CASE("select_lambda recovers planted blocks over the grid", "[factor]") {
    RngStream rng(20250810, 13);
    const int p = 12;
    Eigen::MatrixXd r = exact_block_correlation({6, 6}, {0.8, 0.6}, -0.3, 0);
    DataMatrix e = mvn_sample(Eigen::VectorXd::Zero(p), SymmetricMatrix(r), 800, rng);
    Design design = Design::intercept_only(800);
    RegressionFit fit = fit_ols(e, design);
    SymmetricMatrix cov = sample_covariance(fit.residuals);
    FactorOptions opts;
    opts.lambda_grid = {1.2, 1.6, 2.0};
    SelectionResult sel = select_lambda(cov, fit.residuals, opts);

    std::vector<int> truth(p);
    for (int i = 0; i < p; ++i) truth[i] = i / 6;
    const std::vector<int> labels =
        test::partition_labels(sel.model.loadings.partition, p);
    CHECK(test::adjusted_rand_index(labels, truth) == 1.0);
    CHECK(sel.model.loadings.k() == 2);
    CHECK(sel.model.scores.n_samples() == 800);
}

TEST_CASE("select_lambda errors when nothing clusters", "[factor]") {
    RngStream rng(20250810, 14);
    // independent variables: residual correlations are pure noise at n=4000
    Eigen::MatrixXd e = rng.normal_matrix(8, 4000);
    Design design = Design::intercept_only(4000);
    RegressionFit fit = fit_ols(DataMatrix::vars_by_samples(e), design);
    SymmetricMatrix cov = sample_covariance(fit.residuals);
    FactorOptions opts;
    opts.lambda_grid = {2.0};
    CHECK_THROWS_AS(select_lambda(cov, fit.residuals, opts), no_structure_error);
}

TEST_CASE("select_lambda validates its grid", "[factor]") {
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(3, 3);
    Eigen::MatrixXd e(3, 5);
    e.setRandom();
    FactorOptions opts;
    opts.lambda_grid = {2.5};
    CHECK_THROWS_AS(select_lambda(SymmetricMatrix(r),
                                  DataMatrix::vars_by_samples(e), opts),
                    invalid_input);
    opts.lambda_grid = {};
    CHECK_THROWS_AS(select_lambda(SymmetricMatrix(r),
                                  DataMatrix::vars_by_samples(e), opts),
                    invalid_input);
}

TEST_CASE("factor count equals module count and Sigma_F stays PSD", "[factor]") {
    RngStream rng(20250810, 15);
    BlockSigmaSpec spec;
    spec.block_sizes = {8, 6, 6};
    spec.block_mean_corr = {0.8, 0.6, 0.5};
    spec.inter_block = {{0, 1, -0.4}};
    spec.n_singletons = 10;
    spec.within_block_sd = 0.03;
    SymmetricMatrix sigma = generate_block_sigma(spec, rng);
    DataMatrix e = mvn_sample(Eigen::VectorXd::Zero(30), sigma, 600, rng);
    Design design = Design::intercept_only(600);
    RegressionFit fit = fit_ols(e, design);
    SymmetricMatrix cov = sample_covariance(fit.residuals);
    SelectionResult sel = select_lambda(cov, fit.residuals);

    CHECK(sel.model.loadings.k() ==
          sel.model.loadings.partition.module_count());
    CHECK(min_eigenvalue(sel.model.sigma_f.matrix()) >= -1e-10);
    // scores inherit centering from centered residuals
    CHECK(sel.model.scores.values().rowwise().mean().cwiseAbs().maxCoeff() <
          1e-10);
    CHECK(sel.model.sigma_u_diag.minCoeff() >= 1e-8);
}

TEST_CASE("factor adjustment shrinks off-diagonal dependence", "[factor]") {
    RngStream rng(20250810, 16);
    BlockSigmaSpec spec;
    spec.block_sizes = {10, 10};
    spec.block_mean_corr = {0.8, 0.6};
    spec.n_singletons = 10;
    spec.within_block_sd = 0.0;
    SymmetricMatrix sigma = generate_block_sigma(spec, rng);
    DataMatrix e = mvn_sample(Eigen::VectorXd::Zero(30), sigma, 500, rng);
    Design design = Design::intercept_only(500);
    RegressionFit fit = fit_ols(e, design);
    SymmetricMatrix cov = sample_covariance(fit.residuals);
    SelectionResult sel = select_lambda(cov, fit.residuals);

    // regress residuals on scores and compare mean |off-diagonal|
    const Eigen::MatrixXd er = fit.residuals.values();
    const Eigen::MatrixXd f = sel.model.scores.values();
    Eigen::MatrixXd gamma =
        (f * f.transpose()).ldlt().solve(f * er.transpose()).transpose();
    Eigen::MatrixXd eps = er - gamma * f;
    SymmetricMatrix cov_eps =
        sample_covariance(DataMatrix::vars_by_samples(eps));

    auto mean_offdiag = [](const Eigen::MatrixXd& m) {
        double sum = 0.0;
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j)
                if (i != j) sum += std::abs(m(i, j));
        return sum / (m.rows() * (m.rows() - 1));
    };
    CHECK(mean_offdiag(cov_eps.matrix()) < 0.25 * mean_offdiag(cov.matrix()));
}

TEST_CASE("eigenvector loadings keep disjoint support", "[factor]") {
    Eigen::MatrixXd r = exact_block_correlation({4, 4}, {0.7, 0.5}, 0.2, 2);
    ModulePartition part = make_partition({{0, 1, 2, 3}, {4, 5, 6, 7}}, {8, 9});
    LoadingMatrix l = build_loadings_eigenvector(part, SymmetricMatrix(r));
    for (int j = 0; j < 10; ++j) {
        int nz = 0;
        for (int k = 0; k < 2; ++k) nz += l.values(j, k) != 0.0 ? 1 : 0;
        CHECK(nz <= 1);
    }
    // unit-norm columns: nuclear norm = K
    CHECK(l.nuclear_norm() == Catch::Approx(2.0).epsilon(1e-10));
    // gram is diagonal
    Eigen::MatrixXd gram = l.values.transpose() * l.values;
    CHECK(std::abs(gram(0, 1)) < 1e-12);
}
