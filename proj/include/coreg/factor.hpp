#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coreg/error.hpp"
#include "coreg/matrix.hpp"
#include "coreg/network.hpp"
#include "coreg/stats.hpp"

namespace coreg {

enum class LoadingStyle {
    Binary,       // membership indicators, the default
    Eigenvector,  // per-module leading eigenvector of the correlation block
};

enum class ReconstructionNorm { Spectral, Frobenius };

/// Block loading matrix with non-overlapping support: row j has its single
/// nonzero in column k exactly when variable j belongs to module G_k;
/// singleton rows are all zero. L^T L is therefore diagonal and invertible.
struct LoadingMatrix {
    Eigen::MatrixXd values;    // p x K
    ModulePartition partition;
    LoadingStyle style = LoadingStyle::Binary;

    Index p() const { return values.rows(); }
    Index k() const { return values.cols(); }

    /// Nuclear norm of L. Columns have disjoint support, so the singular
    /// values are the column norms; for binary loadings that is sum sqrt(p_k).
    double nuclear_norm() const {
        double total = 0.0;
        for (Index c = 0; c < values.cols(); ++c) total += values.col(c).norm();
        return total;
    }
};

/// Builds the membership loading matrix from a partition: L(j,k) = 1 iff
/// j is in G_k. K = 0 is an error; callers fall back to plain OLS then.
inline LoadingMatrix build_loadings(const ModulePartition& partition, Index p) {
    if (partition.module_count() == 0)
        throw no_structure_error(
            "build_loadings: partition has no modules; fall back to OLS");
    partition.validate(static_cast<int>(p));
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(p, partition.module_count());
    for (int k = 0; k < partition.module_count(); ++k)
        for (int j : partition.modules[k]) l(j, k) = 1.0;
    return LoadingMatrix{std::move(l), partition, LoadingStyle::Binary};
}

/// Eigenvector-scaled variant: column k carries the leading eigenvector of
/// the module's correlation block (sign fixed so the entry sum is positive).
inline LoadingMatrix build_loadings_eigenvector(const ModulePartition& partition,
                                                const SymmetricMatrix& corr) {
    if (partition.module_count() == 0)
        throw no_structure_error(
            "build_loadings_eigenvector: partition has no modules");
    const Index p = corr.dim();
    partition.validate(static_cast<int>(p));
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(p, partition.module_count());
    for (int k = 0; k < partition.module_count(); ++k) {
        const auto& mod = partition.modules[k];
        const Index sz = static_cast<Index>(mod.size());
        Eigen::MatrixXd block(sz, sz);
        for (Index a = 0; a < sz; ++a)
            for (Index b = 0; b < sz; ++b) block(a, b) = corr(mod[a], mod[b]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
        Eigen::VectorXd lead = es.eigenvectors().col(sz - 1);
        if (lead.sum() < 0.0) lead = -lead;
        for (Index a = 0; a < sz; ++a) l(mod[a], k) = lead(a);
    }
    return LoadingMatrix{std::move(l), partition, LoadingStyle::Eigenvector};
}

/// Factor scores F = (L^T L)^{-1} L^T E. With binary loadings row k is the
/// within-module mean of the residual rows.
inline DataMatrix factor_scores(const LoadingMatrix& loadings,
                                const DataMatrix& residuals) {
    const Eigen::MatrixXd e = residuals.as_vars_by_samples();
    if (e.rows() != loadings.p())
        throw dimension_error("factor_scores: residual rows " +
                              std::to_string(e.rows()) + " != loading rows " +
                              std::to_string(loadings.p()));
    const Eigen::VectorXd gram = loadings.values.colwise().squaredNorm();
    for (Index k = 0; k < gram.size(); ++k)
        if (!(gram(k) > 0.0))
            throw numeric_error("factor_scores: module " + std::to_string(k) +
                                " has an empty loading column");
    Eigen::MatrixXd f = gram.cwiseInverse().asDiagonal() *
                        (loadings.values.transpose() * e);
    return DataMatrix::vars_by_samples(std::move(f));
}

/// First term of the covariance identity: L Sigma_F L^T. Under binary
/// loadings block (k,k') is constant and equal to Sigma_F(k,k').
inline SymmetricMatrix reconstruct_covariance(const LoadingMatrix& loadings,
                                              const SymmetricMatrix& sigma_f) {
    if (sigma_f.dim() != loadings.k())
        throw dimension_error("reconstruct_covariance: Sigma_F dim " +
                              std::to_string(sigma_f.dim()) + " != K " +
                              std::to_string(loadings.k()));
    Eigen::MatrixXd out =
        loadings.values * sigma_f.matrix() * loadings.values.transpose();
    return SymmetricMatrix(std::move(out));
}

/// Fitted factor model for one lambda: loadings, scores, factor covariance,
/// and the diagnostic idiosyncratic diagonal.
struct FactorModel {
    LoadingMatrix loadings;
    DataMatrix scores;       // K x n
    SymmetricMatrix sigma_f; // K x K
    Eigen::VectorXd sigma_u_diag;  // p, floored at 1e-8, diagnostics only
};

/// Per-lambda entry of the selection scan.
struct LambdaScore {
    double lambda = 0.0;
    int module_count = 0;
    double reconstruction = 0.0;  // ||Sigma_hat - L Sigma_F L^T||^2
    double nuclear = 0.0;         // ||L||_*
    double total = 0.0;
    bool usable = false;          // false when the lambda produced no modules
};

struct FactorOptions {
    std::vector<double> lambda_grid = default_lambda_grid();
    double acceptance_threshold = 0.05;
    ReconstructionNorm norm = ReconstructionNorm::Spectral;
    LoadingStyle style = LoadingStyle::Binary;

    static std::vector<double> default_lambda_grid() {
        std::vector<double> g;
        for (int i = 1; i <= 10; ++i) g.push_back(1.0 + 0.1 * i);
        return g;
    }
};

struct SelectionResult {
    FactorModel model;
    double lambda_star = 0.0;
    std::vector<LambdaScore> breakdown;
};

namespace detail {

inline double reconstruction_error(const Eigen::MatrixXd& residual,
                                   ReconstructionNorm norm) {
    if (norm == ReconstructionNorm::Frobenius) return residual.squaredNorm();
    const double s = spectral_norm_sym(residual);
    return s * s;
}

inline FactorModel fit_factor_model(const ModulePartition& partition,
                                    const SymmetricMatrix& sigma_hat,
                                    const SymmetricMatrix& corr,
                                    const DataMatrix& residuals,
                                    LoadingStyle style) {
    LoadingMatrix l = style == LoadingStyle::Binary
                          ? build_loadings(partition, sigma_hat.dim())
                          : build_loadings_eigenvector(partition, corr);
    DataMatrix f = factor_scores(l, residuals);
    SymmetricMatrix sigma_f = sample_covariance(f);
    Eigen::VectorXd sigma_u =
        (sigma_hat.matrix() -
         l.values * sigma_f.matrix() * l.values.transpose())
            .diagonal()
            .cwiseMax(1e-8);
    return FactorModel{std::move(l), std::move(f), std::move(sigma_f),
                       std::move(sigma_u)};
}

}  // namespace detail

/// Scans the lambda grid: extract modules, fit the factor model, and score
/// each lambda by reconstruction error plus the nuclear norm of L. Returns
/// the minimizer, breaking ties toward larger lambda (smaller modules).
/// Throws no_structure_error when every lambda yields zero modules.
inline SelectionResult select_lambda(const SymmetricMatrix& sigma_hat,
                                     const DataMatrix& residuals,
                                     const FactorOptions& opts = {}) {
    if (opts.lambda_grid.empty())
        throw invalid_input("select_lambda: empty lambda grid");
    for (double l : opts.lambda_grid)
        if (!(l > 1.0) || !(l <= 2.0))
            throw invalid_input("select_lambda: lambda " + std::to_string(l) +
                                " outside (1, 2]");

    const SymmetricMatrix corr = to_correlation(sigma_hat);
    const WeightedGraph graph = build_graph(corr);
    PeelOptions peel{opts.acceptance_threshold};

    std::vector<double> grid = opts.lambda_grid;
    std::sort(grid.begin(), grid.end());

    std::vector<LambdaScore> breakdown;
    std::optional<FactorModel> best_model;
    double best_lambda = 0.0;
    std::optional<double> best_total;
    for (double lambda : grid) {
        ModulePartition part = extract_modules(graph, lambda, peel);
        LambdaScore score;
        score.lambda = lambda;
        score.module_count = part.module_count();
        if (part.module_count() == 0) {
            breakdown.push_back(score);
            continue;
        }
        FactorModel model = detail::fit_factor_model(part, sigma_hat, corr,
                                                     residuals, opts.style);
        const Eigen::MatrixXd resid =
            sigma_hat.matrix() - model.loadings.values *
                                     model.sigma_f.matrix() *
                                     model.loadings.values.transpose();
        score.reconstruction = detail::reconstruction_error(resid, opts.norm);
        score.nuclear = model.loadings.nuclear_norm();
        score.total = score.reconstruction + score.nuclear;
        score.usable = true;
        breakdown.push_back(score);
        // <= prefers the larger lambda on exact ties (grid is ascending).
        if (!best_total || score.total <= *best_total) {
            best_total = score.total;
            best_lambda = lambda;
            best_model = std::move(model);
        }
    }
    if (!best_model)
        throw no_structure_error(
            "select_lambda: no lambda produced modules; fall back to OLS");
    return SelectionResult{std::move(*best_model), best_lambda,
                           std::move(breakdown)};
}

}  // namespace coreg
