#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "coreg/inference.hpp"
#include "coreg/matrix.hpp"
#include "coreg/regression.hpp"

namespace coreg {

/// Mass-univariate OLS baseline: per-outcome t-tests with dof = n - q and BH
/// correction. Coefficients coincide with the multivariate fit row by row.
inline InferenceResult ols_univariate(const DataMatrix& outcomes,
                                      const Design& design, double alpha,
                                      std::vector<std::string> outcome_names = {}) {
    RegressionFit fit = fit_ols(outcomes, design);
    InferenceResult res = test_coefficients(fit, design, MethodTag::OLS, alpha,
                                            std::move(outcome_names));
    apply_bh(res);
    return res;
}

/// Orthogonal factors for the SVD surrogate baseline: the top n_factors
/// left-singular directions of the step-1 residuals, projected onto the
/// samples (F = U_K^T E). Rows are mutually orthogonal and centered.
inline DataMatrix svd_residual_factors(const DataMatrix& residuals,
                                       Index n_factors) {
    const Eigen::MatrixXd e = residuals.as_vars_by_samples();
    if (n_factors < 1 || n_factors > std::min(e.rows(), e.cols()))
        throw invalid_input("svd_residual_factors: n_factors out of range");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(e, Eigen::ComputeThinU);
    const Eigen::MatrixXd u = svd.matrixU().leftCols(n_factors);
    Eigen::MatrixXd f = u.transpose() * e;
    return DataMatrix::vars_by_samples(std::move(f));
}

/// SVD-factor surrogate baseline (stands in for SVA without reproducing it):
/// orthogonal residual factors enter a factor-augmented fit with
/// dof = n - (q + n_factors). n_factors = 0 reduces to ols_univariate.
inline InferenceResult svd_factor_baseline(const DataMatrix& outcomes,
                                           const Design& design, Index n_factors,
                                           double alpha,
                                           std::vector<std::string> outcome_names = {}) {
    if (n_factors == 0)
        return ols_univariate(outcomes, design, alpha, std::move(outcome_names));
    const Index p = outcomes.n_variables();
    const Index n = outcomes.n_samples();
    if (n_factors >= std::min(p, n) - design.q())
        throw numeric_error("svd_factor_baseline: n_factors " +
                            std::to_string(n_factors) +
                            " leaves no degrees of freedom");
    RegressionFit step1 = fit_ols(outcomes, design);
    DataMatrix factors = svd_residual_factors(step1.residuals, n_factors);
    CoRegFit fit = fit_coreg(outcomes, design, factors);
    InferenceResult res = test_coefficients(fit, design, MethodTag::SvdFactor,
                                            alpha, std::move(outcome_names));
    apply_bh(res);
    return res;
}

}  // namespace coreg
