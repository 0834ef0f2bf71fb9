#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coreg/baselines.hpp"
#include "coreg/factor.hpp"
#include "coreg/inference.hpp"
#include "coreg/matrix.hpp"
#include "coreg/regression.hpp"

namespace coreg {

/// End-to-end CoReg result: step-1 fit, residual dependence, the selected
/// factor model, the factor-augmented fit, and the finished test table.
struct CoRegAnalysis {
    RegressionFit step1;
    SymmetricMatrix residual_cov;
    SymmetricMatrix residual_corr;
    std::optional<SelectionResult> selection;  // empty when no structure found
    std::optional<CoRegFit> fit;               // empty when fell back to OLS
    InferenceResult inference;
    bool fell_back_to_ols = false;
};

/// Runs the three CoReg steps. When no lambda yields any module the analysis
/// falls back to mass-univariate OLS, flagging the fallback instead of
/// failing, so noise-only inputs still produce a usable table.
inline CoRegAnalysis run_coreg(const DataMatrix& outcomes, const Design& design,
                               const FactorOptions& factor_opts = {},
                               double alpha = 0.05,
                               std::vector<std::string> outcome_names = {}) {
    RegressionFit step1 = fit_ols(outcomes, design);
    auto [cov, corr] = residual_dependence(step1);

    std::optional<SelectionResult> selection;
    try {
        selection = select_lambda(cov, step1.residuals, factor_opts);
    } catch (const no_structure_error&) {
        InferenceResult inf = test_coefficients(step1, design, MethodTag::OLS,
                                                alpha, std::move(outcome_names));
        apply_bh(inf);
        return CoRegAnalysis{std::move(step1),   std::move(cov),
                             std::move(corr),    std::nullopt,
                             std::nullopt,       std::move(inf),
                             true};
    }

    CoRegFit fit = fit_coreg(outcomes, design, selection->model.scores);
    InferenceResult inf = test_coefficients(fit, design, MethodTag::CoReg, alpha,
                                            std::move(outcome_names));
    apply_bh(inf);
    return CoRegAnalysis{std::move(step1),     std::move(cov),
                         std::move(corr),      std::move(selection),
                         std::move(fit),       std::move(inf),
                         false};
}

}  // namespace coreg
