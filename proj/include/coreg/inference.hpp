#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "coreg/error.hpp"
#include "coreg/matrix.hpp"
#include "coreg/regression.hpp"

namespace coreg {

enum class MethodTag { CoReg, OLS, SvdFactor };

inline const char* method_name(MethodTag tag) {
    switch (tag) {
        case MethodTag::CoReg: return "CoReg";
        case MethodTag::OLS: return "OLS";
        case MethodTag::SvdFactor: return "SvdFactor";
    }
    return "?";
}

/// Factor-augmented multivariate fit Y = B X + Gamma F + eps.
struct CoRegFit {
    Eigen::MatrixXd b_hat;      // p x q
    Eigen::MatrixXd gamma_hat;  // p x K (zero columns when K = 0)
    DataMatrix residuals;       // p x n
    Index dof;                  // n - (q + K)
    Eigen::VectorXd sigma_eps_diag;  // ||eps_l||^2 / dof per outcome
};

/// Joint least squares of Y on the stacked design [X; F]. By orthogonality
/// of X and F (F is built from step-1 residuals) the B block coincides with
/// the plain OLS estimate.
inline CoRegFit fit_coreg(const DataMatrix& outcomes, const Design& design,
                          const DataMatrix& factors) {
    const Eigen::MatrixXd y = outcomes.as_vars_by_samples();
    const Eigen::MatrixXd f = factors.as_vars_by_samples();
    const Index n = y.cols();
    const Index q = design.q();
    const Index k = f.rows();
    if (f.cols() != n)
        throw dimension_error("fit_coreg: F has " + std::to_string(f.cols()) +
                              " samples, expected " + std::to_string(n));
    if (design.n_samples() != n)
        throw dimension_error("fit_coreg: design/outcome sample mismatch");
    if (n <= q + k)
        throw numeric_error("fit_coreg: need n > q + K, got n = " +
                            std::to_string(n) + ", q + K = " +
                            std::to_string(q + k));

    Eigen::MatrixXd z(q + k, n);
    z.topRows(q) = design.x();
    z.bottomRows(k) = f;
    const Eigen::MatrixXd zzt = z * z.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(zzt, Eigen::EigenvaluesOnly);
    const double emax = es.eigenvalues().cwiseAbs().maxCoeff();
    const double emin = es.eigenvalues().minCoeff();
    if (emin <= 0.0 || emax / emin > Design::kMaxCondition)
        throw numeric_error(
            "fit_coreg: X and F are jointly rank-deficient or ill-conditioned");

    Eigen::LDLT<Eigen::MatrixXd> ldlt(zzt);
    Eigen::MatrixXd coef = ldlt.solve(z * y.transpose()).transpose();  // p x (q+K)
    Eigen::MatrixXd resid = y - coef * z;
    const Index dof = n - (q + k);
    Eigen::VectorXd sigma_eps =
        resid.rowwise().squaredNorm() / static_cast<double>(dof);
    return CoRegFit{coef.leftCols(q), coef.rightCols(k),
                    DataMatrix::vars_by_samples(std::move(resid)), dof,
                    std::move(sigma_eps)};
}

/// One (outcome, predictor) test record.
struct InferenceEntry {
    int outcome = 0;
    int predictor = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    double adjusted_p = 1.0;
    bool rejected = false;
    bool degenerate = false;  // zero residual variance
};

/// Full test table for one method: rows ordered predictor-major, outcome
/// ascending within predictor. adjusted_p/rejected are filled by apply_bh.
struct InferenceResult {
    MethodTag method = MethodTag::OLS;
    double alpha = 0.05;
    std::vector<std::string> outcome_names;
    std::vector<std::string> predictor_names;  // parallel to design rows
    std::vector<InferenceEntry> entries;

    Index n_outcomes() const {
        return static_cast<Index>(outcome_names.size());
    }

    const InferenceEntry& at(Index outcome, Index predictor) const {
        return entries[static_cast<std::size_t>(predictor) * outcome_names.size() +
                       static_cast<std::size_t>(outcome)];
    }
    InferenceEntry& at(Index outcome, Index predictor) {
        return entries[static_cast<std::size_t>(predictor) * outcome_names.size() +
                       static_cast<std::size_t>(outcome)];
    }
};

namespace detail {

inline double t_p_value(double t, double dof) {
    boost::math::students_t dist(dof);
    const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    return std::clamp(p, 0.0, 1.0);
}

inline InferenceResult build_tests(const Eigen::MatrixXd& b_hat,
                                   const Eigen::VectorXd& sigma_diag,
                                   Index dof, const Design& design,
                                   MethodTag method, double alpha,
                                   std::vector<std::string> outcome_names) {
    if (dof < 1) throw numeric_error("test_coefficients: dof < 1");
    const Index p = b_hat.rows();
    const Index q = b_hat.cols();
    InferenceResult res;
    res.method = method;
    res.alpha = alpha;
    res.predictor_names = design.predictor_names();
    if (outcome_names.empty()) {
        outcome_names.reserve(p);
        for (Index l = 0; l < p; ++l)
            outcome_names.push_back("y" + std::to_string(l));
    }
    res.outcome_names = std::move(outcome_names);
    res.entries.resize(static_cast<std::size_t>(p) * q);
    for (Index m = 0; m < q; ++m) {
        const double gram_inv = design.xxt_inverse()(m, m);
        for (Index l = 0; l < p; ++l) {
            InferenceEntry& e = res.at(l, m);
            e.outcome = static_cast<int>(l);
            e.predictor = static_cast<int>(m);
            e.estimate = b_hat(l, m);
            e.std_error = std::sqrt(std::max(sigma_diag(l), 0.0) * gram_inv);
            if (e.std_error > 0.0) {
                e.t_stat = e.estimate / e.std_error;
                e.p_value = t_p_value(e.t_stat, static_cast<double>(dof));
            } else {
                // Degenerate zero-variance outcome: flag instead of aborting
                // the whole batch.
                e.degenerate = true;
                e.t_stat = e.estimate == 0.0
                               ? 0.0
                               : std::copysign(
                                     std::numeric_limits<double>::infinity(),
                                     e.estimate);
                e.p_value = 0.0;
            }
        }
    }
    return res;
}

}  // namespace detail

/// Per-coefficient t-tests for a factor-augmented fit:
/// se = sqrt(sigma_eps_ll * [(X X^T)^{-1}]_mm), t ~ Student with n-(q+K) dof.
inline InferenceResult test_coefficients(const CoRegFit& fit, const Design& design,
                                         MethodTag method = MethodTag::CoReg,
                                         double alpha = 0.05,
                                         std::vector<std::string> outcome_names = {}) {
    return detail::build_tests(fit.b_hat, fit.sigma_eps_diag, fit.dof, design,
                               method, alpha, std::move(outcome_names));
}

/// Same tests for a plain OLS fit (dof = n - q).
inline InferenceResult test_coefficients(const RegressionFit& fit,
                                         const Design& design,
                                         MethodTag method = MethodTag::OLS,
                                         double alpha = 0.05,
                                         std::vector<std::string> outcome_names = {}) {
    const Eigen::MatrixXd e = fit.residuals.as_vars_by_samples();
    Eigen::VectorXd sigma =
        e.rowwise().squaredNorm() / static_cast<double>(fit.dof);
    return detail::build_tests(fit.b_hat, sigma, fit.dof, design, method, alpha,
                               std::move(outcome_names));
}

struct BhResult {
    std::vector<double> adjusted;
    std::vector<char> rejected;
};

/// Benjamini-Hochberg step-up control. Adjusted p-values use the standard
/// monotone cumulative-minimum transform; rejected[i] iff adjusted[i] <= alpha,
/// which reproduces the step-up rule exactly.
inline BhResult bh_adjust(const std::vector<double>& p_values, double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw invalid_input("bh_adjust: alpha must lie in (0, 1)");
    const std::size_t m = p_values.size();
    for (double p : p_values)
        if (!(p >= 0.0) || !(p <= 1.0))
            throw invalid_input("bh_adjust: p-value outside [0, 1]");
    BhResult res;
    res.adjusted.assign(m, 1.0);
    res.rejected.assign(m, 0);
    if (m == 0) return res;

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                         return p_values[a] < p_values[b];
                     });
    double running = 1.0;
    for (std::size_t r = m; r-- > 0;) {
        // m/(r+1) >= 1, so clamp at the raw p-value to keep the
        // adjusted >= raw invariant exact under round-off.
        const double scaled = std::max(
            p_values[order[r]],
            p_values[order[r]] * static_cast<double>(m) / static_cast<double>(r + 1));
        running = std::min(running, std::min(scaled, 1.0));
        res.adjusted[order[r]] = running;
    }
    for (std::size_t i = 0; i < m; ++i)
        res.rejected[i] = res.adjusted[i] <= alpha ? 1 : 0;
    return res;
}

/// Fills adjusted_p/rejected per predictor family (all outcomes of one
/// predictor are corrected together).
inline void apply_bh(InferenceResult& result) {
    const Index p = result.n_outcomes();
    const Index q = static_cast<Index>(result.predictor_names.size());
    for (Index m = 0; m < q; ++m) {
        std::vector<double> pv(static_cast<std::size_t>(p));
        for (Index l = 0; l < p; ++l) pv[l] = result.at(l, m).p_value;
        BhResult bh = bh_adjust(pv, result.alpha);
        for (Index l = 0; l < p; ++l) {
            result.at(l, m).adjusted_p = bh.adjusted[l];
            result.at(l, m).rejected = bh.rejected[l] != 0;
        }
    }
}

/// Storey estimate of the proportion of true nulls at lambda0 = 0.5:
/// pi0 = #{p > 0.5} / (0.5 m), clamped to [0, 1]. Requires m >= 20.
inline double storey_pi0(const std::vector<double>& p_values) {
    if (p_values.size() < 20)
        throw invalid_input("storey_pi0: need at least 20 p-values, got " +
                            std::to_string(p_values.size()));
    const double lambda0 = 0.5;
    std::size_t tail = 0;
    for (double p : p_values)
        if (p > lambda0) ++tail;
    const double pi0 = static_cast<double>(tail) /
                       ((1.0 - lambda0) * static_cast<double>(p_values.size()));
    return std::clamp(pi0, 0.0, 1.0);
}

}  // namespace coreg
