#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "coreg/error.hpp"
#include "coreg/matrix.hpp"
#include "coreg/stats.hpp"

namespace coreg {

namespace detail {

/// Names the predictors implicated in a (near-)null direction of X X^T so
/// rank-deficiency errors are actionable.
inline std::string collinear_set(const Eigen::MatrixXd& xxt,
                                 const std::vector<std::string>& names) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xxt);
    const Eigen::VectorXd v = es.eigenvectors().col(0);  // smallest eigenvalue
    const double peak = v.cwiseAbs().maxCoeff();
    std::string out;
    for (Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 0.3 * peak) {
            if (!out.empty()) out += ", ";
            out += i < static_cast<Index>(names.size()) ? names[i]
                                                        : "x" + std::to_string(i);
        }
    }
    return out.empty() ? "(unidentified)" : out;
}

}  // namespace detail

/// Fixed design X in predictors-by-samples layout. When has_intercept, the
/// first row is all ones. Construction checks conditioning of X X^T so that
/// silent near-singularity becomes a hard error.
class Design {
public:
    static constexpr double kMaxCondition = 1e12;

    /// Builds a design from predictor rows (without intercept); an intercept
    /// row is prepended unless add_intercept is false.
    static Design make(const Eigen::MatrixXd& predictor_rows,
                       std::vector<std::string> names, bool add_intercept = true) {
        const Index n = predictor_rows.cols();
        Eigen::MatrixXd x;
        std::vector<std::string> all_names;
        if (add_intercept) {
            x.resize(predictor_rows.rows() + 1, n);
            x.row(0).setOnes();
            x.bottomRows(predictor_rows.rows()) = predictor_rows;
            all_names.reserve(names.size() + 1);
            all_names.emplace_back("(intercept)");
            for (auto& nm : names) all_names.push_back(std::move(nm));
        } else {
            if (predictor_rows.rows() < 1)
                throw invalid_input("Design: no predictors and no intercept");
            x = predictor_rows;
            all_names = std::move(names);
        }
        return Design(std::move(x), std::move(all_names), add_intercept);
    }

    /// Intercept-only design of length n.
    static Design intercept_only(Index n) {
        return make(Eigen::MatrixXd(0, n), {}, true);
    }

    const Eigen::MatrixXd& x() const { return x_; }
    const std::vector<std::string>& predictor_names() const { return names_; }
    bool has_intercept() const { return has_intercept_; }
    Index q() const { return x_.rows(); }
    Index n_samples() const { return x_.cols(); }

    const Eigen::MatrixXd& xxt() const { return xxt_; }
    const Eigen::MatrixXd& xxt_inverse() const { return xxt_inv_; }

private:
    Design(Eigen::MatrixXd x, std::vector<std::string> names, bool has_intercept)
        : x_(std::move(x)), names_(std::move(names)), has_intercept_(has_intercept) {
        if (!all_finite(x_)) throw invalid_input("Design: non-finite entry in X");
        if (static_cast<Index>(names_.size()) != x_.rows())
            throw invalid_input("Design: predictor_names size mismatch");
        xxt_ = x_ * x_.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xxt_,
                                                          Eigen::EigenvaluesOnly);
        const double emax = es.eigenvalues().cwiseAbs().maxCoeff();
        const double emin = es.eigenvalues().minCoeff();
        if (emin <= 0.0 || emax / emin > kMaxCondition)
            throw numeric_error("Design: X X^T is singular or ill-conditioned "
                                "(condition > 1e12); collinear predictors: " +
                                detail::collinear_set(xxt_, names_));
        xxt_inv_ = Eigen::LDLT<Eigen::MatrixXd>(xxt_).solve(
            Eigen::MatrixXd::Identity(x_.rows(), x_.rows()));
    }

    Eigen::MatrixXd x_;
    std::vector<std::string> names_;
    bool has_intercept_;
    Eigen::MatrixXd xxt_;
    Eigen::MatrixXd xxt_inv_;
};

/// Closed-form multivariate least squares fit: coefficients, residuals, and
/// residual degrees of freedom n - q.
struct RegressionFit {
    Eigen::MatrixXd b_hat;  // p x q
    DataMatrix residuals;   // p x n
    Index dof;              // n - q
};

/// Multivariate OLS of all outcome rows on the design, solved through a
/// symmetric factorization of X X^T rather than its explicit inverse.
inline RegressionFit fit_ols(const DataMatrix& outcomes, const Design& design) {
    const Eigen::MatrixXd y = outcomes.as_vars_by_samples();
    const Index n = y.cols();
    const Index q = design.q();
    if (design.n_samples() != n)
        throw dimension_error("fit_ols: Y has " + std::to_string(n) +
                              " samples but design has " +
                              std::to_string(design.n_samples()));
    if (n <= q)
        throw numeric_error("fit_ols: need n > q, got n = " + std::to_string(n) +
                            ", q = " + std::to_string(q));
    Eigen::LDLT<Eigen::MatrixXd> ldlt(design.xxt());
    // B^T = (X X^T)^{-1} (X Y^T)
    Eigen::MatrixXd b_hat = ldlt.solve(design.x() * y.transpose()).transpose();
    Eigen::MatrixXd resid = y - b_hat * design.x();
    return RegressionFit{std::move(b_hat),
                         DataMatrix::vars_by_samples(std::move(resid)), n - q};
}

/// Residual covariance and correlation, the input to the co-expression step.
inline std::pair<SymmetricMatrix, SymmetricMatrix> residual_dependence(
    const RegressionFit& fit) {
    SymmetricMatrix cov = sample_covariance(fit.residuals);
    SymmetricMatrix corr = to_correlation(cov);
    return {std::move(cov), std::move(corr)};
}

}  // namespace coreg
