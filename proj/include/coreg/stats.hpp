#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "coreg/error.hpp"
#include "coreg/matrix.hpp"
#include "coreg/rng.hpp"

namespace coreg {

/// Sample covariance of a variables-by-samples matrix: rows are centered and
/// the cross products divided by n-1. Output is p x p and PSD up to round-off.
inline SymmetricMatrix sample_covariance(const DataMatrix& data) {
    const Eigen::MatrixXd e = data.as_vars_by_samples();
    const Index n = e.cols();
    if (n < 2)
        throw dimension_error("sample_covariance: need at least 2 samples, got " +
                              std::to_string(n));
    const Eigen::MatrixXd centered = e.colwise() - e.rowwise().mean();
    Eigen::MatrixXd cov =
        (centered * centered.transpose()) / static_cast<double>(n - 1);
    return SymmetricMatrix(std::move(cov));
}

/// Rescale a covariance matrix to unit diagonal. Every diagonal entry must be
/// strictly positive; the error message names the first offending index.
inline SymmetricMatrix to_correlation(const SymmetricMatrix& cov) {
    const Eigen::MatrixXd& s = cov.matrix();
    const Index p = cov.dim();
    Eigen::VectorXd inv_sd(p);
    for (Index i = 0; i < p; ++i) {
        if (!(s(i, i) > 0.0))
            throw numeric_error("to_correlation: non-positive variance " +
                                std::to_string(s(i, i)) + " at index " +
                                std::to_string(i));
        inv_sd(i) = 1.0 / std::sqrt(s(i, i));
    }
    Eigen::MatrixXd r = inv_sd.asDiagonal() * s * inv_sd.asDiagonal();
    r.diagonal().setOnes();
    return SymmetricMatrix(std::move(r));
}

/// Smallest eigenvalue of a symmetric matrix (eigenvalues-only solve).
inline double min_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// Project a unit-diagonal symmetric matrix onto the PSD cone: clip negative
/// eigenvalues to zero, reconstruct, rescale back to unit diagonal. Inputs
/// that are already PSD pass through unchanged.
inline SymmetricMatrix nearest_psd_correlation(const SymmetricMatrix& r) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.matrix());
    const Eigen::VectorXd& evals = es.eigenvalues();
    if (evals.minCoeff() >= 0.0) return r;

    const Eigen::VectorXd clipped = evals.cwiseMax(0.0);
    Eigen::MatrixXd rebuilt = es.eigenvectors() * clipped.asDiagonal() *
                              es.eigenvectors().transpose();
    Eigen::VectorXd scale(r.dim());
    for (Index i = 0; i < r.dim(); ++i) {
        // A variable annihilated by clipping keeps a unit diagonal by fiat.
        scale(i) = rebuilt(i, i) > 1e-300 ? 1.0 / std::sqrt(rebuilt(i, i)) : 0.0;
    }
    Eigen::MatrixXd out = scale.asDiagonal() * rebuilt * scale.asDiagonal();
    out.diagonal().setOnes();
    return SymmetricMatrix(std::move(out));
}

/// Draw n samples from MVN(mean, sigma) as a variables-by-samples matrix.
/// Uses the eigendecomposition square root, so PSD-but-singular sigma is
/// accepted; eigenvalues below -1e-8 are a decomposition error.
inline DataMatrix mvn_sample(const Eigen::VectorXd& mean,
                             const SymmetricMatrix& sigma, Index n,
                             RngStream& rng) {
    const Index p = sigma.dim();
    if (mean.size() != p)
        throw dimension_error("mvn_sample: mean length " + std::to_string(mean.size()) +
                              " does not match sigma dim " + std::to_string(p));
    if (n < 1) throw dimension_error("mvn_sample: need n >= 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma.matrix());
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw numeric_error("mvn_sample: sigma is not PSD (min eigenvalue " +
                            std::to_string(es.eigenvalues().minCoeff()) + ")");
    const Eigen::VectorXd sqrt_evals = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd root = es.eigenvectors() * sqrt_evals.asDiagonal();
    Eigen::MatrixXd draws = root * rng.normal_matrix(p, n);
    draws.colwise() += mean;
    return DataMatrix::vars_by_samples(std::move(draws));
}

/// Reusable MVN sampler: factors sigma once, then draws any number of
/// samples. Same square root and error contract as mvn_sample.
class MvnSampler {
public:
    MvnSampler(Eigen::VectorXd mean, const SymmetricMatrix& sigma)
        : mean_(std::move(mean)) {
        if (mean_.size() != sigma.dim())
            throw dimension_error("MvnSampler: mean/sigma dimension mismatch");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma.matrix());
        if (es.eigenvalues().minCoeff() < -1e-8)
            throw numeric_error("MvnSampler: sigma is not PSD (min eigenvalue " +
                                std::to_string(es.eigenvalues().minCoeff()) + ")");
        root_ = es.eigenvectors() *
                es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }

    DataMatrix sample(Index n, RngStream& rng) const {
        Eigen::MatrixXd draws = root_ * rng.normal_matrix(mean_.size(), n);
        draws.colwise() += mean_;
        return DataMatrix::vars_by_samples(std::move(draws));
    }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd root_;
};

/// Spectral norm (largest |eigenvalue|) of a symmetric matrix via Lanczos
/// with full reorthogonalization. Deterministic start vector; the k * p^2
/// matvec cost keeps the lambda grid scan far below a full p^3 eigensolve.
inline double spectral_norm_sym(const Eigen::MatrixXd& m, int max_steps = 80) {
    const Index p = m.rows();
    const int k = static_cast<int>(std::min<Index>(p, max_steps));

    Eigen::MatrixXd basis(p, k);
    Eigen::VectorXd alphas(k), betas(k);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(p);
    for (Index i = 0; i < p; ++i) v(i) += 1e-3 * static_cast<double>(i % 7);
    v.normalize();

    int steps = 0;
    double beta_prev = 0.0;
    for (int j = 0; j < k; ++j) {
        basis.col(j) = v;
        Eigen::VectorXd w = m * v;
        const double alpha = v.dot(w);
        alphas(j) = alpha;
        w -= alpha * v;
        if (j > 0) w -= beta_prev * basis.col(j - 1);
        // full reorthogonalization against the stored basis
        w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
        const double beta = w.norm();
        betas(j) = beta;
        ++steps;
        if (beta < 1e-13) break;  // invariant subspace reached
        v = w / beta;
        beta_prev = beta;
    }

    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(steps, steps);
    for (int j = 0; j < steps; ++j) {
        tri(j, j) = alphas(j);
        if (j + 1 < steps) tri(j, j + 1) = tri(j + 1, j) = betas(j);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace coreg
