#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "coreg/matrix.hpp"
#include "coreg/rng.hpp"
#include "coreg/stats.hpp"

using namespace coreg;

TEST_CASE("sample_covariance matches hand computation", "[stats]") {
    Eigen::MatrixXd e(2, 2);
    e << 1, -1, -1, 1;
    SymmetricMatrix cov = sample_covariance(DataMatrix::vars_by_samples(e));
    // divisor n-1 = 1
    CHECK(cov(0, 0) == Catch::Approx(2.0));
    CHECK(cov(0, 1) == Catch::Approx(-2.0));
    CHECK(cov(1, 0) == Catch::Approx(-2.0));
    CHECK(cov(1, 1) == Catch::Approx(2.0));
}

TEST_CASE("sample_covariance of constant rows is zero", "[stats]") {
    Eigen::MatrixXd e = Eigen::MatrixXd::Constant(3, 5, 4.2);
    SymmetricMatrix cov = sample_covariance(DataMatrix::vars_by_samples(e));
    CHECK(cov.matrix().cwiseAbs().maxCoeff() == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("sample_covariance of iid normals approaches identity", "[stats]") {
    RngStream rng(20250810, 1);
    Eigen::MatrixXd e = rng.normal_matrix(3, 10000);
    SymmetricMatrix cov = sample_covariance(DataMatrix::vars_by_samples(e));
    const Eigen::MatrixXd diff = cov.matrix() - Eigen::MatrixXd::Identity(3, 3);
    CHECK(diff.cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("sample_covariance needs two samples", "[stats]") {
    Eigen::MatrixXd e(3, 1);
    e << 1, 2, 3;
    CHECK_THROWS_AS(sample_covariance(DataMatrix::vars_by_samples(e)),
                    dimension_error);
}

TEST_CASE("sample_covariance accepts samples-by-variables orientation", "[stats]") {
    Eigen::MatrixXd e(2, 2);
    e << 1, -1, -1, 1;
    SymmetricMatrix a = sample_covariance(DataMatrix::vars_by_samples(e));
    SymmetricMatrix b = sample_covariance(
        DataMatrix(e.transpose(), Orientation::SamplesByVariables));
    CHECK((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample_covariance is PSD up to round-off", "[stats]") {
    RngStream rng(7, 2);
    for (int rep = 0; rep < 5; ++rep) {
        Eigen::MatrixXd e = rng.normal_matrix(8, 6);
        SymmetricMatrix cov = sample_covariance(DataMatrix::vars_by_samples(e));
        CHECK(min_eigenvalue(cov.matrix()) >= -1e-10);
    }
}

TEST_CASE("to_correlation rescales to unit diagonal", "[stats]") {
    Eigen::MatrixXd s(2, 2);
    s << 4, 2, 2, 1;
    SymmetricMatrix corr = to_correlation(SymmetricMatrix(s));
    CHECK(corr(0, 0) == Catch::Approx(1.0));
    CHECK(corr(0, 1) == Catch::Approx(1.0));  // 2 / sqrt(4*1)
    CHECK(corr(1, 1) == Catch::Approx(1.0));
}

TEST_CASE("to_correlation fixed points", "[stats]") {
    SymmetricMatrix ident(Eigen::MatrixXd::Identity(3, 3));
    CHECK((to_correlation(ident).matrix() - ident.matrix()).cwiseAbs().maxCoeff() ==
          0.0);

    Eigen::MatrixXd d(2, 2);
    d << 2, 0, 0, 3;
    SymmetricMatrix corr = to_correlation(SymmetricMatrix(d));
    CHECK((corr.matrix() - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() ==
          0.0);
}

TEST_CASE("to_correlation is idempotent", "[stats]") {
    RngStream rng(11, 3);
    Eigen::MatrixXd e = rng.normal_matrix(6, 40);
    SymmetricMatrix cov = sample_covariance(DataMatrix::vars_by_samples(e));
    SymmetricMatrix once = to_correlation(cov);
    SymmetricMatrix twice = to_correlation(once);
    CHECK((once.matrix() - twice.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("to_correlation names the degenerate index", "[stats]") {
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(3, 3);
    s(1, 1) = 0.0;
    try {
        to_correlation(SymmetricMatrix(s));
        FAIL("expected numeric_error");
    } catch (const numeric_error& e) {
        CHECK(std::string(e.what()).find("index 1") != std::string::npos);
    }
}

TEST_CASE("nearest_psd_correlation returns PSD input unchanged", "[stats]") {
    Eigen::MatrixXd r(3, 3);
    r << 1, 0.5, 0.2, 0.5, 1, 0.3, 0.2, 0.3, 1;
    SymmetricMatrix in(r);
    SymmetricMatrix out = nearest_psd_correlation(in);
    CHECK((out.matrix() - in.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("nearest_psd_correlation clips the 2x2 counterexample", "[stats]") {
    // eigenvalues of [[1,1.2],[1.2,1]] are 2.2 and -0.2; clipping and
    // rescaling the diagonal turns it into the all-ones matrix.
    Eigen::MatrixXd r(2, 2);
    r << 1, 1.2, 1.2, 1;
    SymmetricMatrix out = nearest_psd_correlation(SymmetricMatrix(r));
    CHECK(out(0, 0) == Catch::Approx(1.0));
    CHECK(out(0, 1) == Catch::Approx(1.0));
    CHECK(out(1, 1) == Catch::Approx(1.0));
}

TEST_CASE("nearest_psd_correlation repairs random indefinite inputs", "[stats]") {
    RngStream rng(13, 4);
    for (int rep = 0; rep < 10; ++rep) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Identity(10, 10);
        for (int i = 0; i < 10; ++i)
            for (int j = i + 1; j < 10; ++j)
                m(i, j) = m(j, i) = 0.9 * (2.0 * rng.uniform() - 1.0);
        SymmetricMatrix out = nearest_psd_correlation(SymmetricMatrix(m));
        CHECK(min_eigenvalue(out.matrix()) >= -1e-10);
        CHECK((out.matrix().diagonal().array() - 1.0).abs().maxCoeff() < 1e-12);
        // idempotent, fixed point once repaired
        SymmetricMatrix again = nearest_psd_correlation(out);
        CHECK((again.matrix() - out.matrix()).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("mvn_sample covariance converges", "[stats]") {
    RngStream rng(20250810, 5);
    SymmetricMatrix ident(Eigen::MatrixXd::Identity(3, 3));
    DataMatrix draws = mvn_sample(Eigen::VectorXd::Zero(3), ident, 10000, rng);
    SymmetricMatrix cov = sample_covariance(draws);
    CHECK((cov.matrix() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <
          0.1);
}

TEST_CASE("mvn_sample is deterministic per stream", "[stats]") {
    SymmetricMatrix sigma(Eigen::MatrixXd::Identity(2, 2));
    RngStream a(42, 7), b(42, 7);
    DataMatrix da = mvn_sample(Eigen::VectorXd::Zero(2), sigma, 50, a);
    DataMatrix db = mvn_sample(Eigen::VectorXd::Zero(2), sigma, 50, b);
    CHECK((da.values() - db.values()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mvn_sample matches a scalar variance", "[stats]") {
    Eigen::MatrixXd s(1, 1);
    s << 4.0;
    RngStream rng(20250810, 6);
    DataMatrix draws = mvn_sample(Eigen::VectorXd::Zero(1), SymmetricMatrix(s),
                                  10000, rng);
    const double var = sample_covariance(draws)(0, 0);
    CHECK(var > 3.6);
    CHECK(var < 4.4);
}

TEST_CASE("mvn_sample rejects non-PSD sigma", "[stats]") {
    Eigen::MatrixXd s(2, 2);
    s << 1, 1.2, 1.2, 1;
    RngStream rng(1, 1);
    CHECK_THROWS_AS(mvn_sample(Eigen::VectorXd::Zero(2), SymmetricMatrix(s), 10, rng),
                    numeric_error);
}

TEST_CASE("mvn_sample accepts singular PSD sigma", "[stats]") {
    Eigen::MatrixXd s(2, 2);
    s << 1, 1, 1, 1;  // rank one
    RngStream rng(9, 9);
    DataMatrix d = mvn_sample(Eigen::VectorXd::Zero(2), SymmetricMatrix(s), 100, rng);
    CHECK((d.values().row(0) - d.values().row(1)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("mvn_sample diagonal variances track sigma", "[stats]") {
    Eigen::VectorXd diag(4);
    diag << 0.5, 1.0, 2.0, 4.0;
    SymmetricMatrix sigma(Eigen::MatrixXd(diag.asDiagonal()));
    RngStream rng(20250810, 8);
    DataMatrix draws = mvn_sample(Eigen::VectorXd::Zero(4), sigma, 10000, rng);
    SymmetricMatrix cov = sample_covariance(draws);
    for (int i = 0; i < 4; ++i)
        CHECK(std::abs(cov(i, i) - diag(i)) / diag(i) < 0.10);
}

TEST_CASE("RngStream streams replay and differ", "[stats]") {
    RngStream a(123, 4), b(123, 4), c(123, 5);
    bool all_equal = true, any_equal_c = false;
    for (int i = 0; i < 100; ++i) {
        const double va = a.normal(), vb = b.normal(), vc = c.normal();
        all_equal = all_equal && va == vb;
        any_equal_c = any_equal_c || va == vc;
    }
    CHECK(all_equal);
    CHECK_FALSE(any_equal_c);
}

TEST_CASE("spectral_norm_sym agrees with the eigensolver", "[stats]") {
    RngStream rng(3, 3);
    for (int rep = 0; rep < 5; ++rep) {
        Eigen::MatrixXd a = rng.normal_matrix(20, 20);
        Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym,
                                                          Eigen::EigenvaluesOnly);
        const double exact = es.eigenvalues().cwiseAbs().maxCoeff();
        CHECK(spectral_norm_sym(sym) == Catch::Approx(exact).epsilon(1e-6));
    }
}
