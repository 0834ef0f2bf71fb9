#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>

#include "coreg/error.hpp"

namespace coreg {

using Eigen::Index;

inline bool all_finite(const Eigen::MatrixXd& m) {
    return m.allFinite();
}

/// Layout tag for data matrices. The library's canonical layout is
/// variables-by-samples (p x n), matching Y = B X + E with Y in R^{p x n}.
enum class Orientation { VariablesBySamples, SamplesByVariables };

/// Dense real matrix with explicit row/column semantics. Entries are
/// validated finite on construction; dimensions must be at least 1 x 1.
class DataMatrix {
public:
    DataMatrix(Eigen::MatrixXd values, Orientation orientation)
        : values_(std::move(values)), orientation_(orientation) {
        if (values_.rows() < 1 || values_.cols() < 1)
            throw dimension_error("DataMatrix: dimensions must be >= 1, got " +
                                  std::to_string(values_.rows()) + "x" +
                                  std::to_string(values_.cols()));
        if (!all_finite(values_))
            throw invalid_input("DataMatrix: non-finite entry");
    }

    static DataMatrix vars_by_samples(Eigen::MatrixXd values) {
        return DataMatrix(std::move(values), Orientation::VariablesBySamples);
    }

    const Eigen::MatrixXd& values() const { return values_; }
    Orientation orientation() const { return orientation_; }
    Index n_rows() const { return values_.rows(); }
    Index n_cols() const { return values_.cols(); }

    Index n_variables() const {
        return orientation_ == Orientation::VariablesBySamples ? values_.rows()
                                                               : values_.cols();
    }
    Index n_samples() const {
        return orientation_ == Orientation::VariablesBySamples ? values_.cols()
                                                               : values_.rows();
    }

    /// Matrix in the canonical p x n layout (copies when stored transposed).
    Eigen::MatrixXd as_vars_by_samples() const {
        if (orientation_ == Orientation::VariablesBySamples) return values_;
        return values_.transpose();
    }

private:
    Eigen::MatrixXd values_;
    Orientation orientation_;
};

/// Symmetric real matrix. The lower triangle is mirrored on construction so
/// that m(i,j) == m(j,i) holds exactly afterwards.
class SymmetricMatrix {
public:
    explicit SymmetricMatrix(Eigen::MatrixXd m, double symmetry_tol = 1e-8)
        : m_(std::move(m)) {
        if (m_.rows() != m_.cols())
            throw dimension_error("SymmetricMatrix: matrix is " +
                                  std::to_string(m_.rows()) + "x" +
                                  std::to_string(m_.cols()) + ", expected square");
        if (m_.rows() < 1) throw dimension_error("SymmetricMatrix: empty matrix");
        if (!all_finite(m_)) throw invalid_input("SymmetricMatrix: non-finite entry");
        const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
        if (asym > symmetry_tol)
            throw invalid_input("SymmetricMatrix: asymmetry " + std::to_string(asym) +
                                " exceeds tolerance");
        // Mirror the lower triangle so equality is exact.
        for (Index i = 0; i < m_.rows(); ++i)
            for (Index j = 0; j < i; ++j) m_(j, i) = m_(i, j);
    }

    Index dim() const { return m_.rows(); }
    const Eigen::MatrixXd& matrix() const { return m_; }
    double operator()(Index i, Index j) const { return m_(i, j); }

private:
    Eigen::MatrixXd m_;
};

}  // namespace coreg
