#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <vector>

#include "common.hpp"

namespace kms {

using Rational = boost::multiprecision::cpp_rational;
using RatMatrix = std::vector<std::vector<Rational>>;

// Dense row-major nonnegative integer matrix with overflow-checked products.
class IntMatrix {
public:
    IntMatrix() = default;
    IntMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0) {}

    static IntMatrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::int64_t& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    std::int64_t operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    IntMatrix transpose() const;
    // Returns false on 64-bit overflow.
    bool multiply(const IntMatrix& other, IntMatrix& out) const;
    Eigen::MatrixXd to_double() const;
    bool operator==(const IntMatrix& o) const = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<std::int64_t> data_;
};

double spectral_radius(const Eigen::MatrixXd& M, const Tolerances& tol = {});
std::vector<double> real_eigenvalues(const Eigen::MatrixXd& M, double imag_tol = 1e-9);

Eigen::MatrixXd principal_submatrix(const Eigen::MatrixXd& M, const std::vector<int>& idx);
std::vector<int> indices_of(const std::vector<bool>& mask);

// Forward closure of `start` along edges v -> w with M_i(v, w) > 0, i in F.
std::vector<bool> forward_closure(const std::vector<IntMatrix>& M, ColorSet F, const std::vector<bool>& start);

// Orthonormal basis of the null space; `ambiguous` flags singular values in the grey zone.
Eigen::MatrixXd nullspace(const Eigen::MatrixXd& A, double tol, bool* ambiguous = nullptr);

// Exact null space basis of a rational matrix (columns of the result).
RatMatrix rational_nullspace(const RatMatrix& A, int cols);
int rational_rank(RatMatrix A);

double rational_to_double(const Rational& r);

}  // namespace kms
