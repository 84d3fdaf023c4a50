#include "linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <deque>

namespace kms {

IntMatrix IntMatrix::identity(int n) {
    IntMatrix I(n, n);
    for (int i = 0; i < n; ++i) I(i, i) = 1;
    return I;
}

IntMatrix IntMatrix::transpose() const {
    IntMatrix T(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) T(c, r) = (*this)(r, c);
    return T;
}

bool IntMatrix::multiply(const IntMatrix& other, IntMatrix& out) const {
    if (cols_ != other.rows_) throw InternalError("IntMatrix::multiply shape mismatch");
    IntMatrix res(rows_, other.cols_);
    for (int r = 0; r < rows_; ++r) {
        for (int k = 0; k < cols_; ++k) {
            std::int64_t a = (*this)(r, k);
            if (a == 0) continue;
            for (int c = 0; c < other.cols_; ++c) {
                std::int64_t b = other(k, c);
                if (b == 0) continue;
                std::int64_t p;
                if (__builtin_mul_overflow(a, b, &p)) return false;
                if (__builtin_add_overflow(res(r, c), p, &res(r, c))) return false;
            }
        }
    }
    out = std::move(res);
    return true;
}

Eigen::MatrixXd IntMatrix::to_double() const {
    Eigen::MatrixXd M(rows_, cols_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) M(r, c) = static_cast<double>((*this)(r, c));
    return M;
}

namespace {

// Power iteration on I + M; for nonnegative M the dominant eigenvalue is 1 + rho.
double power_radius(const Eigen::MatrixXd& M, const Tolerances& tol) {
    const long n = M.rows();
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
    double lo = 0.0, hi = 0.0;
    for (int it = 0; it < tol.power_max_iter; ++it) {
        Eigen::VectorXd y = x + M * x;
        lo = std::numeric_limits<double>::infinity();
        hi = 0.0;
        for (long i = 0; i < n; ++i) {
            if (x(i) <= 0) continue;
            double r = y(i) / x(i);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        double s = y.maxCoeff();
        if (s <= 0) return 0.0;
        x = y / s;
        if (hi - lo <= tol.power_tol * std::max(1.0, hi)) break;
    }
    return std::max(0.0, 0.5 * (lo + hi) - 1.0);
}

}  // namespace

// Rounds values within solver noise of an integer.
static double snap_integer(double r) {
    double k = std::round(r);
    return std::abs(r - k) <= 1e-12 * std::max(1.0, k) ? k : r;
}

double spectral_radius(const Eigen::MatrixXd& M, const Tolerances& tol) {
    if (M.rows() == 0) return 0.0;
    if (M.rows() == 1) return std::abs(M(0, 0));
    if (M.rows() > tol.dense_eigen_max_dim) return snap_integer(power_radius(M, tol));
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    double r = 0.0;
    for (long i = 0; i < es.eigenvalues().size(); ++i) r = std::max(r, std::abs(es.eigenvalues()(i)));
    return snap_integer(r);
}

std::vector<double> real_eigenvalues(const Eigen::MatrixXd& M, double imag_tol) {
    std::vector<double> out;
    if (M.rows() == 0) return out;
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    for (long i = 0; i < es.eigenvalues().size(); ++i) {
        auto z = es.eigenvalues()(i);
        if (std::abs(z.imag()) <= imag_tol * std::max(1.0, std::abs(z))) out.push_back(z.real());
    }
    std::sort(out.begin(), out.end());
    return out;
}

Eigen::MatrixXd principal_submatrix(const Eigen::MatrixXd& M, const std::vector<int>& idx) {
    Eigen::MatrixXd S(idx.size(), idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < idx.size(); ++c) S(r, c) = M(idx[r], idx[c]);
    return S;
}

std::vector<int> indices_of(const std::vector<bool>& mask) {
    std::vector<int> out;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<bool> forward_closure(const std::vector<IntMatrix>& M, ColorSet F, const std::vector<bool>& start) {
    std::vector<bool> seen = start;
    std::deque<int> queue;
    for (std::size_t v = 0; v < start.size(); ++v)
        if (start[v]) queue.push_back(static_cast<int>(v));
    const int n = static_cast<int>(start.size());
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int i : colors_of(F)) {
            if (i >= static_cast<int>(M.size())) break;
            for (int w = 0; w < n; ++w) {
                if (M[i](v, w) > 0 && !seen[w]) {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    return seen;
}

Eigen::MatrixXd nullspace(const Eigen::MatrixXd& A, double tol, bool* ambiguous) {
    const long n = A.cols();
    if (ambiguous) *ambiguous = false;
    if (n == 0) return Eigen::MatrixXd(0, 0);
    if (A.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    long rank = 0;
    for (long i = 0; i < s.size(); ++i) {
        if (s(i) > tol) ++rank;
        if (ambiguous && s(i) > tol && s(i) < 1e3 * tol) *ambiguous = true;
    }
    return svd.matrixV().rightCols(n - rank);
}

namespace {

// Reduced row echelon form in place; returns pivot columns.
std::vector<int> rref(RatMatrix& A, int cols) {
    std::vector<int> pivots;
    int row = 0;
    const int rows = static_cast<int>(A.size());
    for (int c = 0; c < cols && row < rows; ++c) {
        int p = -1;
        for (int r = row; r < rows; ++r)
            if (A[r][c] != 0) {
                p = r;
                break;
            }
        if (p < 0) continue;
        std::swap(A[row], A[p]);
        Rational inv = 1 / A[row][c];
        for (int k = c; k < cols; ++k) A[row][k] *= inv;
        for (int r = 0; r < rows; ++r) {
            if (r == row || A[r][c] == 0) continue;
            Rational f = A[r][c];
            for (int k = c; k < cols; ++k) A[r][k] -= f * A[row][k];
        }
        pivots.push_back(c);
        ++row;
    }
    return pivots;
}

}  // namespace

RatMatrix rational_nullspace(const RatMatrix& A0, int cols) {
    RatMatrix A = A0;
    std::vector<int> pivots = rref(A, cols);
    std::vector<bool> is_pivot(cols, false);
    for (int p : pivots) is_pivot[p] = true;
    RatMatrix basis;
    for (int f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        std::vector<Rational> v(cols, Rational(0));
        v[f] = 1;
        for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -A[r][f];
        basis.push_back(std::move(v));
    }
    return basis;
}

int rational_rank(RatMatrix A) {
    if (A.empty()) return 0;
    return static_cast<int>(rref(A, static_cast<int>(A[0].size())).size());
}

double rational_to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace kms
