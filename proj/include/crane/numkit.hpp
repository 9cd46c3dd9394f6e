#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

#include "crane/errors.hpp"

namespace crane::numkit {

/// Dense real matrix, row-major storage. Sized for control-design work
/// (a handful of rows/columns); not a general linear-algebra library.
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols, double fill = 0.0);
    Mat(int rows, int cols, std::initializer_list<double> entries);

    static Mat identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

    Mat transpose() const;
    Mat operator*(const Mat& rhs) const;
    Mat operator+(const Mat& rhs) const;
    Mat operator-(const Mat& rhs) const;
    Mat operator*(double s) const;

    /// Max row sum of absolute values.
    double norm_inf() const;
    /// Largest absolute entry.
    double max_abs() const;
    bool all_finite() const;

    std::vector<double> mul_vec(const std::vector<double>& x) const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> a_;
};

using Complex = std::complex<double>;

/// Eigenvalue set of a real matrix; complex values come in conjugate pairs.
struct Spectrum {
    std::vector<Complex> values;
};

/// Solve a·x = b by Gaussian elimination with partial pivoting.
/// Throws SingularMatrix when a pivot falls below 1e-12 times the
/// largest entry magnitude of a.
Mat solve_linear(const Mat& a, const Mat& b);

/// Determinant via pivoted elimination, sign-tracked. Returns 0.0 for
/// (structurally) singular input instead of throwing.
double determinant(const Mat& a);

/// Numerical rank: pivots above rel_tol times the largest entry
/// magnitude after row elimination with partial pivoting.
int rank(const Mat& a, double rel_tol = 1e-9);

/// All eigenvalues of a real square matrix (n <= 10): Hessenberg
/// reduction followed by shifted-QR iteration. Throws NoConvergence
/// if the sweep cap (500*n) is exceeded.
Spectrum eig_general(const Mat& a);

/// Eigenvalues of a symmetric matrix in ascending order via cyclic
/// Jacobi rotations. Throws NotSymmetric if the input is not symmetric
/// to within 1e-10 relative.
std::vector<double> eig_symmetric(const Mat& a);

/// Solve P*a_cl + a_cl^T*P = -q for symmetric P by vectorizing into an
/// n^2-by-n^2 linear system. Throws SingularMatrix when eigenvalue
/// pairs of a_cl sum to zero (a_cl not Hurwitz).
Mat lyapunov_solve(const Mat& a_cl, const Mat& q);

} // namespace crane::numkit
