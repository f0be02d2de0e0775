#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "qwb/errors.hpp"

namespace qwb {

using Complex = std::complex<double>;
using Vector = std::vector<Complex>;

/// Dense row-major complex matrix. Plain value type; all algebra below is
/// written for small desk-scale systems, not for BLAS-level throughput.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols, Complex(0.0, 0.0)) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return a_.empty(); }

    Complex& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

    std::span<const Complex> data() const { return a_; }
    std::span<Complex> data() { return a_; }

    Matrix adjoint() const;
    Matrix transpose() const;

    /// No NaN/Inf anywhere.
    bool is_finite() const;

    Matrix& operator+=(const Matrix& rhs);
    Matrix& operator-=(const Matrix& rhs);
    Matrix& operator*=(Complex s);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> a_;
};

Matrix operator+(Matrix lhs, const Matrix& rhs);
Matrix operator-(Matrix lhs, const Matrix& rhs);
Matrix operator*(const Matrix& lhs, const Matrix& rhs);
Matrix operator*(Complex s, Matrix m);
Vector operator*(const Matrix& m, const Vector& x);

/// <bra|ket> with the left argument conjugated.
Complex inner(const Vector& bra, const Vector& ket);
double norm2(const Vector& v);

/// Largest/smallest |entry| ratio threshold below which a pivot is treated as
/// zero: scale-invariant singularity test for double precision.
inline constexpr double kSingularPivotRatio = 1e-12;

/// Inverse by Gauss-Jordan elimination with partial pivoting. Throws
/// SingularMatrixError tagged with `part` when the smallest pivot falls under
/// kSingularPivotRatio times the largest. If `condition_estimate` is non-null
/// it receives the pivot-magnitude ratio (a cheap condition estimate).
Matrix invert(const Matrix& m,
              SingularMatrixError::Part part = SingularMatrixError::Part::Generic,
              double* condition_estimate = nullptr);

/// Solves m x = b by Gaussian elimination with partial pivoting.
Vector direct_solve(const Matrix& m, const Vector& b);

/// (A + UCV)^-1 assembled as A^-1 - A^-1 U (C^-1 + V A^-1 U)^-1 V A^-1.
/// Singularity of A, C and the capacitance matrix are reported distinctly.
Matrix woodbury_inverse(const Matrix& a, const Matrix& u, const Matrix& c, const Matrix& v);

/// Singular values in descending order (zeros allowed).
std::vector<double> singular_values(const Matrix& m);

/// Closed-form largest/smallest singular values of I + u v^T for real u, v.
struct ConjecturedConditioning {
    double kappa;
    double s_max;
    double s_min;
    double x_aux;
    double y_aux;
};

ConjecturedConditioning conjectured_condition(std::span<const double> u, std::span<const double> v);

/// Convenience overload; rejects inputs with any nonzero imaginary part
/// (the closed form is stated for real vectors only).
ConjecturedConditioning conjectured_condition(const Vector& u, const Vector& v);

} // namespace qwb
