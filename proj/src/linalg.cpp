#include "qwb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

namespace qwb {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Complex(1.0, 0.0);
    return m;
}

Matrix Matrix::adjoint() const {
    Matrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
}

Matrix Matrix::transpose() const {
    Matrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
    return out;
}

bool Matrix::is_finite() const {
    for (const Complex& z : a_)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

Matrix& Matrix::operator+=(const Matrix& rhs) {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
        throw std::invalid_argument("matrix addition: shape mismatch");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += rhs.a_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
        throw std::invalid_argument("matrix subtraction: shape mismatch");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= rhs.a_[i];
    return *this;
}

Matrix& Matrix::operator*=(Complex s) {
    for (Complex& z : a_) z *= s;
    return *this;
}

Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }

Matrix operator*(const Matrix& lhs, const Matrix& rhs) {
    if (lhs.cols() != rhs.rows()) throw std::invalid_argument("matrix product: shape mismatch");
    Matrix out(lhs.rows(), rhs.cols());
    for (std::size_t r = 0; r < lhs.rows(); ++r) {
        for (std::size_t k = 0; k < lhs.cols(); ++k) {
            const Complex f = lhs(r, k);
            if (f == Complex(0.0, 0.0)) continue;
            for (std::size_t c = 0; c < rhs.cols(); ++c) out(r, c) += f * rhs(k, c);
        }
    }
    return out;
}

Matrix operator*(Complex s, Matrix m) { return m *= s; }

Vector operator*(const Matrix& m, const Vector& x) {
    if (m.cols() != x.size()) throw std::invalid_argument("matrix-vector product: shape mismatch");
    Vector out(m.rows(), Complex(0.0, 0.0));
    for (std::size_t r = 0; r < m.rows(); ++r) {
        Complex acc(0.0, 0.0);
        for (std::size_t c = 0; c < m.cols(); ++c) acc += m(r, c) * x[c];
        out[r] = acc;
    }
    return out;
}

Complex inner(const Vector& bra, const Vector& ket) {
    if (bra.size() != ket.size()) throw std::invalid_argument("inner product: length mismatch");
    Complex acc(0.0, 0.0);
    for (std::size_t i = 0; i < bra.size(); ++i) acc += std::conj(bra[i]) * ket[i];
    return acc;
}

double norm2(const Vector& v) {
    double acc = 0.0;
    for (const Complex& z : v) acc += std::norm(z);
    return std::sqrt(acc);
}

namespace {

[[noreturn]] void throw_singular(SingularMatrixError::Part part, double cond) {
    std::ostringstream msg;
    msg << "singular " << SingularMatrixError::part_name(part)
        << " matrix (pivot-ratio condition estimate " << cond << ")";
    throw SingularMatrixError(part, cond, msg.str());
}

} // namespace

Matrix invert(const Matrix& m, SingularMatrixError::Part part, double* condition_estimate) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw std::invalid_argument("invert: matrix must be square and nonempty");
    const std::size_t n = m.rows();

    Matrix work = m;
    Matrix inv = Matrix::identity(n);
    double max_pivot = 0.0;
    double min_pivot = std::numeric_limits<double>::infinity();

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot_row = col;
        double best = std::abs(work(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            double mag = std::abs(work(r, col));
            if (mag > best) {
                best = mag;
                pivot_row = r;
            }
        }
        max_pivot = std::max(max_pivot, best);
        min_pivot = std::min(min_pivot, best);
        if (best == 0.0 || best < kSingularPivotRatio * max_pivot) {
            double cond = best > 0.0 ? max_pivot / best : std::numeric_limits<double>::infinity();
            if (condition_estimate) *condition_estimate = cond;
            throw_singular(part, cond);
        }
        if (pivot_row != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(work(col, c), work(pivot_row, c));
                std::swap(inv(col, c), inv(pivot_row, c));
            }
        }
        const Complex p = work(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            work(col, c) /= p;
            inv(col, c) /= p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const Complex f = work(r, col);
            if (f == Complex(0.0, 0.0)) continue;
            for (std::size_t c = 0; c < n; ++c) {
                work(r, c) -= f * work(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    if (condition_estimate) *condition_estimate = max_pivot / min_pivot;
    return inv;
}

Vector direct_solve(const Matrix& m, const Vector& b) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw std::invalid_argument("direct_solve: matrix must be square and nonempty");
    if (b.size() != m.rows()) throw std::invalid_argument("direct_solve: rhs length mismatch");
    const std::size_t n = m.rows();

    Matrix work = m;
    Vector rhs = b;
    double max_pivot = 0.0;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot_row = col;
        double best = std::abs(work(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            double mag = std::abs(work(r, col));
            if (mag > best) {
                best = mag;
                pivot_row = r;
            }
        }
        max_pivot = std::max(max_pivot, best);
        if (best == 0.0 || best < kSingularPivotRatio * max_pivot) {
            double cond = best > 0.0 ? max_pivot / best : std::numeric_limits<double>::infinity();
            throw_singular(SingularMatrixError::Part::Generic, cond);
        }
        if (pivot_row != col) {
            for (std::size_t c = col; c < n; ++c) std::swap(work(col, c), work(pivot_row, c));
            std::swap(rhs[col], rhs[pivot_row]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const Complex f = work(r, col) / work(col, col);
            if (f == Complex(0.0, 0.0)) continue;
            work(r, col) = Complex(0.0, 0.0);
            for (std::size_t c = col + 1; c < n; ++c) work(r, c) -= f * work(col, c);
            rhs[r] -= f * rhs[col];
        }
    }

    Vector x(n);
    for (std::size_t i = n; i-- > 0;) {
        Complex acc = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= work(i, c) * x[c];
        x[i] = acc / work(i, i);
    }
    return x;
}

Matrix woodbury_inverse(const Matrix& a, const Matrix& u, const Matrix& c, const Matrix& v) {
    const std::size_t n = a.rows();
    const std::size_t k = c.rows();
    if (a.rows() != a.cols() || n == 0) throw std::invalid_argument("woodbury_inverse: A must be square");
    if (c.rows() != c.cols() || k == 0) throw std::invalid_argument("woodbury_inverse: C must be square");
    if (u.rows() != n || u.cols() != k) throw std::invalid_argument("woodbury_inverse: U must be N x k");
    if (v.rows() != k || v.cols() != n) throw std::invalid_argument("woodbury_inverse: V must be k x N");

    Matrix a_inv = invert(a, SingularMatrixError::Part::A);
    Matrix c_inv = invert(c, SingularMatrixError::Part::C);
    Matrix a_inv_u = a_inv * u;           // N x k
    Matrix v_a_inv = v * a_inv;           // k x N
    Matrix capacitance = c_inv + v * a_inv_u;
    Matrix cap_inv = invert(capacitance, SingularMatrixError::Part::Capacitance);
    return a_inv - a_inv_u * (cap_inv * v_a_inv);
}

std::vector<double> singular_values(const Matrix& m) {
    if (m.rows() == 0 || m.cols() == 0) throw std::invalid_argument("singular_values: empty matrix");
    const auto rows = static_cast<Eigen::Index>(m.rows());
    const auto cols = static_cast<Eigen::Index>(m.cols());

    bool real_only = true;
    for (const Complex& z : m.data()) {
        if (z.imag() != 0.0) {
            real_only = false;
            break;
        }
    }

    Eigen::VectorXd sv;
    if (real_only) {
        Eigen::MatrixXd em(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) em(r, c) = m(r, c).real();
        if (std::max(rows, cols) > 32) {
            sv = Eigen::BDCSVD<Eigen::MatrixXd>(em).singularValues();
        } else {
            sv = Eigen::JacobiSVD<Eigen::MatrixXd>(em).singularValues();
        }
    } else {
        Eigen::MatrixXcd em(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) em(r, c) = m(r, c);
        if (std::max(rows, cols) > 32) {
            sv = Eigen::BDCSVD<Eigen::MatrixXcd>(em).singularValues();
        } else {
            sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(em).singularValues();
        }
    }

    std::vector<double> out(sv.data(), sv.data() + sv.size());
    std::sort(out.begin(), out.end(), std::greater<double>());
    return out;
}

ConjecturedConditioning conjectured_condition(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size() || u.empty())
        throw std::invalid_argument("conjectured_condition: vectors must be nonempty and equal length");

    double uu = 0.0, vv = 0.0, uv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uu += u[i] * u[i];
        vv += v[i] * v[i];
        uv += u[i] * v[i];
    }
    const double nu = std::sqrt(uu);
    const double nv = std::sqrt(vv);

    const double x = uu * vv / 2.0 + uv + 1.0;
    double radicand = uu * vv + 4.0 * uv + 4.0;
    if (radicand < 0.0) {
        if (radicand < -1e-12 * std::max(1.0, uu * vv))
            throw ConjectureDomainError("conjectured_condition: negative inner radicand");
        radicand = 0.0;
    }
    const double y = nu * nv * std::sqrt(radicand);

    double lower = x - y / 2.0;
    if (lower < 0.0) {
        if (lower < -1e-9 * std::max(1.0, x))
            throw ConjectureDomainError("conjectured_condition: x - y/2 negative beyond tolerance");
        lower = 0.0;
    }
    const double s1 = std::sqrt(x + y / 2.0);
    const double s2 = std::sqrt(lower);
    if (s2 == 0.0)
        throw ConjectureDomainError("conjectured_condition: I + u v^T is singular (s_min = 0)");

    return ConjecturedConditioning{s1 / s2, s1, s2, x, y};
}

ConjecturedConditioning conjectured_condition(const Vector& u, const Vector& v) {
    std::vector<double> ur(u.size()), vr(v.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i].imag() != 0.0)
            throw std::invalid_argument("conjectured_condition: complex input rejected (real vectors only)");
        ur[i] = u[i].real();
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i].imag() != 0.0)
            throw std::invalid_argument("conjectured_condition: complex input rejected (real vectors only)");
        vr[i] = v[i].real();
    }
    return conjectured_condition(std::span<const double>(ur), std::span<const double>(vr));
}

} // namespace qwb
