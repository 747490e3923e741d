#ifndef CTRW_MATRIX_HPP
#define CTRW_MATRIX_HPP

// Dense row-major matrix and an LU solver with partial pivoting.
// Sized for the target scale of this project (J up to a few thousand).

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ctrw/errors.hpp"

namespace ctrw {

class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {a_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {a_.data() + i * cols_, cols_}; }

    std::span<double> data() { return a_; }
    std::span<const double> data() const { return a_; }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    // y = A x
    void matvec(std::span<const double> x, std::span<double> y) const {
        for (std::size_t i = 0; i < rows_; ++i) {
            const double* r = a_.data() + i * cols_;
            double acc = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) acc += r[j] * x[j];
            y[i] = acc;
        }
    }

    // y = A^T x, streamed along rows so access stays unit-stride.
    void transpose_matvec(std::span<const double> x, std::span<double> y) const {
        for (std::size_t j = 0; j < cols_; ++j) y[j] = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            const double* r = a_.data() + i * cols_;
            const double xi = x[i];
            if (xi == 0.0) continue;
            for (std::size_t j = 0; j < cols_; ++j) y[j] += r[j] * xi;
        }
    }

    Matrix operator*(const Matrix& b) const {
        Matrix c(rows_, b.cols_);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t k = 0; k < cols_; ++k) {
                const double aik = (*this)(i, k);
                if (aik == 0.0) continue;
                const double* br = b.a_.data() + k * b.cols_;
                double* cr = c.a_.data() + i * c.cols_;
                for (std::size_t j = 0; j < b.cols_; ++j) cr[j] += aik * br[j];
            }
        }
        return c;
    }

    Matrix& operator+=(const Matrix& b) {
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += b.a_[i];
        return *this;
    }

    Matrix& operator*=(double c) {
        for (double& v : a_) v *= c;
        return *this;
    }

    double norm_inf() const {  // max absolute row sum
        double best = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
            if (s > best) best = s;
        }
        return best;
    }

    double norm_one() const {  // max absolute column sum
        std::vector<double> col(cols_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) col[j] += std::abs((*this)(i, j));
        double best = 0.0;
        for (double s : col)
            if (s > best) best = s;
        return best;
    }

    double norm_frobenius() const {
        double s = 0.0;
        for (double v : a_) s += v * v;
        return std::sqrt(s);
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> a_;
};

inline double norm_inf(std::span<const double> v) {
    double best = 0.0;
    for (double x : v) {
        const double a = std::abs(x);
        if (a > best) best = a;
    }
    return best;
}

inline double norm_one(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

inline double norm_two(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// LU factorization with partial pivoting: P A = L U.
class LuSolver {
  public:
    explicit LuSolver(Matrix a) : lu_(std::move(a)), n_(lu_.rows()), perm_(n_) {
        if (lu_.rows() != lu_.cols()) throw InvalidParameterError("LuSolver: matrix must be square");
        factorize();
    }

    bool singular() const { return singular_; }

    std::vector<double> solve(std::span<const double> b) const {
        require_nonsingular();
        std::vector<double> x(n_);
        for (std::size_t i = 0; i < n_; ++i) x[i] = b[perm_[i]];
        forward_unit_lower(x);
        backward_upper(x);
        return x;
    }

    // Solve A^T x = b via U^T L^T P x = b.
    std::vector<double> solve_transposed(std::span<const double> b) const {
        require_nonsingular();
        std::vector<double> y(b.begin(), b.end());
        // U^T w = b: forward substitution on a lower-triangular matrix with U's diagonal.
        for (std::size_t i = 0; i < n_; ++i) {
            double acc = y[i];
            for (std::size_t k = 0; k < i; ++k) acc -= lu_(k, i) * y[k];
            y[i] = acc / lu_(i, i);
        }
        // L^T v = w: backward substitution, unit diagonal.
        for (std::size_t i = n_; i-- > 0;) {
            double acc = y[i];
            for (std::size_t k = i + 1; k < n_; ++k) acc -= lu_(k, i) * y[k];
            y[i] = acc;
        }
        std::vector<double> x(n_);
        for (std::size_t i = 0; i < n_; ++i) x[perm_[i]] = y[i];
        return x;
    }

    double determinant() const {
        if (singular_) return 0.0;
        double d = perm_sign_;
        for (std::size_t i = 0; i < n_; ++i) d *= lu_(i, i);
        return d;
    }

    // Hager-style estimate of ||A^{-1}||_1; multiply by ||A||_1 for cond_1.
    double inverse_norm_one_estimate() const {
        require_nonsingular();
        std::vector<double> x(n_, 1.0 / static_cast<double>(n_));
        double est = 0.0;
        for (int pass = 0; pass < 5; ++pass) {
            std::vector<double> y = solve(x);
            est = norm_one(y);
            std::vector<double> xi(n_);
            for (std::size_t i = 0; i < n_; ++i) xi[i] = (y[i] >= 0.0) ? 1.0 : -1.0;
            std::vector<double> z = solve_transposed(xi);
            std::size_t jmax = 0;
            double zmax = 0.0, zdotx = 0.0;
            for (std::size_t i = 0; i < n_; ++i) {
                zdotx += z[i] * x[i];
                const double a = std::abs(z[i]);
                if (a > zmax) {
                    zmax = a;
                    jmax = i;
                }
            }
            if (zmax <= zdotx) break;
            std::fill(x.begin(), x.end(), 0.0);
            x[jmax] = 1.0;
        }
        return est;
    }

  private:
    void factorize() {
        for (std::size_t i = 0; i < n_; ++i) perm_[i] = i;
        for (std::size_t col = 0; col < n_; ++col) {
            std::size_t piv = col;
            double best = std::abs(lu_(col, col));
            for (std::size_t r = col + 1; r < n_; ++r) {
                const double a = std::abs(lu_(r, col));
                if (a > best) {
                    best = a;
                    piv = r;
                }
            }
            if (best == 0.0) {
                singular_ = true;
                return;
            }
            if (piv != col) {
                for (std::size_t j = 0; j < n_; ++j) std::swap(lu_(piv, j), lu_(col, j));
                std::swap(perm_[piv], perm_[col]);
                perm_sign_ = -perm_sign_;
            }
            const double d = lu_(col, col);
            for (std::size_t r = col + 1; r < n_; ++r) {
                const double m = lu_(r, col) / d;
                lu_(r, col) = m;
                if (m == 0.0) continue;
                for (std::size_t j = col + 1; j < n_; ++j) lu_(r, j) -= m * lu_(col, j);
            }
        }
    }

    void forward_unit_lower(std::vector<double>& x) const {
        for (std::size_t i = 1; i < n_; ++i) {
            double acc = x[i];
            for (std::size_t k = 0; k < i; ++k) acc -= lu_(i, k) * x[k];
            x[i] = acc;
        }
    }

    void backward_upper(std::vector<double>& x) const {
        for (std::size_t i = n_; i-- > 0;) {
            double acc = x[i];
            for (std::size_t k = i + 1; k < n_; ++k) acc -= lu_(i, k) * x[k];
            x[i] = acc / lu_(i, i);
        }
    }

    void require_nonsingular() const {
        if (singular_) throw SingularSystemError("LU solve on singular matrix");
    }

    Matrix lu_;
    std::size_t n_ = 0;
    std::vector<std::size_t> perm_;
    double perm_sign_ = 1.0;
    bool singular_ = false;
};

}  // namespace ctrw

#endif
