#pragma once

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace cbc {

/// Raised for malformed arguments (dimension mismatch, out-of-domain values).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Small dense real matrix, row-major.
///
/// Sized for Jacobians and controllability matrices of low-dimensional
/// systems; no expression templates, no aliasing tricks.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix column(std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }
    bool square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> data() const noexcept { return data_; }

    /// Largest absolute entry; 0 for an empty matrix.
    double max_abs() const noexcept;
    bool all_finite() const noexcept;

    Matrix transpose() const;
    /// Copy of columns [first, first + count).
    Matrix columns(std::size_t first, std::size_t count) const;
    /// Horizontal concatenation [*this, right].
    Matrix hcat(const Matrix& right) const;
    /// Vertical concatenation [*this; below].
    Matrix vcat(const Matrix& below) const;

    Matrix& operator+=(const Matrix& rhs);
    Matrix& operator-=(const Matrix& rhs);
    Matrix& operator*=(double s);

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix lhs, const Matrix& rhs);
Matrix operator-(Matrix lhs, const Matrix& rhs);
Matrix operator*(const Matrix& lhs, const Matrix& rhs);
Matrix operator*(double s, Matrix m);

std::ostream& operator<<(std::ostream& os, const Matrix& m);

/// Numerical rank by Gaussian elimination with full pivoting. A pivot counts
/// when it exceeds `tol * max_abs(m)`.
std::size_t mat_rank(const Matrix& m, double tol = 1e-9);

/// Determinant by LU with partial pivoting. Throws InputError if not square.
double determinant(const Matrix& m);

}  // namespace cbc
