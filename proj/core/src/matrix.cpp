#include "cbc/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <utility>

namespace cbc {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_) throw InputError("Matrix: ragged initializer");
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::column(std::span<const double> values) {
    Matrix m(values.size(), 1);
    std::copy(values.begin(), values.end(), m.data_.begin());
    return m;
}

double Matrix::max_abs() const noexcept {
    double best = 0.0;
    for (double v : data_) best = std::max(best, std::abs(v));
    return best;
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Matrix Matrix::columns(std::size_t first, std::size_t count) const {
    if (first + count > cols_) throw InputError("Matrix::columns: range out of bounds");
    Matrix out(rows_, count);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < count; ++c) out(r, c) = (*this)(r, first + c);
    return out;
}

Matrix Matrix::hcat(const Matrix& right) const {
    if (empty()) return right;
    if (right.empty()) return *this;
    if (rows_ != right.rows_) throw InputError("Matrix::hcat: row count mismatch");
    Matrix out(rows_, cols_ + right.cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) out(r, c) = (*this)(r, c);
        for (std::size_t c = 0; c < right.cols_; ++c) out(r, cols_ + c) = right(r, c);
    }
    return out;
}

Matrix Matrix::vcat(const Matrix& below) const {
    if (empty()) return below;
    if (below.empty()) return *this;
    if (cols_ != below.cols_) throw InputError("Matrix::vcat: column count mismatch");
    Matrix out(rows_ + below.rows_, cols_);
    std::copy(data_.begin(), data_.end(), out.data_.begin());
    std::copy(below.data_.begin(), below.data_.end(), out.data_.begin() + static_cast<std::ptrdiff_t>(data_.size()));
    return out;
}

Matrix& Matrix::operator+=(const Matrix& rhs) {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw InputError("Matrix +: dimension mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw InputError("Matrix -: dimension mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
Matrix operator*(double s, Matrix m) { return m *= s; }

Matrix operator*(const Matrix& lhs, const Matrix& rhs) {
    if (lhs.cols() != rhs.rows()) throw InputError("Matrix *: inner dimension mismatch");
    Matrix out(lhs.rows(), rhs.cols());
    for (std::size_t r = 0; r < lhs.rows(); ++r)
        for (std::size_t k = 0; k < lhs.cols(); ++k) {
            const double a = lhs(r, k);
            if (a == 0.0) continue;
            for (std::size_t c = 0; c < rhs.cols(); ++c) out(r, c) += a * rhs(k, c);
        }
    return out;
}

std::ostream& operator<<(std::ostream& os, const Matrix& m) {
    os << '[';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        os << (r ? "; " : "");
        for (std::size_t c = 0; c < m.cols(); ++c) os << (c ? ", " : "") << m(r, c);
    }
    return os << ']';
}

std::size_t mat_rank(const Matrix& m, double tol) {
    if (m.empty()) return 0;
    const double scale = m.max_abs();
    if (scale == 0.0) return 0;
    const double threshold = tol * scale;

    Matrix w = m;
    const std::size_t rows = w.rows();
    const std::size_t cols = w.cols();
    std::vector<std::size_t> col_order(cols);
    for (std::size_t c = 0; c < cols; ++c) col_order[c] = c;

    std::size_t rank = 0;
    for (; rank < std::min(rows, cols); ++rank) {
        std::size_t pr = rank, pc = rank;
        double best = 0.0;
        for (std::size_t r = rank; r < rows; ++r)
            for (std::size_t c = rank; c < cols; ++c) {
                const double v = std::abs(w(r, col_order[c]));
                if (v > best) {
                    best = v;
                    pr = r;
                    pc = c;
                }
            }
        if (best <= threshold) break;
        std::swap(col_order[rank], col_order[pc]);
        if (pr != rank)
            for (std::size_t c = 0; c < cols; ++c) std::swap(w(rank, c), w(pr, c));
        const std::size_t piv_col = col_order[rank];
        const double pivot = w(rank, piv_col);
        for (std::size_t r = rank + 1; r < rows; ++r) {
            const double factor = w(r, piv_col) / pivot;
            if (factor == 0.0) continue;
            for (std::size_t c = 0; c < cols; ++c) w(r, c) -= factor * w(rank, c);
        }
    }
    return rank;
}

double determinant(const Matrix& m) {
    if (!m.square()) throw InputError("determinant: matrix is not square");
    const std::size_t n = m.rows();
    if (n == 0) return 1.0;
    Matrix w = m;
    double det = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pr = k;
        for (std::size_t r = k + 1; r < n; ++r)
            if (std::abs(w(r, k)) > std::abs(w(pr, k))) pr = r;
        if (w(pr, k) == 0.0) return 0.0;
        if (pr != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(w(k, c), w(pr, c));
            det = -det;
        }
        det *= w(k, k);
        for (std::size_t r = k + 1; r < n; ++r) {
            const double factor = w(r, k) / w(k, k);
            for (std::size_t c = k; c < n; ++c) w(r, c) -= factor * w(k, c);
        }
    }
    return det;
}

}  // namespace cbc
