#pragma once

// Minimal row-major dense matrices for the transformer. Views alias the flat
// parameter and gradient buffers; Matrix owns activations.

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace mundartlex::linalg {

template <class T>
struct ConstView {
    const T* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const T> row(std::size_t r) const { return {data + r * cols, cols}; }
};

template <class T>
struct View {
    T* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<T> row(std::size_t r) const { return {data + r * cols, cols}; }
    operator ConstView<T>() const { return {data, rows, cols}; }
};

template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }
    std::vector<T>& values() noexcept { return data_; }
    const std::vector<T>& values() const noexcept { return data_; }

    View<T> view() { return {data_.data(), rows_, cols_}; }
    ConstView<T> view() const { return {data_.data(), rows_, cols_}; }
    operator ConstView<T>() const { return view(); }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

/// a (m×k) · b (k×n)
template <class T>
Matrix<T> matmul(ConstView<T> a, ConstView<T> b) {
    assert(a.cols == b.rows);
    Matrix<T> c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        T* crow = c.data() + i * b.cols;
        for (std::size_t k = 0; k < a.cols; ++k) {
            const T aik = a(i, k);
            if (aik == T{}) continue;
            const T* brow = b.data + k * b.cols;
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

/// a (m×k) · bᵀ where b is (n×k)
template <class T>
Matrix<T> matmul_nt(ConstView<T> a, ConstView<T> b) {
    assert(a.cols == b.cols);
    Matrix<T> c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const T* arow = a.data + i * a.cols;
        for (std::size_t j = 0; j < b.rows; ++j) {
            const T* brow = b.data + j * b.cols;
            T s{};
            for (std::size_t k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
            c(i, j) = s;
        }
    }
    return c;
}

/// c += aᵀ · b with a (m×k), b (m×n), c (k×n)
template <class T>
void add_matmul_tn(ConstView<T> a, ConstView<T> b, View<T> c) {
    assert(a.rows == b.rows && c.rows == a.cols && c.cols == b.cols);
    for (std::size_t r = 0; r < a.rows; ++r) {
        const T* brow = b.data + r * b.cols;
        for (std::size_t i = 0; i < a.cols; ++i) {
            const T ari = a(r, i);
            if (ari == T{}) continue;
            T* crow = c.data + i * c.cols;
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += ari * brow[j];
        }
    }
}

template <class T>
void add_inplace(Matrix<T>& a, ConstView<T> b) {
    assert(a.rows() == b.rows && a.cols() == b.cols);
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += b.data[i];
}

/// Adds `row` to every row of `a`.
template <class T>
void add_row_broadcast(Matrix<T>& a, std::span<const T> row) {
    assert(row.size() == a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) a(r, c) += row[c];
}

/// out += column sums of a
template <class T>
void add_col_sums(ConstView<T> a, std::span<T> out) {
    assert(out.size() == a.cols);
    for (std::size_t r = 0; r < a.rows; ++r)
        for (std::size_t c = 0; c < a.cols; ++c) out[c] += a(r, c);
}

}  // namespace mundartlex::linalg
