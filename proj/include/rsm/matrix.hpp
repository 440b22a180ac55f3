#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rsm {

/// Dense row-major matrix of doubles.
///
/// Rows index the polar angle and columns the azimuth when the matrix holds an
/// image; for a response matrix each row is one circular convolution kernel.
/// Constructors reject empty shapes and non-finite payloads. Mutable element
/// access is provided for kernels that build results in place; callers that
/// write non-finite values are responsible for the consequences.
class Matrix {
public:
    /// Zero-filled rows x cols matrix.
    Matrix(std::size_t rows, std::size_t cols);
    /// Takes ownership of a row-major payload; size must equal rows*cols.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    /// Filled with a constant value.
    static Matrix filled(std::size_t rows, std::size_t cols, double value);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }

    bool same_shape(const Matrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    bool all_finite() const noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

/// Length-n time series (detector response curve).
class Signal {
public:
    explicit Signal(std::size_t len);
    explicit Signal(std::vector<double> data);

    std::size_t size() const noexcept { return data_.size(); }
    double operator[](std::size_t j) const noexcept { return data_[j]; }
    double& operator[](std::size_t j) noexcept { return data_[j]; }
    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    /// 1 x n view used for persistence through the matrix formats.
    Matrix as_row_matrix() const;
    /// Accepts a 1 x n or n x 1 matrix.
    static Signal from_matrix(const Matrix& m);

    friend bool operator==(const Signal&, const Signal&) = default;

private:
    std::vector<double> data_;
};

// Elementwise helpers shared by the solvers and tests.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm1(std::span<const double> a);
double max_abs(std::span<const double> a);

/// Sum of a range in index order; deterministic regardless of threading.
double ordered_sum(std::span<const double> a);

}  // namespace rsm
