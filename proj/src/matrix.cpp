#include "rsm/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsm/error.hpp"

namespace rsm {

namespace {

void check_shape(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) {
        throw DimensionError("matrix shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                             " is empty");
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
    check_shape(rows, cols);
    data_.assign(rows * cols, 0.0);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    check_shape(rows, cols);
    if (data_.size() != rows * cols) {
        throw DimensionError("matrix payload has " + std::to_string(data_.size()) +
                             " values, expected " + std::to_string(rows * cols));
    }
    if (!all_finite()) throw ConfigError("matrix payload contains non-finite values");
}

Matrix Matrix::filled(std::size_t rows, std::size_t cols, double value) {
    Matrix m(rows, cols);
    std::fill(m.data_.begin(), m.data_.end(), value);
    return m;
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Signal::Signal(std::size_t len) : data_(len, 0.0) {
    if (len == 0) throw DimensionError("signal length must be positive");
}

Signal::Signal(std::vector<double> data) : data_(std::move(data)) {
    if (data_.empty()) throw DimensionError("signal length must be positive");
    if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); })) {
        throw ConfigError("signal contains non-finite values");
    }
}

Matrix Signal::as_row_matrix() const { return Matrix(1, data_.size(), data_); }

Signal Signal::from_matrix(const Matrix& m) {
    if (m.rows() != 1 && m.cols() != 1) {
        throw DimensionError("signal file must be 1xn or nx1, got " + std::to_string(m.rows()) +
                             "x" + std::to_string(m.cols()));
    }
    return Signal(std::vector<double>(m.data().begin(), m.data().end()));
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm1(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += std::abs(v);
    return s;
}

double max_abs(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s = std::max(s, std::abs(v));
    return s;
}

double ordered_sum(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v;
    return s;
}

}  // namespace rsm
