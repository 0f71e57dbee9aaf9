#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace famstream {

using Vector = std::vector<double>;

// Row-major dense matrix; one row per feature vector.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    // An empty matrix with a fixed row width, to be grown with push_row.
    static Matrix with_cols(std::size_t cols) {
        Matrix m;
        m.cols_ = cols;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    // Throws famstream::Error when the width does not match.
    void push_row(std::span<const double> values);
    void reserve_rows(std::size_t n) { data_.reserve(n * cols_); }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    Vector row_vector(std::size_t i) const { auto r = row(i); return {r.begin(), r.end()}; }

    // Rows picked by index, in the given order.
    Matrix select_rows(std::span<const std::size_t> indices) const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Unchecked squared Euclidean distance; callers guarantee equal lengths.
inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        acc += diff * diff;
    }
    return acc;
}

// Euclidean distance. Throws a data error naming both lengths on mismatch.
double euclidean_distance(std::span<const double> a, std::span<const double> b);

void check_dim(std::size_t expected, std::size_t actual, const char* context);

}  // namespace famstream
