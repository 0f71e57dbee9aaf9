#pragma once

// Per-element bodies shared by the serial and OpenMP kernels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "famstream/matrix.hpp"

namespace famstream::kernels::detail {

inline int nearest_index(const Matrix& centers, std::span<const double> x) noexcept {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.rows(); ++c) {
        const double d = squared_distance(x, centers.row(c));
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

// Silhouette of point i from its per-label distance sums.
inline double silhouette_from_sums(std::span<const int> labels, std::span<const std::size_t> sizes, std::size_t i,
                                   std::span<const double> sums) noexcept {
    const auto own = static_cast<std::size_t>(labels[i]);
    if (sizes[own] <= 1) return 0.0;
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sums.size(); ++c) {
        if (c == own || sizes[c] == 0) continue;
        b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    return denom > 0.0 ? (b - a) / denom : 0.0;
}

template <typename DistanceFn>
double silhouette_from(std::size_t n, std::span<const int> labels, std::span<const std::size_t> sizes, std::size_t i,
                       std::span<double> sums, DistanceFn&& distance) noexcept {
    if (sizes[static_cast<std::size_t>(labels[i])] <= 1) return 0.0;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        sums[static_cast<std::size_t>(labels[j])] += distance(j);
    }
    return silhouette_from_sums(labels, sizes, i, sums);
}

// Per-label distance sums of points [lo, hi), read row by row from the packed
// triangle. Every point still receives its distances in ascending partner
// order, so the sums match silhouette_from bit for bit. `sums` holds
// (hi - lo) * n_labels entries.
inline void packed_label_sums(std::span<const double> packed, std::size_t n, std::span<const int> labels,
                              std::size_t n_labels, std::size_t lo, std::size_t hi, std::span<double> sums) noexcept {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t i = 0; i < hi; ++i) {
        // row[j] = d(i, j) for j > i
        const double* row = packed.data() + (i * n - i * (i + 1) / 2) - (i + 1);
        const auto li = static_cast<std::size_t>(labels[i]);
        for (std::size_t j = std::max(lo, i + 1); j < hi; ++j) sums[(j - lo) * n_labels + li] += row[j];
        if (i >= lo) {
            double* own = sums.data() + (i - lo) * n_labels;
            for (std::size_t j = i + 1; j < n; ++j) own[labels[j]] += row[j];
        }
    }
}

inline double packed_distance(std::span<const double> packed, std::size_t n, std::size_t i, std::size_t j) noexcept {
    return i < j ? packed[i * n - i * (i + 1) / 2 + (j - i - 1)] : packed[j * n - j * (j + 1) / 2 + (i - j - 1)];
}

// sums must have n_labels entries; it is overwritten.
inline double silhouette_one(const Matrix& points, std::span<const int> labels, std::span<const std::size_t> sizes,
                             std::size_t i, std::span<double> sums) noexcept {
    const auto xi = points.row(i);
    return silhouette_from(points.rows(), labels, sizes, i, sums,
                           [&](std::size_t j) { return std::sqrt(squared_distance(xi, points.row(j))); });
}

inline std::vector<std::size_t> label_sizes(std::span<const int> labels, std::size_t n_labels) {
    std::vector<std::size_t> sizes(n_labels, 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    return sizes;
}

inline Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

inline double covariance_entry(const Matrix& columns, std::size_t a, std::size_t b, double divisor) noexcept {
    const auto ca = columns.row(a);
    const auto cb = columns.row(b);
    double acc = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i) acc += ca[i] * cb[i];
    return acc / divisor;
}

inline double covariance_divisor(std::size_t n) { return n > 1 ? static_cast<double>(n - 1) : 1.0; }

}  // namespace famstream::kernels::detail
