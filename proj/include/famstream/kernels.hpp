#pragma once

// Hot loops of the toolkit. Each kernel exists twice: a plain serial loop kept
// as the reference, and an OpenMP version that splits the outer loop across
// threads. Both compute every output element with the same expression order,
// so their results are bit-identical and independent of the thread count.
// Unqualified famstream::kernels::* calls dispatch to the parallel version.

#include <cstddef>
#include <span>

#include "famstream/matrix.hpp"

namespace famstream::kernels {

namespace serial {

// out[i] = index of the row in `centers` nearest to points.row(i); ties go to
// the lowest index.
void nearest_rows(const Matrix& points, const Matrix& centers, std::span<int> out);

// out[i] = Euclidean distance between points.row(i) and query.
void distances_to(const Matrix& points, std::span<const double> query, std::span<double> out);

// Per-point silhouette coefficient. labels[i] in [0, n_labels); points of
// singleton clusters get 0. Requires at least two non-empty labels.
void silhouette_values(const Matrix& points, std::span<const int> labels, std::size_t n_labels,
                       std::span<double> out);

// Sample covariance of already-centered rows (divisor max(n - 1, 1)).
Matrix covariance(const Matrix& centered);

// Strict upper triangle of the distance matrix, row by row:
// (0,1) (0,2) ... (0,n-1) (1,2) ... ; out has n(n-1)/2 entries.
void pairwise_packed(const Matrix& points, std::span<double> out);

// silhouette_values over distances from pairwise_packed.
void silhouette_values_packed(std::span<const double> packed, std::size_t n, std::span<const int> labels,
                              std::size_t n_labels, std::span<double> out);

}  // namespace serial

namespace parallel {

void nearest_rows(const Matrix& points, const Matrix& centers, std::span<int> out);
void distances_to(const Matrix& points, std::span<const double> query, std::span<double> out);
void silhouette_values(const Matrix& points, std::span<const int> labels, std::size_t n_labels,
                       std::span<double> out);
Matrix covariance(const Matrix& centered);
void pairwise_packed(const Matrix& points, std::span<double> out);
void silhouette_values_packed(std::span<const double> packed, std::size_t n, std::span<const int> labels,
                              std::size_t n_labels, std::span<double> out);

}  // namespace parallel

using parallel::covariance;
using parallel::pairwise_packed;
using parallel::silhouette_values_packed;
using parallel::distances_to;
using parallel::nearest_rows;
using parallel::silhouette_values;

inline std::size_t packed_index(std::size_t i, std::size_t j, std::size_t n) noexcept {
    // requires i < j
    return i * n - i * (i + 1) / 2 + (j - i - 1);
}

// Index of the row nearest to x (ties to the lowest index). centers must be non-empty.
std::size_t nearest_row(const Matrix& centers, std::span<const double> x) noexcept;

}  // namespace famstream::kernels
