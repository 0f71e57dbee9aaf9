#include "famstream/kernels.hpp"

#include "kernel_detail.hpp"

namespace famstream::kernels {

std::size_t nearest_row(const Matrix& centers, std::span<const double> x) noexcept {
    return static_cast<std::size_t>(detail::nearest_index(centers, x));
}

namespace serial {

void nearest_rows(const Matrix& points, const Matrix& centers, std::span<int> out) {
    for (std::size_t i = 0; i < points.rows(); ++i) out[i] = detail::nearest_index(centers, points.row(i));
}

void distances_to(const Matrix& points, std::span<const double> query, std::span<double> out) {
    for (std::size_t i = 0; i < points.rows(); ++i) out[i] = std::sqrt(squared_distance(points.row(i), query));
}

void silhouette_values(const Matrix& points, std::span<const int> labels, std::size_t n_labels,
                       std::span<double> out) {
    const auto sizes = detail::label_sizes(labels, n_labels);
    std::vector<double> sums(n_labels);
    for (std::size_t i = 0; i < points.rows(); ++i) out[i] = detail::silhouette_one(points, labels, sizes, i, sums);
}

Matrix covariance(const Matrix& centered) {
    const Matrix columns = detail::transpose(centered);
    const double divisor = detail::covariance_divisor(centered.rows());
    const std::size_t d = centered.cols();
    Matrix cov(d, d);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            cov(a, b) = cov(b, a) = detail::covariance_entry(columns, a, b, divisor);
        }
    }
    return cov;
}

void pairwise_packed(const Matrix& points, std::span<double> out) {
    const std::size_t n = points.rows();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t base = i * n - i * (i + 1) / 2;
        for (std::size_t j = i + 1; j < n; ++j) {
            out[base + (j - i - 1)] = std::sqrt(squared_distance(points.row(i), points.row(j)));
        }
    }
}

void silhouette_values_packed(std::span<const double> packed, std::size_t n, std::span<const int> labels,
                              std::size_t n_labels, std::span<double> out) {
    const auto sizes = detail::label_sizes(labels, n_labels);
    std::vector<double> sums(n * n_labels);
    detail::packed_label_sums(packed, n, labels, n_labels, 0, n, sums);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = detail::silhouette_from_sums(labels, sizes, i, std::span<const double>(sums).subspan(i * n_labels, n_labels));
    }
}

}  // namespace serial
}  // namespace famstream::kernels
