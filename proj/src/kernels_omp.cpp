#include "famstream/kernels.hpp"

#include <cstdint>

#include "kernel_detail.hpp"

namespace famstream::kernels::parallel {

void nearest_rows(const Matrix& points, const Matrix& centers, std::span<int> out) {
    const auto n = static_cast<std::int64_t>(points.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = detail::nearest_index(centers, points.row(static_cast<std::size_t>(i)));
    }
}

void distances_to(const Matrix& points, std::span<const double> query, std::span<double> out) {
    const auto n = static_cast<std::int64_t>(points.rows());
#pragma omp parallel for schedule(static) if (n > 2048)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto r = static_cast<std::size_t>(i);
        out[r] = std::sqrt(squared_distance(points.row(r), query));
    }
}

void silhouette_values(const Matrix& points, std::span<const int> labels, std::size_t n_labels,
                       std::span<double> out) {
    const auto sizes = detail::label_sizes(labels, n_labels);
    const auto n = static_cast<std::int64_t>(points.rows());
#pragma omp parallel
    {
        std::vector<double> sums(n_labels);
#pragma omp for schedule(dynamic, 16)
        for (std::int64_t i = 0; i < n; ++i) {
            const auto r = static_cast<std::size_t>(i);
            out[r] = detail::silhouette_one(points, labels, sizes, r, sums);
        }
    }
}

Matrix covariance(const Matrix& centered) {
    const Matrix columns = detail::transpose(centered);
    const double divisor = detail::covariance_divisor(centered.rows());
    const auto d = static_cast<std::int64_t>(centered.cols());
    Matrix cov(centered.cols(), centered.cols());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t a = 0; a < d; ++a) {
        for (std::int64_t b = a; b < d; ++b) {
            const auto ua = static_cast<std::size_t>(a);
            const auto ub = static_cast<std::size_t>(b);
            cov(ua, ub) = cov(ub, ua) = detail::covariance_entry(columns, ua, ub, divisor);
        }
    }
    return cov;
}

void pairwise_packed(const Matrix& points, std::span<double> out) {
    const auto n = static_cast<std::int64_t>(points.rows());
    const std::size_t un = points.rows();
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t si = 0; si < n; ++si) {
        const auto i = static_cast<std::size_t>(si);
        const std::size_t base = i * un - i * (i + 1) / 2;
        for (std::size_t j = i + 1; j < un; ++j) {
            out[base + (j - i - 1)] = std::sqrt(squared_distance(points.row(i), points.row(j)));
        }
    }
}

void silhouette_values_packed(std::span<const double> packed, std::size_t n, std::span<const int> labels,
                              std::size_t n_labels, std::span<double> out) {
    const auto sizes = detail::label_sizes(labels, n_labels);
    // Blocks of target points; the block split does not change any sum.
    constexpr std::size_t block = 256;
    const auto n_blocks = static_cast<std::int64_t>((n + block - 1) / block);
#pragma omp parallel
    {
        std::vector<double> sums(block * n_labels);
#pragma omp for schedule(dynamic, 1)
        for (std::int64_t b = 0; b < n_blocks; ++b) {
            const std::size_t lo = static_cast<std::size_t>(b) * block;
            const std::size_t hi = std::min(n, lo + block);
            const std::span<double> view(sums.data(), (hi - lo) * n_labels);
            detail::packed_label_sums(packed, n, labels, n_labels, lo, hi, view);
            for (std::size_t i = lo; i < hi; ++i) {
                out[i] = detail::silhouette_from_sums(labels, sizes, i,
                                                      std::span<const double>(view).subspan((i - lo) * n_labels, n_labels));
            }
        }
    }
}

}  // namespace famstream::kernels::parallel
