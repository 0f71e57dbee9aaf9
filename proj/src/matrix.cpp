#include "famstream/matrix.hpp"

#include <cmath>
#include <string>

#include "famstream/error.hpp"

namespace famstream {

void Matrix::push_row(std::span<const double> values) {
    check_dim(cols_, values.size(), "Matrix::push_row");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
    Matrix out = with_cols(cols_);
    out.reserve_rows(indices.size());
    for (std::size_t i : indices) out.push_row(row(i));
    return out;
}

void check_dim(std::size_t expected, std::size_t actual, const char* context) {
    if (expected != actual) {
        throw_data(std::string(context) + ": dimension mismatch (" + std::to_string(expected) + " vs " +
                   std::to_string(actual) + ")");
    }
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    check_dim(a.size(), b.size(), "euclidean_distance");
    return std::sqrt(squared_distance(a, b));
}

}  // namespace famstream
