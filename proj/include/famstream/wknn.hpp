#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "famstream/matrix.hpp"

namespace famstream {

class KnownClusters;

// Labeled points backing the classifier; labels are known-cluster ids.
class ReferenceSet {
public:
    explicit ReferenceSet(std::size_t dim) : points_(Matrix::with_cols(dim)) {}

    // Every member of every cluster, labeled with its cluster id, in cluster order.
    static ReferenceSet from_clusters(const KnownClusters& clusters);

    void add(std::span<const double> x, int label);

    std::size_t size() const noexcept { return points_.rows(); }
    std::size_t dim() const noexcept { return points_.cols(); }
    const Matrix& points() const noexcept { return points_; }
    const std::vector<int>& labels() const noexcept { return labels_; }

private:
    Matrix points_;
    std::vector<int> labels_;
};

enum class Weighting { uniform, distance_weighted };

std::string_view to_string(Weighting w);
Weighting parse_weighting(std::string_view text);

struct WKNNParams {
    std::size_t k = 3;
    Weighting weighting = Weighting::distance_weighted;
};

struct Neighbor {
    std::size_t index = 0;  // row in the reference set
    double distance = 0.0;
    int label = 0;
};

struct Classification {
    int label = 0;
    std::vector<Neighbor> neighbors;  // ascending distance, ties by insertion order
    std::vector<double> weights;
};

// Vote weights for ascending neighbor distances d_1..d_k:
// (d_k - d_i) / (d_k - d_1), or all ones when d_k == d_1.
std::vector<double> vote_weights(std::span<const double> distances, Weighting weighting);

// Weighted majority vote over the k nearest reference points. A tie on the
// score goes to the tied label whose first neighbor is nearest.
Classification classify(const ReferenceSet& ref, const WKNNParams& params, std::span<const double> x);

}  // namespace famstream
