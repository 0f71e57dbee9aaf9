#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "famstream/matrix.hpp"

namespace famstream {

// Ground-truth family per sample id. Only evaluation code reads it.
using LabelMap = std::unordered_map<std::string, std::string>;

struct ClusterPurity {
    int cluster_id = 0;
    std::size_t size = 0;
    double purity = 0.0;
    std::string dominant_family;
};

struct MetricsReport {
    double purity = 0.0;
    double mean_silhouette = 0.0;
    bool has_silhouette = false;
    std::vector<ClusterPurity> per_cluster;

    nlohmann::json to_json() const;
};

// Weighted purity: (1/n) * sum_j |C_j| * max_i p_ij. The dominant family of a
// tied cluster is the lexicographically smallest. Throws a data error listing
// every assigned id without a label.
MetricsReport purity(const std::vector<std::pair<std::string, int>>& assignments, const LabelMap& labels);

// Mean silhouette coefficient with the |C|-1 divisor for a(x) and s = 0 for
// singleton clusters. Labels may be arbitrary ints; at least two distinct
// labels are required.
double mean_silhouette(const Matrix& points, std::span<const int> labels);

// Per-point values behind mean_silhouette, in input order.
std::vector<double> silhouette_samples(const Matrix& points, std::span<const int> labels);

// Cached distances of one fixed population, for scoring many labelings of
// the same points. Memory grows as n^2 / 2 doubles.
class PairwiseDistances {
public:
    explicit PairwiseDistances(const Matrix& points);

    std::size_t size() const noexcept { return n_; }
    std::span<const double> packed() const noexcept { return packed_; }

private:
    std::size_t n_;
    std::vector<double> packed_;
};

// Same value as mean_silhouette(points, labels) for the cached points.
double mean_silhouette(const PairwiseDistances& distances, std::span<const int> labels);

// Evaluates both metrics for one population.
MetricsReport evaluate(const Matrix& points, std::span<const std::string> ids, std::span<const int> labels,
                       const LabelMap* truth);

void write_per_cluster_csv(const MetricsReport& report, std::ostream& out);

}  // namespace famstream
