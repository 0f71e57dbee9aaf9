#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "famstream/matrix.hpp"

namespace famstream {

struct Cluster {
    int id = 0;
    Vector centroid;
    std::vector<std::string> member_ids;
    Matrix members;
    // Number of points averaged into the centroid; exceeds count() only when
    // accepted stream samples are not stored as members.
    std::size_t weight = 0;

    std::size_t count() const noexcept { return members.rows(); }
};

// The clustered corpus. Cluster ids are 0..size()-1 and index `clusters`.
class KnownClusters {
public:
    KnownClusters() = default;
    explicit KnownClusters(std::size_t dim) : dim_(dim) {}

    // Groups points by label; negative labels (noise) and unused labels are
    // dropped and the remaining labels renumbered in ascending order.
    // Centroids are member means.
    static KnownClusters from_labels(const Matrix& points, std::span<const std::string> ids, std::span<const int> labels);

    std::size_t size() const noexcept { return clusters_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    const std::vector<Cluster>& clusters() const noexcept { return clusters_; }
    const Cluster& at(int id) const;
    Cluster& at(int id);

    std::size_t total_members() const;
    Matrix centroid_matrix() const;

    // Throws a runtime error when an invariant is broken (empty cluster,
    // duplicated member id, centroid farther than tol from the member mean).
    void validate(double tol = 1e-9) const;

    nlohmann::json to_json() const;

private:
    std::size_t dim_ = 0;
    std::vector<Cluster> clusters_;
};

std::vector<std::string> default_ids(std::size_t n);

// ---- k-means ------------------------------------------------------------------

struct KMeansResult {
    std::vector<int> labels;
    Matrix centroids;
    int iterations = 0;
    // Within-cluster sum of squares after every assignment step.
    std::vector<double> wcss_history;
};

// Lloyd iterations from k distinct k-means++ seeds drawn with `seed`, until the
// assignment stops changing or max_iters updates have run. An emptied cluster
// is reseeded at the point farthest from its former centroid.
KMeansResult kmeans_fit(const Matrix& points, std::size_t k, std::uint64_t seed, int max_iters = 300);
KnownClusters kmeans_batch(const Matrix& points, std::span<const std::string> ids, std::size_t k, std::uint64_t seed,
                           int max_iters = 300);

// ---- DBSCAN -------------------------------------------------------------------

struct DbscanResult {
    std::vector<int> labels;  // -1 marks noise
    std::size_t n_clusters = 0;
    std::vector<std::size_t> noise;
};

// Border points join the first cluster that reaches them in scan order.
DbscanResult dbscan(const Matrix& points, double eps, std::size_t min_samples);
std::pair<KnownClusters, std::vector<std::string>> dbscan_clusters(const Matrix& points,
                                                                   std::span<const std::string> ids, double eps,
                                                                   std::size_t min_samples);

// ---- SOM as a batch clusterer ----------------------------------------------

// `epochs` shuffled passes of the online map, then best-matching-unit labels.
std::vector<int> som_fit_labels(const Matrix& points, std::size_t k_units, int epochs, std::uint64_t seed);
KnownClusters som_batch(const Matrix& points, std::span<const std::string> ids, std::size_t k_units, int epochs,
                        std::uint64_t seed);

// ---- configurable batch clusterer --------------------------------------------

enum class BatchAlgorithm { kmeans, som, dbscan };

struct BatchClustererConfig {
    BatchAlgorithm algorithm = BatchAlgorithm::som;
    std::size_t k = 4;
    int epochs = 10;
    int max_iters = 300;
    double eps = 5.0;
    std::size_t min_samples = 10;

    std::string name() const;
};

// Labels per point (-1 for DBSCAN noise).
std::vector<int> cluster_labels(const BatchClustererConfig& config, const Matrix& points, std::uint64_t seed);

}  // namespace famstream
