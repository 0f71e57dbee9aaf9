#include "famstream/batch.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <random>
#include <unordered_set>

#include "famstream/error.hpp"
#include "famstream/kernels.hpp"
#include "famstream/online.hpp"

namespace famstream {

// ---- KnownClusters -------------------------------------------------------------

KnownClusters KnownClusters::from_labels(const Matrix& points, std::span<const std::string> ids,
                                         std::span<const int> labels) {
    if (ids.size() != points.rows() || labels.size() != points.rows()) {
        throw_runtime("KnownClusters::from_labels: points, ids and labels differ in length");
    }
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= 0) groups[labels[i]].push_back(i);
    }
    KnownClusters out(points.cols());
    for (const auto& [label, rows] : groups) {
        Cluster c;
        c.id = static_cast<int>(out.clusters_.size());
        c.members = points.select_rows(rows);
        c.centroid.assign(points.cols(), 0.0);
        for (std::size_t r : rows) {
            c.member_ids.push_back(ids[r]);
            const auto p = points.row(r);
            for (std::size_t j = 0; j < p.size(); ++j) c.centroid[j] += p[j];
        }
        for (double& v : c.centroid) v /= static_cast<double>(rows.size());
        c.weight = rows.size();
        out.clusters_.push_back(std::move(c));
    }
    return out;
}

const Cluster& KnownClusters::at(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= clusters_.size()) throw_runtime("unknown cluster id " + std::to_string(id));
    return clusters_[static_cast<std::size_t>(id)];
}

Cluster& KnownClusters::at(int id) {
    return const_cast<Cluster&>(static_cast<const KnownClusters&>(*this).at(id));
}

std::size_t KnownClusters::total_members() const {
    std::size_t n = 0;
    for (const auto& c : clusters_) n += c.count();
    return n;
}

Matrix KnownClusters::centroid_matrix() const {
    Matrix m = Matrix::with_cols(dim_);
    for (const auto& c : clusters_) m.push_row(c.centroid);
    return m;
}

void KnownClusters::validate(double tol) const {
    std::unordered_set<std::string> seen;
    for (std::size_t k = 0; k < clusters_.size(); ++k) {
        const Cluster& c = clusters_[k];
        if (c.id != static_cast<int>(k)) throw_runtime("cluster ids must be dense");
        if (c.count() == 0) throw_runtime("cluster " + std::to_string(c.id) + " is empty");
        if (c.member_ids.size() != c.count()) throw_runtime("cluster " + std::to_string(c.id) + ": ids/points mismatch");
        for (const auto& id : c.member_ids) {
            if (!seen.insert(id).second) throw_runtime("member id '" + id + "' appears in two clusters");
        }
        for (std::size_t j = 0; j < dim_; ++j) {
            double mean = 0.0;
            for (std::size_t i = 0; i < c.count(); ++i) mean += c.members(i, j);
            mean /= static_cast<double>(c.count());
            if (std::abs(mean - c.centroid[j]) > tol) {
                throw_runtime("cluster " + std::to_string(c.id) + ": centroid drifted from member mean");
            }
        }
    }
}

nlohmann::json KnownClusters::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : clusters_) {
        arr.push_back({{"id", c.id}, {"centroid", c.centroid}, {"member_ids", c.member_ids}});
    }
    return {{"dim", dim_}, {"clusters", arr}};
}

std::vector<std::string> default_ids(std::size_t n) {
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
    return ids;
}

// ---- k-means ------------------------------------------------------------------

namespace {

double wcss(const Matrix& points, const Matrix& centroids, std::span<const int> labels) {
    double s = 0.0;
    for (std::size_t i = 0; i < points.rows(); ++i) {
        s += squared_distance(points.row(i), centroids.row(static_cast<std::size_t>(labels[i])));
    }
    return s;
}

// k-means++: the first center uniformly, each next one with probability
// proportional to its squared distance from the nearest chosen center. Points
// already chosen have weight 0, so the centers are distinct.
Matrix distinct_seed_points(const Matrix& points, std::size_t k, std::uint64_t seed) {
    const std::size_t n = points.rows();
    if (n == 0) throw_data("kmeans: no points");
    std::mt19937_64 rng(seed);
    Matrix chosen = Matrix::with_cols(points.cols());
    chosen.push_row(points.row(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)));
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points.row(i), chosen.row(0));
    while (chosen.rows() < k) {
        double total = 0.0;
        for (double v : d2) total += v;
        if (!(total > 0.0)) {
            throw_data("kmeans: k = " + std::to_string(k) + " exceeds the " + std::to_string(chosen.rows()) +
                       " distinct points");
        }
        std::discrete_distribution<std::size_t> pick(d2.begin(), d2.end());
        const auto next = points.row(pick(rng));
        chosen.push_row(next);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points.row(i), next));
    }
    return chosen;
}

}  // namespace

KMeansResult kmeans_fit(const Matrix& points, std::size_t k, std::uint64_t seed, int max_iters) {
    if (k == 0) throw_usage("kmeans: k must be positive");
    if (max_iters <= 0) throw_usage("kmeans: max_iters must be positive");
    KMeansResult r;
    r.centroids = distinct_seed_points(points, k, seed);
    r.labels.assign(points.rows(), 0);
    kernels::nearest_rows(points, r.centroids, r.labels);
    r.wcss_history.push_back(wcss(points, r.centroids, r.labels));

    std::vector<int> next(points.rows());
    for (int it = 0; it < max_iters; ++it) {
        const Matrix previous = r.centroids;
        Matrix sums(k, points.cols());
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < points.rows(); ++i) {
            const auto l = static_cast<std::size_t>(r.labels[i]);
            ++counts[l];
            auto s = sums.row(l);
            const auto p = points.row(i);
            for (std::size_t j = 0; j < p.size(); ++j) s[j] += p[j];
        }
        std::vector<bool> taken(points.rows(), false);
        for (std::size_t c = 0; c < k; ++c) {
            auto dst = r.centroids.row(c);
            if (counts[c] > 0) {
                const auto s = sums.row(c);
                for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = s[j] / static_cast<double>(counts[c]);
                continue;
            }
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < points.rows(); ++i) {
                if (taken[i]) continue;
                const double d = squared_distance(points.row(i), previous.row(c));
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            taken[far] = true;
            const auto p = points.row(far);
            std::copy(p.begin(), p.end(), dst.begin());
        }
        kernels::nearest_rows(points, r.centroids, next);
        r.wcss_history.push_back(wcss(points, r.centroids, next));
        r.iterations = it + 1;
        if (next == r.labels) break;
        r.labels.swap(next);
    }
    return r;
}

KnownClusters kmeans_batch(const Matrix& points, std::span<const std::string> ids, std::size_t k, std::uint64_t seed,
                           int max_iters) {
    const auto r = kmeans_fit(points, k, seed, max_iters);
    return KnownClusters::from_labels(points, ids, r.labels);
}

// ---- DBSCAN -------------------------------------------------------------------

DbscanResult dbscan(const Matrix& points, double eps, std::size_t min_samples) {
    if (!(eps > 0.0)) throw_usage("dbscan: eps must be positive");
    if (min_samples == 0) throw_usage("dbscan: min_samples must be at least 1");
    const std::size_t n = points.rows();
    constexpr int unvisited = -2;
    constexpr int noise = -1;

    std::vector<double> dist(n);
    auto region = [&](std::size_t i) {
        kernels::distances_to(points, points.row(i), dist);
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < n; ++j) {
            if (dist[j] <= eps) out.push_back(j);
        }
        return out;
    };

    DbscanResult r;
    r.labels.assign(n, unvisited);
    int cluster = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (r.labels[i] != unvisited) continue;
        auto seeds = region(i);
        if (seeds.size() < min_samples) {
            r.labels[i] = noise;
            continue;
        }
        r.labels[i] = cluster;
        std::deque<std::size_t> queue(seeds.begin(), seeds.end());
        while (!queue.empty()) {
            const std::size_t j = queue.front();
            queue.pop_front();
            if (r.labels[j] == noise) r.labels[j] = cluster;
            if (r.labels[j] != unvisited) continue;
            r.labels[j] = cluster;
            auto nb = region(j);
            if (nb.size() >= min_samples) queue.insert(queue.end(), nb.begin(), nb.end());
        }
        ++cluster;
    }
    r.n_clusters = static_cast<std::size_t>(cluster);
    for (std::size_t i = 0; i < n; ++i) {
        if (r.labels[i] == noise) r.noise.push_back(i);
    }
    return r;
}

std::pair<KnownClusters, std::vector<std::string>> dbscan_clusters(const Matrix& points,
                                                                   std::span<const std::string> ids, double eps,
                                                                   std::size_t min_samples) {
    const auto r = dbscan(points, eps, min_samples);
    std::vector<std::string> noise_ids;
    for (std::size_t i : r.noise) noise_ids.push_back(ids[i]);
    return {KnownClusters::from_labels(points, ids, r.labels), std::move(noise_ids)};
}

// ---- SOM batch ----------------------------------------------------------------

std::vector<int> som_fit_labels(const Matrix& points, std::size_t k_units, int epochs, std::uint64_t seed) {
    if (k_units == 0) throw_usage("som_batch: k_units must be positive");
    if (epochs < 0) throw_usage("som_batch: epochs must be non-negative");
    std::mt19937_64 rng(seed);
    SOMParams params;
    const double steps = std::max(1.0, static_cast<double>(epochs) * static_cast<double>(points.rows()));
    params.lambda_alpha = params.lambda_sigma = steps;
    SOMState som = som_init(k_units, points.cols(), rng(), params);

    std::vector<std::size_t> order(points.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int e = 0; e < epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i : order) som_update(som, points.row(i));
    }
    return final_assign(som, points);
}

KnownClusters som_batch(const Matrix& points, std::span<const std::string> ids, std::size_t k_units, int epochs,
                        std::uint64_t seed) {
    const auto labels = som_fit_labels(points, k_units, epochs, seed);
    return KnownClusters::from_labels(points, ids, labels);
}

// ---- config -------------------------------------------------------------------

std::string BatchClustererConfig::name() const {
    switch (algorithm) {
        case BatchAlgorithm::kmeans: return "kmeans";
        case BatchAlgorithm::som: return "som";
        case BatchAlgorithm::dbscan: return "dbscan";
    }
    return "?";
}

std::vector<int> cluster_labels(const BatchClustererConfig& config, const Matrix& points, std::uint64_t seed) {
    switch (config.algorithm) {
        case BatchAlgorithm::kmeans: return kmeans_fit(points, config.k, seed, config.max_iters).labels;
        case BatchAlgorithm::som: return som_fit_labels(points, config.k, config.epochs, seed);
        case BatchAlgorithm::dbscan: return dbscan(points, config.eps, config.min_samples).labels;
    }
    throw_usage("unknown batch clusterer");
}

}  // namespace famstream
