#include <doctest.h>

#include <numeric>
#include <set>

#include "famstream/batch.hpp"
#include "famstream/error.hpp"
#include "helpers.hpp"

using namespace famstream;
using testing::from_rows;

namespace {

// Points around `centers`, `per` each, spread `sd`.
Matrix blobs(const std::vector<Vector>& centers, std::size_t per, double sd, std::uint64_t seed,
             std::vector<int>* truth = nullptr) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sd);
    Matrix m = Matrix::with_cols(centers.front().size());
    for (std::size_t b = 0; b < centers.size(); ++b) {
        for (std::size_t i = 0; i < per; ++i) {
            Vector p = centers[b];
            for (double& v : p) v += noise(rng);
            m.push_row(p);
            if (truth) truth->push_back(static_cast<int>(b));
        }
    }
    return m;
}

// Two labelings describe the same partition.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    std::map<int, int> ab, ba;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (ab.emplace(a[i], b[i]).first->second != b[i]) return false;
        if (ba.emplace(b[i], a[i]).first->second != a[i]) return false;
    }
    return true;
}

}  // namespace

TEST_SUITE("batch-clustering") {

TEST_CASE("k-means on two separated pairs matches the exhaustive optimum") {
    const auto x = from_rows({{0, 0}, {0, 0.5}, {10, 0}, {10, 0.5}});
    // exhaustive oracle over all 2-labelings
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_labels;
    for (int mask = 1; mask < 15; ++mask) {
        std::vector<int> l(4);
        for (int i = 0; i < 4; ++i) l[i] = (mask >> i) & 1;
        double w = 0.0;
        for (int c = 0; c < 2; ++c) {
            double mx = 0, my = 0;
            int n = 0;
            for (int i = 0; i < 4; ++i)
                if (l[i] == c) mx += x(i, 0), my += x(i, 1), ++n;
            mx /= n;
            my /= n;
            for (int i = 0; i < 4; ++i)
                if (l[i] == c) w += (x(i, 0) - mx) * (x(i, 0) - mx) + (x(i, 1) - my) * (x(i, 1) - my);
        }
        if (w < best) best = w, best_labels = l;
    }
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto r = kmeans_fit(x, 2, seed);
        CHECK(same_partition(r.labels, best_labels));
        std::set<std::pair<double, double>> cs;
        for (std::size_t c = 0; c < 2; ++c) cs.insert({r.centroids(c, 0), r.centroids(c, 1)});
        CHECK(cs == std::set<std::pair<double, double>>{{0.0, 0.25}, {10.0, 0.25}});
        CHECK(r.wcss_history.back() == doctest::Approx(best));
    }
}

TEST_CASE("k-means with k = 1 gives the global mean") {
    std::mt19937_64 rng(3);
    const auto x = testing::random_matrix(40, 3, rng);
    const auto r = kmeans_fit(x, 1, 5);
    for (std::size_t j = 0; j < 3; ++j) {
        double m = 0;
        for (std::size_t i = 0; i < 40; ++i) m += x(i, j);
        CHECK(r.centroids(0, j) == doctest::Approx(m / 40).epsilon(1e-12));
    }
}

TEST_CASE("k-means with k = 1 on duplicates returns that point") {
    const auto x = from_rows({{1.5, -2}, {1.5, -2}, {1.5, -2}});
    const auto r = kmeans_fit(x, 1, 0);
    CHECK(r.centroids.row_vector(0) == Vector{1.5, -2});
    CHECK_THROWS_AS(kmeans_fit(x, 2, 0), Error);
    CHECK_THROWS_AS(kmeans_fit(x, 0, 0), Error);
}

TEST_CASE("k-means never increases the within-cluster sum of squares") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 30; ++t) {
        const auto x = testing::random_matrix(120, 4, rng);
        const auto r = kmeans_fit(x, 2 + t % 6, static_cast<std::uint64_t>(t));
        for (std::size_t i = 1; i < r.wcss_history.size(); ++i) {
            CHECK(r.wcss_history[i] <= r.wcss_history[i - 1] + 1e-9);
        }
    }
}

TEST_CASE("kmeans_batch yields a valid partition with member-mean centroids") {
    std::mt19937_64 rng(2);
    const auto x = testing::random_matrix(60, 3, rng);
    const auto ids = default_ids(60);
    const auto kc = kmeans_batch(x, ids, 4, 1);
    CHECK(kc.size() == 4);
    CHECK(kc.total_members() == 60);
    CHECK_NOTHROW(kc.validate());
}

TEST_CASE("dbscan separates two dense blobs with no noise") {
    const double eps = 1.0;
    std::vector<int> truth;
    const auto x = blobs({{0, 0}, {10, 0}}, 20, 0.1, 4, &truth);
    // brute-force reachability closure
    const std::size_t n = x.rows();
    std::vector<int> comp(n, -1);
    int next = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<std::size_t> stack{s};
        comp[s] = next;
        while (!stack.empty()) {
            const auto i = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < n; ++j)
                if (comp[j] < 0 && testing::plain_distance(x.row(i), x.row(j)) <= eps) comp[j] = next, stack.push_back(j);
        }
        ++next;
    }
    CHECK(next == 2);
    const auto r = dbscan(x, eps, 5);
    CHECK(r.n_clusters == 2);
    CHECK(r.noise.empty());
    CHECK(same_partition(r.labels, comp));
}

TEST_CASE("dbscan marks an isolated point as noise") {
    const auto x = from_rows({{0, 0}, {0.1, 0}, {0, 0.1}, {50, 50}});
    const auto r = dbscan(x, 0.5, 2);
    CHECK(r.n_clusters == 1);
    CHECK(r.noise == std::vector<std::size_t>{3});
    CHECK(r.labels[3] == -1);
    CHECK_THROWS_AS(dbscan(x, 0.0, 2), Error);
    CHECK_THROWS_AS(dbscan(x, 1.0, 0), Error);
}

TEST_CASE("dbscan core points and noise do not depend on input order") {
    std::mt19937_64 rng(8);
    const auto x = blobs({{0, 0}, {3, 0}, {0, 3}}, 15, 0.6, 9);
    const auto base = dbscan(x, 0.7, 4);
    std::vector<std::size_t> perm(x.rows());
    std::iota(perm.begin(), perm.end(), 0);
    for (int t = 0; t < 10; ++t) {
        std::shuffle(perm.begin(), perm.end(), rng);
        const auto r = dbscan(x.select_rows(perm), 0.7, 4);
        CHECK(r.n_clusters == base.n_clusters);
        CHECK(r.noise.size() == base.noise.size());
        for (std::size_t i = 0; i < perm.size(); ++i) {
            CHECK((r.labels[i] < 0) == (base.labels[perm[i]] < 0));
        }
    }
}

TEST_CASE("dbscan_clusters returns noise ids") {
    const auto x = from_rows({{0, 0}, {0.1, 0}, {9, 9}});
    const std::vector<std::string> ids{"a", "b", "lonely"};
    const auto [kc, noise] = dbscan_clusters(x, ids, 0.5, 2);
    CHECK(kc.size() == 1);
    CHECK(noise == std::vector<std::string>{"lonely"});
}

TEST_CASE("som_batch recovers four separated blobs") {
    std::vector<int> truth;
    const auto x = blobs({{0, 0}, {20, 0}, {0, 20}, {20, 20}}, 25, 0.5, 6, &truth);
    const auto labels = som_fit_labels(x, 4, 10, 3);
    CHECK(same_partition(labels, truth));
    const auto kc = som_batch(x, default_ids(x.rows()), 4, 10, 3);
    CHECK(kc.size() == 4);
    CHECK_NOTHROW(kc.validate());
}

TEST_CASE("som_batch with one unit holds everything") {
    std::mt19937_64 rng(1);
    const auto x = testing::random_matrix(30, 2, rng);
    const auto kc = som_batch(x, default_ids(30), 1, 3, 0);
    CHECK(kc.size() == 1);
    CHECK(kc.total_members() == 30);
}

TEST_CASE("som_batch with zero epochs is still a partition") {
    std::mt19937_64 rng(1);
    const auto x = testing::random_matrix(30, 2, rng);
    const auto labels = som_fit_labels(x, 3, 0, 0);
    CHECK(labels.size() == 30);
    for (int l : labels) CHECK((l >= 0 && l < 3));
    const auto kc = som_batch(x, default_ids(30), 3, 0, 0);
    CHECK(kc.total_members() == 30);
    CHECK_THROWS_AS(som_fit_labels(x, 0, 1, 0), Error);
}

TEST_CASE("from_labels drops noise and renumbers") {
    const auto x = from_rows({{0, 0}, {2, 0}, {5, 5}, {7, 7}});
    const std::vector<std::string> ids{"a", "b", "c", "d"};
    const std::vector<int> labels{7, 7, -1, 3};
    const auto kc = KnownClusters::from_labels(x, ids, labels);
    REQUIRE(kc.size() == 2);
    CHECK(kc.at(0).member_ids == std::vector<std::string>{"d"});
    CHECK(kc.at(1).centroid == Vector{1, 0});
    CHECK_THROWS_AS(kc.at(2), Error);
}

TEST_CASE("cluster_labels dispatches on the configured algorithm") {
    const auto x = blobs({{0, 0}, {20, 20}}, 10, 0.2, 1);
    BatchClustererConfig c;
    c.k = 2;
    for (auto a : {BatchAlgorithm::kmeans, BatchAlgorithm::som, BatchAlgorithm::dbscan}) {
        c.algorithm = a;
        c.eps = 2.0;
        c.min_samples = 3;
        const auto l = cluster_labels(c, x, 5);
        CHECK(std::set<int>(l.begin(), l.end()).size() == 2);
    }
}

}  // TEST_SUITE
