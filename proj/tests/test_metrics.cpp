#include <doctest.h>

#include "famstream/error.hpp"
#include "famstream/metrics.hpp"
#include "helpers.hpp"

using namespace famstream;
using testing::from_rows;

namespace {

struct PurityFixture {
    std::vector<std::vector<std::string>> clusters;  // families per cluster
    double expected;
};

MetricsReport purity_of(const std::vector<std::vector<std::string>>& clusters) {
    std::vector<std::pair<std::string, int>> assign;
    LabelMap labels;
    int n = 0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (const auto& fam : clusters[c]) {
            const std::string id = "s" + std::to_string(n++);
            assign.push_back({id, static_cast<int>(c)});
            labels[id] = fam;
        }
    }
    return purity(assign, labels);
}

std::vector<int> random_labels(std::size_t n, int k, std::mt19937_64& rng) {
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) l[i] = i < static_cast<std::size_t>(k) ? static_cast<int>(i) : static_cast<int>(rng() % k);
    std::shuffle(l.begin(), l.end(), rng);
    return l;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("purity on ten hand-computed fixtures") {
    const std::vector<PurityFixture> fixtures{
        {{{"A", "A", "B"}, {"B", "B"}}, 4.0 / 5.0},
        {{{"A", "A"}, {"B"}, {"C", "C", "C"}}, 1.0},
        {{{"A", "B"}}, 0.5},
        {{{"A"}}, 1.0},
        {{{"A", "B", "C"}}, 1.0 / 3.0},
        {{{"A", "A", "B", "B", "C"}, {"C"}}, 3.0 / 6.0},
        {{{"A", "B"}, {"A", "B"}, {"A", "B"}, {"A", "A"}}, 5.0 / 8.0},
        {{{"X", "Y", "Y", "Y"}, {"X", "X", "Y"}}, 5.0 / 7.0},
        {{{"A"}, {"B"}, {"C"}, {"A"}}, 1.0},
        {{{"A", "A", "A", "B"}, {"B", "C", "C", "C", "D"}, {"D"}}, 7.0 / 10.0},
    };
    for (const auto& f : fixtures) CHECK(purity_of(f.clusters).purity == f.expected);
}

TEST_CASE("purity per-cluster details and the lexicographic tie rule") {
    const auto r = purity_of({{"B", "A"}, {"C", "C", "D"}});
    REQUIRE(r.per_cluster.size() == 2);
    CHECK(r.per_cluster[0].dominant_family == "A");
    CHECK(r.per_cluster[0].purity == 0.5);
    CHECK(r.per_cluster[1].dominant_family == "C");
    CHECK(r.per_cluster[1].size == 3);
}

TEST_CASE("purity lists every unlabeled id") {
    LabelMap labels{{"a", "F"}};
    try {
        purity({{"a", 0}, {"b", 0}, {"c", 1}}, labels);
        FAIL("expected an error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find('b') != std::string::npos);
        CHECK(msg.find('c') != std::string::npos);
    }
    CHECK(purity({}, labels).purity == 0.0);
}

TEST_CASE("silhouette of two vertical pairs ten apart") {
    const auto x = from_rows({{0, 0}, {0, 1}, {10, 0}, {10, 1}});
    const std::vector<int> l{0, 0, 1, 1};
    const double b = (10.0 + std::sqrt(101.0)) / 2.0;
    const double expected = (b - 1.0) / b;
    CHECK(expected == doctest::Approx(0.9003).epsilon(1e-4));
    for (double s : silhouette_samples(x, l)) CHECK(s == doctest::Approx(expected).epsilon(1e-14));
    CHECK(mean_silhouette(x, l) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("identical points split across clusters score negative") {
    const auto x = from_rows({{0, 0}, {10, 0}, {0, 0}, {10, 0}});
    const std::vector<int> l{0, 0, 1, 1};
    for (double s : silhouette_samples(x, l)) CHECK(s == doctest::Approx(-0.5));
}

TEST_CASE("duplicated members far apart score one") {
    const auto x = from_rows({{0, 0}, {0, 0}, {0, 0}, {50, 50}, {50, 50}});
    CHECK(mean_silhouette(x, std::vector<int>{3, 3, 3, -7, -7}) == 1.0);
}

TEST_CASE("singletons contribute zero and one cluster is an error") {
    const auto x = from_rows({{0, 0}, {1, 0}, {5, 5}});
    const auto s = silhouette_samples(x, std::vector<int>{0, 0, 1});
    CHECK(s[2] == 0.0);
    CHECK_THROWS_AS(mean_silhouette(x, std::vector<int>{2, 2, 2}), Error);
}

TEST_CASE("silhouette matches the naive oracle on 50 random instances") {
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 10 + rng() % 191;
        const int k = 2 + static_cast<int>(rng() % 4);
        const auto x = testing::random_matrix(n, 1 + rng() % 8, rng);
        const auto l = random_labels(n, k, rng);
        const double oracle = testing::naive_mean_silhouette(x, l);
        CHECK(std::abs(mean_silhouette(x, l) - oracle) <= 1e-9);
        const PairwiseDistances cache(x);
        CHECK(std::abs(mean_silhouette(cache, l) - oracle) <= 1e-9);
    }
}

TEST_CASE("cached and direct silhouettes are bit-identical") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 10; ++t) {
        const auto x = testing::random_matrix(300 + rng() % 300, 5, rng);
        const auto l = random_labels(x.rows(), 2 + t % 6, rng);
        CHECK(mean_silhouette(PairwiseDistances(x), l) == mean_silhouette(x, l));
    }
}

TEST_CASE("silhouette is invariant under rotation, translation and scaling") {
    std::mt19937_64 rng(8);
    const auto x = testing::random_matrix(120, 2, rng);
    const auto l = random_labels(120, 3, rng);
    const double angle = 0.7, scale = 3.5;
    Matrix y(x.rows(), 2);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        y(i, 0) = scale * (std::cos(angle) * x(i, 0) - std::sin(angle) * x(i, 1)) + 12.0;
        y(i, 1) = scale * (std::sin(angle) * x(i, 0) + std::cos(angle) * x(i, 1)) - 4.0;
    }
    CHECK(mean_silhouette(y, l) == doctest::Approx(mean_silhouette(x, l)).epsilon(1e-12));
}

TEST_CASE("silhouette values stay in [-1, 1] and do not depend on label names") {
    std::mt19937_64 rng(9);
    const auto x = testing::random_matrix(80, 3, rng);
    const auto l = random_labels(80, 4, rng);
    std::vector<int> renamed(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) renamed[i] = 100 - 7 * l[i];
    const auto s = silhouette_samples(x, l);
    for (double v : s) CHECK((v >= -1.0 && v <= 1.0));
    CHECK(silhouette_samples(x, renamed) == s);
}

TEST_CASE("evaluate fills both metrics") {
    const auto x = from_rows({{0, 0}, {0, 1}, {10, 0}, {10, 1}});
    const std::vector<std::string> ids{"a", "b", "c", "d"};
    const std::vector<int> l{0, 0, 1, 1};
    const LabelMap truth{{"a", "F"}, {"b", "G"}, {"c", "G"}, {"d", "G"}};
    const auto r = evaluate(x, ids, l, &truth);
    CHECK(r.purity == 0.75);
    CHECK(r.has_silhouette);
    CHECK(r.mean_silhouette == mean_silhouette(x, l));
    const auto no_truth = evaluate(x, ids, l, nullptr);
    CHECK(no_truth.has_silhouette);
    const auto single = evaluate(x, ids, std::vector<int>{0, 0, 0, 0}, &truth);
    CHECK_FALSE(single.has_silhouette);
    CHECK(single.purity == 0.75);
}

}  // TEST_SUITE
