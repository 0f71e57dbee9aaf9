// Acceptance gate: one PASS/FAIL line per criterion. Exit status is non-zero
// when any gating criterion fails. Criterion 9 runs only when
// FAMSTREAM_EMBER_CORPUS and FAMSTREAM_EMBER_STREAM point at feature files.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "famstream/dataset.hpp"
#include "famstream/decision.hpp"
#include "famstream/metrics.hpp"
#include "famstream/online.hpp"
#include "famstream/outputs.hpp"
#include "famstream/pipeline.hpp"
#include "famstream/synthetic.hpp"
#include "famstream/wknn.hpp"
#include "helpers.hpp"

using namespace famstream;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
    std::vector<std::string> notes;  // printed indented under the verdict
};

struct Criterion {
    int number;
    std::string title;
    double time_limit;  // seconds, 0 = none
    std::function<Outcome()> body;
};

std::string sci(double v) {
    std::ostringstream s;
    s.setf(std::ios::scientific);
    s.precision(2);
    s << v;
    return s.str();
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(precision);
    s << v;
    return s.str();
}

// ---- 1: metric oracles ---------------------------------------------------------

Outcome metric_oracles() {
    std::mt19937_64 rng(1);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 10 + rng() % 191;
        const int k = 2 + static_cast<int>(rng() % 4);
        const auto x = testing::random_matrix(n, 1 + rng() % 10, rng);
        std::vector<int> l(n);
        for (std::size_t i = 0; i < n; ++i) l[i] = i < static_cast<std::size_t>(k) ? static_cast<int>(i) : static_cast<int>(rng() % k);
        std::shuffle(l.begin(), l.end(), rng);
        worst = std::max(worst, std::abs(mean_silhouette(x, l) - testing::naive_mean_silhouette(x, l)));
    }
    struct Fixture {
        std::vector<std::vector<std::string>> clusters;
        double expected;
    };
    const std::vector<Fixture> fixtures{
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
    int exact = 0;
    for (const auto& f : fixtures) {
        std::vector<std::pair<std::string, int>> assign;
        LabelMap labels;
        int id = 0;
        for (std::size_t c = 0; c < f.clusters.size(); ++c) {
            for (const auto& fam : f.clusters[c]) {
                const std::string name = std::to_string(id++);
                assign.push_back({name, static_cast<int>(c)});
                labels[name] = fam;
            }
        }
        exact += purity(assign, labels).purity == f.expected ? 1 : 0;
    }
    return {worst <= 1e-9 && exact == 10,
            "silhouette max |diff| " + sci(worst) + " over 50 instances; purity exact " +
                std::to_string(exact) + "/10"};
}

// ---- 2: algorithm traces ------------------------------------------------------

Outcome algorithm_traces() {
    using testing::from_rows;
    auto okm = okm_init(2, from_rows({{0, 0}, {10, 0}}));
    okm_update(okm, Vector{1, 0});
    okm_update(okm, Vector{3, 0});
    const bool okm_ok = okm.centroids == from_rows({{2, 0}, {10, 0}}) && okm.counts == std::vector<std::size_t>{2, 0};

    auto bsas = bsas_init(2.0, 2, 2);
    const auto s0 = bsas_update(bsas, Vector{0, 0});
    const auto s1 = bsas_update(bsas, Vector{1, 0});
    const auto s2 = bsas_update(bsas, Vector{5, 0});
    const bool bsas_ok = s0.created && !s1.created && s1.cluster == 0 && s2.created && s2.cluster == 1 &&
                         bsas.centroids == from_rows({{0.5, 0}, {5, 0}}) &&
                         bsas.counts == std::vector<std::size_t>{2, 1};

    std::mt19937_64 rng(2);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + trial % 6;
        const auto stream = testing::random_matrix(100, 1 + trial % 8, rng, 2.0);
        std::vector<std::size_t> first(k);
        std::iota(first.begin(), first.end(), 0);
        auto o = okm_init(k, stream.select_rows(first));
        SOMParams p;
        p.kernel = SOMKernel::winner_only;
        p.rate = SOMRate::inverse_wins;
        auto som = som_init_with_weights(stream.select_rows(first), p);
        for (std::size_t i = 0; i < stream.rows(); ++i) {
            okm_update(o, stream.row(i));
            som_update(som, stream.row(i));
            for (std::size_t v = 0; v < o.centroids.data().size(); ++v) {
                worst = std::max(worst, std::abs(o.centroids.data()[v] - som.weights.data()[v]));
            }
        }
    }
    return {okm_ok && bsas_ok && worst <= 1e-12,
            std::string("okm trace ") + (okm_ok ? "exact" : "WRONG") + ", bsas trace " + (bsas_ok ? "exact" : "WRONG") +
                ", som/okm max |diff| " + sci(worst) + " over 50 streams of 100"};
}

// ---- 3: WKNN -------------------------------------------------------------------

Outcome wknn_equivalence() {
    std::mt19937_64 rng(3);
    int agree = 0;
    for (int q = 0; q < 1000; ++q) {
        const std::size_t n = 5 + rng() % 80;
        const std::size_t dim = 1 + rng() % 6;
        Matrix pts = testing::random_matrix(n, dim, rng);
        if (q % 4 == 0) {
            for (double& v : pts.data()) v = std::round(v * 2);
        }
        std::vector<int> labels(n);
        ReferenceSet ref(dim);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = static_cast<int>(rng() % 5);
            ref.add(pts.row(i), labels[i]);
        }
        Vector x = testing::random_matrix(1, dim, rng).row_vector(0);
        if (q % 4 == 0) {
            for (double& v : x) v = std::round(v * 2);
        }
        const std::size_t k = 1 + rng() % std::min<std::size_t>(n, 10);
        agree += classify(ref, {k, Weighting::distance_weighted}, x).label == testing::brute_force_vote(pts, labels, k, x);
    }
    // equidistant neighbors: d_k == d_1, every weight 1, majority B wins
    ReferenceSet eq(1);
    eq.add(Vector{1.0}, 0);
    eq.add(Vector{-1.0}, 1);
    eq.add(Vector{1.0}, 1);
    const auto c = classify(eq, {3, Weighting::distance_weighted}, Vector{0.0});
    const bool equidistant_ok = c.label == 1 && c.weights == std::vector<double>{1.0, 1.0, 1.0};
    ReferenceSet grid(2);
    for (int i = 0; i < 4; ++i) grid.add(Vector{std::cos(i * 1.5707963267948966), std::sin(i * 1.5707963267948966)}, i % 2 == 0 ? 5 : 6);
    const auto c2 = classify(grid, {4, Weighting::distance_weighted}, Vector{0.0, 0.0});
    const bool equidistant_tie_ok = c2.label == 5;  // 2 vs 2, first neighbor (index 0) is label 5
    return {agree == 1000 && equidistant_ok && equidistant_tie_ok,
            "brute-force agreement " + std::to_string(agree) + "/1000; equidistant fixtures " +
                (equidistant_ok && equidistant_tie_ok ? "ok" : "WRONG")};
}

// ---- 4: decision rule ------------------------------------------------------------

Outcome decision_properties() {
    std::mt19937_64 rng(4);
    auto cluster = [&](Matrix& members, Vector& c) {
        const std::size_t dim = 1 + rng() % 5;
        const std::size_t n = 1 + rng() % 25;
        members = testing::random_matrix(n, dim, rng, 0.5 + static_cast<double>(rng() % 4));
        c.assign(dim, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < dim; ++j) c[j] += members(i, j) / static_cast<double>(n);
    };
    int mono = 0, member = 0, inner = 0;
    Matrix m;
    Vector c;
    for (int t = 0; t < 10000; ++t) {
        cluster(m, c);
        const auto x = testing::random_matrix(1, c.size(), rng, 3.0).row_vector(0);
        const double t1 = std::uniform_real_distribution<double>(-5, 5)(rng);
        const double t2 = t1 + std::uniform_real_distribution<double>(0, 5)(rng);
        mono += !accepts(m, c, x, t1) || accepts(m, c, x, t2);
    }
    for (int t = 0; t < 10000; ++t) {
        cluster(m, c);
        const double tau = std::uniform_real_distribution<double>(0, 3)(rng);
        member += accepts(m, c, m.row(rng() % m.rows()), tau);
    }
    for (int t = 0; t < 10000; ++t) {
        cluster(m, c);
        const double tau = -std::uniform_real_distribution<double>(0.01, 4)(rng);
        const auto dir = testing::random_matrix(1, c.size(), rng).row_vector(0);
        double norm = 0;
        for (double v : dir) norm += v * v;
        norm = std::sqrt(norm);
        const double r = std::uniform_real_distribution<double>(0, 0.999)(rng) * -tau;
        Vector x = c;
        for (std::size_t j = 0; j < x.size(); ++j) x[j] += norm > 0 ? dir[j] / norm * r : 0.0;
        inner += !accepts(m, c, x, tau);
    }
    return {mono == 10000 && member == 10000 && inner == 10000,
            "monotone " + std::to_string(mono) + "/10000, member acceptance " + std::to_string(member) +
                "/10000, inner-ball rejection " + std::to_string(inner) + "/10000"};
}

// ---- 5 and 6: synthetic end-to-end -----------------------------------------------

struct Synthetic {
    PipelineConfig config;
    StreamInputs inputs;
    std::optional<PreparedData> data;
    std::optional<GridResult> proposed;
    double proposed_seconds = 0.0;
};

Synthetic& synthetic() {
    static Synthetic s = [] {
        const SyntheticSpec spec;
        auto [corpus, stream] = split_by_time(make_synthetic(spec), spec.cutoff);
        return Synthetic{PipelineConfig{}, {std::move(corpus), std::move(stream)}, {}, {}, 0.0};
    }();
    return s;
}

Outcome end_to_end() {
    auto& s = synthetic();
    const auto start = std::chrono::steady_clock::now();
    s.data = prepare(s.inputs, s.config.n_features);
    s.proposed = run_grid(s.config, *s.data, s.config.online_clusters, s.config.algorithms, s.config.repeats);
    s.proposed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    Outcome o;
    o.pass = s.inputs.corpus.size() == 4000 && s.inputs.stream.size() == 3000 && s.inputs.corpus.dim() == 100;
    double okm_min = 1.0, other_min = 1.0;
    const auto curves = s.proposed->curves(s.config.algorithms, s.config.online_clusters);
    std::map<std::string, std::string> rows;
    for (const auto& c : curves) {
        const bool okm = c.algorithm == OnlineAlgorithm::okm;
        const double floor = okm ? 0.90 : 0.85;
        if (c.purity.count != s.config.repeats || c.purity.mean < floor) o.pass = false;
        (okm ? okm_min : other_min) = std::min(okm ? okm_min : other_min, c.purity.mean);
        auto& row = rows[std::string(to_string(c.algorithm))];
        row += (row.empty() ? "" : " ") + fmt(c.purity.mean, 3);
    }
    for (const auto& [alg, row] : rows) o.notes.push_back(alg + " purity k=4..10: " + row);
    double new_fraction = 0.0;
    for (const auto& r : s.proposed->repeats) new_fraction += r.new_fraction / static_cast<double>(s.proposed->repeats.size());
    o.notes.push_back("mean new-route fraction " + fmt(new_fraction, 3));
    o.detail = "min mean purity okm " + fmt(okm_min, 3) + " (>= 0.90), som/bsas " + fmt(other_min, 3) +
               " (>= 0.85) over " + std::to_string(s.config.repeats) + " repeats";
    return o;
}

Outcome baseline_comparison() {
    auto& s = synthetic();
    if (!s.proposed) return {false, "needs criterion 5's grid"};
    const auto baseline =
        run_reference_baseline(s.config, *s.data, s.config.online_clusters, s.config.algorithms, s.config.repeats);
    const auto pairs = pair_with_baseline(*s.proposed, baseline, s.config.algorithms, s.config.online_clusters);
    Outcome o{true, "", {}};
    for (auto a : s.config.algorithms) {
        std::size_t wins = 0, total = 0;
        double p = 0, b = 0;
        for (const auto& pr : pairs) {
            if (pr.algorithm != a) continue;
            ++total;
            wins += pr.proposed_wins();
            p += pr.proposed_purity;
            b += pr.baseline_purity;
        }
        if (total != s.config.repeats || wins < 18) o.pass = false;
        o.detail += (o.detail.empty() ? "" : ", ") + std::string(to_string(a)) + " " + std::to_string(wins) + "/" +
                    std::to_string(total);
        o.notes.push_back(std::string(to_string(a)) + " mean purity proposed " + fmt(p / static_cast<double>(total), 3) +
                          " vs baseline " + fmt(b / static_cast<double>(total), 3));
    }
    o.detail = "paired wins " + o.detail + " (>= 18 of 20 each)";
    return o;
}

// ---- 7: determinism through the CLI ---------------------------------------------

int run_cli(const std::string& args) {
    const std::string cmd = std::string(FAMSTREAM_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "famstream-acceptance-determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "fixture.csv");
        write_csv(make_synthetic(SyntheticSpec{}), out);
    }
    const std::string common = "grid --data-path " + (dir / "fixture.csv").string() + " --cutoff 2018-11 --seed 42 --no-timings";
    if (run_cli(common + " --output-dir " + (dir / "a").string()) != 0 ||
        run_cli(common + " --output-dir " + (dir / "b").string()) != 0) {
        return {false, "grid command failed"};
    }
    std::set<std::string> fa, fb;
    for (const auto& e : fs::recursive_directory_iterator(dir / "a"))
        if (e.is_regular_file()) fa.insert(fs::relative(e.path(), dir / "a").string());
    for (const auto& e : fs::recursive_directory_iterator(dir / "b"))
        if (e.is_regular_file()) fb.insert(fs::relative(e.path(), dir / "b").string());
    std::size_t same = 0;
    for (const auto& f : fa) same += fb.count(f) && testing::slurp(dir / "a" / f) == testing::slurp(dir / "b" / f);
    std::string names;
    for (const auto& f : fa) names += (names.empty() ? "" : " ") + f;
    return {fa == fb && !fa.empty() && same == fa.size(),
            std::to_string(same) + "/" + std::to_string(fa.size()) + " files byte-identical (" + names + ")"};
}

// ---- 8: PCA validity ----------------------------------------------------------

Outcome pca_validity() {
    auto& s = synthetic();
    const Matrix raw = s.inputs.corpus.feature_matrix();
    const Matrix scaled = apply_scaler(fit_scaler(raw), raw);
    const auto pca = fit_pca(scaled, s.config.n_features);
    const std::size_t k = pca.n_components();
    double ortho = 0.0;
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) {
            double d = 0;
            for (std::size_t j = 0; j < pca.dim(); ++j) d += pca.components(a, j) * pca.components(b, j);
            ortho = std::max(ortho, std::abs(d - (a == b ? 1.0 : 0.0)));
        }
    const Matrix y = transform_pca(pca, scaled);
    double rel = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        double mean = 0, sq = 0;
        for (std::size_t i = 0; i < y.rows(); ++i) mean += y(i, c);
        mean /= static_cast<double>(y.rows());
        for (std::size_t i = 0; i < y.rows(); ++i) sq += (y(i, c) - mean) * (y(i, c) - mean);
        const double var = sq / static_cast<double>(y.rows() - 1);
        rel = std::max(rel, std::abs(var - pca.variances[c]) / std::max(pca.variances[c], 1e-300));
    }
    const auto a = run_feature_selection(s.config, s.inputs);
    const auto b = run_feature_selection(s.config, s.inputs);
    std::ostringstream ta, tb;
    write_feature_selection_csv(a, ta);
    write_feature_selection_csv(b, tb);
    const bool same = ta.str() == tb.str() && a.best_count == b.best_count && a.best_clusterer == b.best_clusterer;
    return {ortho <= 1e-8 && rel <= 1e-8 && same,
            "orthonormality max dev " + sci(ortho) + ", variance max rel dev " + sci(rel) +
                ", selection table " + (same ? "identical" : "DIFFERS") + " across runs (" +
                std::to_string(a.table.size()) + " cells, best " + std::to_string(a.best_count) + " via " +
                a.best_clusterer + ")"};
}

// ---- 9: optional EMBER run -------------------------------------------------------

Outcome ember() {
    PipelineConfig c;
    c.corpus_path = std::getenv("FAMSTREAM_EMBER_CORPUS");
    c.stream_path = std::getenv("FAMSTREAM_EMBER_STREAM");
    c.online_algorithm = OnlineAlgorithm::okm;
    c.online_clusters = {10};
    c.repeats = 1;
    const auto inputs = load_inputs(c);
    const auto run = run_pipeline(c, inputs);
    const auto& r = run.report.repeats.front();
    const double purity_new = r.new_metrics ? r.new_metrics->purity : 0.0;
    const bool ok = std::abs(purity_new - 0.9334) <= 0.05 && std::abs(r.new_fraction - 0.112) <= 0.03;
    return {ok, "okm k=10 new-route purity " + fmt(purity_new, 4) + " (target 0.9334 +- 0.05), new fraction " +
                    fmt(r.new_fraction, 4) + " (target 0.112 +- 0.03)"};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "metric oracle equivalence", 10, metric_oracles},
        {2, "algorithm traces", 5, algorithm_traces},
        {3, "wknn equivalence", 10, wknn_equivalence},
        {4, "decision-rule properties", 10, decision_properties},
        {5, "synthetic end-to-end", 60, end_to_end},
        {6, "baseline comparison", 0, baseline_comparison},
        {7, "determinism", 0, determinism},
        {8, "pca validity", 0, pca_validity},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what(), {}};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string limit;
        if (c.time_limit > 0) {
            limit = " < " + fmt(c.time_limit, 0) + "s";
            if (secs >= c.time_limit) {
                o.pass = false;
                o.detail += "; over time limit";
            }
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.number << " (" << c.title << "): " << o.detail
                  << " [" << fmt(secs, 2) << "s" << limit << "]\n";
        for (const auto& n : o.notes) std::cout << "      " << n << "\n";
        std::cout.flush();
    }
    if (std::getenv("FAMSTREAM_EMBER_CORPUS") && std::getenv("FAMSTREAM_EMBER_STREAM")) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = ember();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what(), {}};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion 9 (EMBER, optional): " << o.detail << " [" << fmt(secs, 1)
                  << "s]\n";
    } else {
        std::cout << "SKIP  criterion 9 (EMBER, optional): set FAMSTREAM_EMBER_CORPUS and FAMSTREAM_EMBER_STREAM\n";
    }
    std::cout << (failed == 0 ? "all gating criteria passed" : std::to_string(failed) + " gating criteria failed") << "\n";
    return failed == 0 ? 0 : 1;
}
