#include "famstream/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>

#include "famstream/batch.hpp"
#include "famstream/error.hpp"

namespace famstream {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

nlohmann::json optional_number(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::size_t algorithm_index(OnlineAlgorithm a) { return static_cast<std::size_t>(a); }

LabelMap label_map(const Dataset& data) {
    LabelMap m;
    for (const auto& s : data.samples()) m.emplace(s.id, *s.family);
    return m;
}

// Rows of `m` at `rows`, plus the matching ids.
std::pair<Matrix, std::vector<std::string>> gather(const Matrix& m, const std::vector<std::string>& ids,
                                                   const std::vector<std::size_t>& rows) {
    std::vector<std::string> out_ids;
    out_ids.reserve(rows.size());
    for (std::size_t r : rows) out_ids.push_back(ids[r]);
    return {m.select_rows(rows), std::move(out_ids)};
}

MetricsReport known_route_metrics(const KnownModel& model, const LabelMap* truth) {
    Matrix points = Matrix::with_cols(model.clusters.dim());
    std::vector<std::string> ids;
    std::vector<int> labels;
    for (const auto& c : model.clusters.clusters()) {
        for (std::size_t i = 0; i < c.count(); ++i) {
            points.push_row(c.members.row(i));
            ids.push_back(c.member_ids[i]);
            labels.push_back(c.id);
        }
    }
    return evaluate(points, ids, labels, truth);
}

template <typename Fn>
void parallel_repeats(std::size_t repeats, Fn&& body) {
    std::vector<std::exception_ptr> failures(repeats);
    const auto n = static_cast<std::int64_t>(repeats);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t r = 0; r < n; ++r) {
        try {
            body(static_cast<std::size_t>(r));
        } catch (...) {
            failures[static_cast<std::size_t>(r)] = std::current_exception();
        }
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
}

}  // namespace

// ---- config -------------------------------------------------------------------

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw_usage("config must be a JSON object");
    PipelineConfig c;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "corpus_path") c.corpus_path = value.get<std::string>();
            else if (key == "stream_path") c.stream_path = value.get<std::string>();
            else if (key == "data_path") c.data_path = value.get<std::string>();
            else if (key == "cutoff") c.cutoff = YearMonth::parse(value.get<std::string>());
            else if (key == "n_features") c.n_features = value.get<std::size_t>();
            else if (key == "corpus_clusters") c.corpus_clusters = value.get<std::size_t>();
            else if (key == "corpus_epochs") c.corpus_epochs = value.get<int>();
            else if (key == "wknn_k") c.wknn.k = value.get<std::size_t>();
            else if (key == "wknn_weighting") c.wknn.weighting = parse_weighting(value.get<std::string>());
            else if (key == "tau") c.decision.tau = value.get<double>();
            else if (key == "update_centroids") c.decision.update_centroids = value.get<bool>();
            else if (key == "grow_reference") c.decision.grow_reference = value.get<bool>();
            else if (key == "grow_members") c.decision.grow_members = value.get<bool>();
            else if (key == "online_algorithm") c.online_algorithm = parse_online_algorithm(value.get<std::string>());
            else if (key == "online_clusters") {
                c.online_clusters = value.is_array() ? value.get<std::vector<std::size_t>>()
                                                     : std::vector<std::size_t>{value.get<std::size_t>()};
            } else if (key == "algorithms") {
                c.algorithms.clear();
                for (const auto& a : value) c.algorithms.push_back(parse_online_algorithm(a.get<std::string>()));
            } else if (key == "bsas_theta") {
                if (!value.is_null()) c.bsas_theta = value.get<double>();
            } else if (key == "som_lambda") {
                if (!value.is_null()) c.som_lambda = value.get<double>();
            } else if (key == "som_sigma_final") {
                c.som_sigma_final = value.is_null() ? std::nullopt : std::optional<double>(value.get<double>());
            } else if (key == "okm_seeding") c.okm_seeding = parse_okm_seeding(value.get<std::string>());
            else if (key == "repeats") c.repeats = value.get<std::size_t>();
            else if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "output_dir") c.output_dir = value.get<std::string>();
            else if (key == "taus") c.taus = value.get<std::vector<double>>();
            else if (key == "feature_candidates") c.feature_candidates = value.get<std::vector<std::size_t>>();
            else throw_usage("unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw_usage(std::string("config: ") + e.what());
    }
    return c;
}

nlohmann::json PipelineConfig::to_json() const {
    std::vector<std::string> algs;
    for (auto a : algorithms) algs.emplace_back(to_string(a));
    return {{"corpus_path", corpus_path.string()},
            {"stream_path", stream_path.string()},
            {"data_path", data_path.string()},
            {"cutoff", cutoff ? nlohmann::json(cutoff->to_string()) : nlohmann::json(nullptr)},
            {"n_features", n_features},
            {"corpus_clusters", corpus_clusters},
            {"corpus_epochs", corpus_epochs},
            {"wknn_k", wknn.k},
            {"wknn_weighting", to_string(wknn.weighting)},
            {"tau", decision.tau},
            {"update_centroids", decision.update_centroids},
            {"grow_reference", decision.grow_reference},
            {"grow_members", decision.grow_members},
            {"online_algorithm", to_string(online_algorithm)},
            {"online_clusters", online_clusters},
            {"algorithms", algs},
            {"bsas_theta", optional_number(bsas_theta)},
            {"som_lambda", optional_number(som_lambda)},
            {"som_sigma_final", optional_number(som_sigma_final)},
            {"okm_seeding", to_string(okm_seeding)},
            {"repeats", repeats},
            {"seed", seed},
            {"output_dir", output_dir.string()},
            {"taus", taus},
            {"feature_candidates", feature_candidates}};
}

void PipelineConfig::validate() const {
    if (n_features == 0) throw_usage("n-features must be positive");
    if (corpus_clusters == 0) throw_usage("corpus-clusters must be positive");
    if (corpus_epochs < 0) throw_usage("corpus-epochs must be non-negative");
    if (wknn.k == 0) throw_usage("wknn-k must be positive");
    if (!std::isfinite(decision.tau)) throw_usage("tau must be finite");
    if (online_clusters.empty()) throw_usage("online-clusters must not be empty");
    if (std::find(online_clusters.begin(), online_clusters.end(), std::size_t{0}) != online_clusters.end()) {
        throw_usage("online-clusters entries must be positive");
    }
    if (algorithms.empty()) throw_usage("algorithms must not be empty");
    if (bsas_theta && !(*bsas_theta > 0.0)) throw_usage("bsas-theta must be positive");
    if (som_lambda && !(*som_lambda > 0.0)) throw_usage("som-lambda must be positive");
    if (som_sigma_final && !(*som_sigma_final > 0.0)) throw_usage("som-sigma-final must be positive");
    if (repeats == 0) throw_usage("repeats must be positive");
    if (taus.empty()) throw_usage("taus must not be empty");
    for (double t : taus) {
        if (!std::isfinite(t)) throw_usage("taus must be finite");
    }
    if (feature_candidates.empty()) throw_usage("feature-candidates must not be empty");
}

// ---- seeds --------------------------------------------------------------------

std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t repeat_seed(std::uint64_t master, std::size_t repeat) noexcept { return mix_seed(master + repeat + 1); }

std::uint64_t corpus_seed(std::uint64_t repeat_seed) noexcept { return mix_seed(repeat_seed ^ 0xC0ULL); }

std::uint64_t stream_order_seed(std::uint64_t repeat_seed) noexcept { return mix_seed(repeat_seed ^ 0x5EULL); }

std::uint64_t corpus_order_seed(std::uint64_t repeat_seed) noexcept { return mix_seed(repeat_seed ^ 0xD0ULL); }

std::uint64_t online_seed(std::uint64_t repeat_seed, OnlineAlgorithm algorithm, std::size_t n_clusters) noexcept {
    return mix_seed(repeat_seed + 0x100ULL * (algorithm_index(algorithm) + 1) + n_clusters);
}

// ---- stages -------------------------------------------------------------------

std::vector<std::size_t> chronological_order(std::span<const int> periods, std::uint64_t seed) {
    std::vector<std::size_t> order(periods.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (std::any_of(periods.begin(), periods.end(), [](int p) { return p < 0; })) return order;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return periods[a] < periods[b]; });
    std::mt19937_64 rng(seed);
    for (std::size_t lo = 0; lo < order.size();) {
        std::size_t hi = lo + 1;
        while (hi < order.size() && periods[order[hi]] == periods[order[lo]]) ++hi;
        std::shuffle(order.begin() + static_cast<std::ptrdiff_t>(lo), order.begin() + static_cast<std::ptrdiff_t>(hi), rng);
        lo = hi;
    }
    return order;
}

StreamInputs load_inputs(const PipelineConfig& config) {
    const bool split_mode = !config.data_path.empty();
    const bool pair_mode = !config.corpus_path.empty() || !config.stream_path.empty();
    if (split_mode && pair_mode) throw_usage("give either data-path + cutoff or corpus-path + stream-path, not both");
    if (pair_mode && config.corpus_path.empty()) throw_usage("corpus-path is required");
    if (!split_mode && !pair_mode) throw_usage("no input data: set corpus-path (and stream-path) or data-path + cutoff");
    if (split_mode) {
        if (!config.cutoff) throw_usage("data-path requires a cutoff");
        auto [corpus, stream] = split_by_time(load_dataset(config.data_path), *config.cutoff);
        return {std::move(corpus), std::move(stream)};
    }
    Dataset corpus = load_dataset(config.corpus_path);
    if (config.stream_path.empty()) return {std::move(corpus), Dataset(corpus.dim())};
    Dataset stream = load_dataset(config.stream_path);
    if (stream.dim() != corpus.dim()) {
        throw_data("stream dimension " + std::to_string(stream.dim()) + " differs from corpus dimension " +
                   std::to_string(corpus.dim()));
    }
    return {std::move(corpus), std::move(stream)};
}

PreparedData prepare(const StreamInputs& inputs, std::size_t n_features) {
    const auto start = Clock::now();
    if (inputs.corpus.empty()) throw_data("corpus is empty");
    if (n_features > std::min(inputs.corpus.dim(), inputs.corpus.size())) {
        throw_usage("n-features = " + std::to_string(n_features) + " exceeds min(dimension, corpus size) = " +
                    std::to_string(std::min(inputs.corpus.dim(), inputs.corpus.size())));
    }
    PreparedData p;
    const Matrix raw_corpus = inputs.corpus.feature_matrix();
    p.scaler = fit_scaler(raw_corpus);
    const Matrix scaled_corpus = apply_scaler(p.scaler, raw_corpus);
    p.pca = fit_pca(scaled_corpus, n_features);
    p.corpus = transform_pca(p.pca, scaled_corpus);
    p.corpus_ids = inputs.corpus.ids();
    p.stream = Matrix::with_cols(n_features);
    p.stream.reserve_rows(inputs.stream.size());
    for (const auto& s : inputs.stream.samples()) p.stream.push_row(transform_pca(p.pca, apply_scaler(p.scaler, s.features)));
    p.stream_ids = inputs.stream.ids();
    auto periods = [](const Dataset& d) {
        std::vector<int> out;
        out.reserve(d.size());
        for (const auto& s : d.samples()) out.push_back(s.first_seen ? s.first_seen->year * 12 + s.first_seen->month - 1 : -1);
        return out;
    };
    p.corpus_periods = periods(inputs.corpus);
    p.stream_periods = periods(inputs.stream);
    if (inputs.corpus.has_labels() && (inputs.stream.empty() || inputs.stream.has_labels())) {
        LabelMap truth = label_map(inputs.corpus);
        for (auto& [id, family] : label_map(inputs.stream)) truth.emplace(id, family);
        p.truth = std::move(truth);
    }
    p.seconds = seconds_since(start);
    return p;
}

RoutingResult route_stream(const PreparedData& data, const PipelineConfig& config, std::uint64_t rseed) {
    auto start = Clock::now();
    KnownClusters clusters =
        som_batch(data.corpus, data.corpus_ids, config.corpus_clusters, config.corpus_epochs, corpus_seed(rseed));
    RoutingResult r{KnownModel(std::move(clusters)), {}, {}, 0.0, 0.0};
    r.corpus_seconds = seconds_since(start);

    start = Clock::now();
    if (!data.stream.empty() && config.wknn.k > r.model.reference.size()) {
        throw_data("wknn-k exceeds the corpus size");
    }
    r.routes.reserve(data.stream.rows());
    for (std::size_t i : chronological_order(data.stream_periods, stream_order_seed(rseed))) {
        r.routes.push_back(route_sample(r.model, config.wknn, config.decision, data.stream.row(i), data.stream_ids[i]));
        if (r.routes.back().route == Route::new_family) r.new_rows.push_back(i);
    }
    r.wknn_seconds = seconds_since(start);
    return r;
}

OnlineConfig online_config(const PipelineConfig& config, OnlineAlgorithm algorithm, std::size_t n_clusters,
                           std::size_t stream_length) {
    OnlineConfig oc;
    oc.algorithm = algorithm;
    oc.n_clusters = n_clusters;
    oc.bsas_theta = config.bsas_theta;
    oc.som_sigma_final = config.som_sigma_final;
    oc.okm_seeding = config.okm_seeding;
    oc.som_expected_length = config.som_lambda.value_or(static_cast<double>(std::max<std::size_t>(stream_length, 1)));
    return oc;
}

OnlineOutcome run_online_stage(const Matrix& points, const std::vector<std::string>& ids, const LabelMap* truth,
                               const OnlineConfig& config, std::uint64_t seed, const PairwiseDistances* cache,
                               std::span<const std::size_t> order) {
    if (!order.empty() && order.size() != points.rows()) throw_runtime("online stage: order and points differ in length");
    OnlineOutcome out;
    const auto start = Clock::now();
    OnlineClusterer clusterer(config, points.cols(), seed);
    for (std::size_t i = 0; i < points.rows(); ++i) clusterer.update(points.row(order.empty() ? i : order[i]));
    clusterer.finish();
    out.labels = clusterer.final_assign(points);
    out.seconds = seconds_since(start);
    out.state = clusterer.to_json();
    out.clusters_formed = clusterer.n_clusters();

    if (points.empty()) return out;
    if (truth != nullptr) {
        std::vector<std::pair<std::string, int>> assignments;
        assignments.reserve(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) assignments.emplace_back(ids[i], out.labels[i]);
        out.metrics = purity(assignments, *truth);
        out.purity = out.metrics.purity;
    }
    std::vector<int> distinct(out.labels);
    std::sort(distinct.begin(), distinct.end());
    if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() >= 2) {
        out.silhouette = cache != nullptr ? mean_silhouette(*cache, out.labels) : mean_silhouette(points, out.labels);
        out.metrics.mean_silhouette = *out.silhouette;
        out.metrics.has_silhouette = true;
    }
    return out;
}

// ---- reports ------------------------------------------------------------------

MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary s;
    s.count = values.size();
    if (values.empty()) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(var / static_cast<double>(values.size()));
    return s;
}

namespace {

nlohmann::json summary_json(const MetricSummary& s) {
    if (s.count == 0) return nullptr;
    return {{"mean", s.mean}, {"std", s.std}, {"count", s.count}};
}

nlohmann::json timings_to_json(const StageTimings& t) {
    return {{"preprocess", t.preprocess},
            {"corpus_clustering", t.corpus_clustering},
            {"wknn_total", t.wknn_total},
            {"online_total", t.online_total},
            {"total", t.total}};
}


}  // namespace

std::map<std::string, MetricSummary> RunReport::aggregates() const {
    std::map<std::string, std::vector<double>> series;
    for (const auto& r : repeats) {
        series["new_fraction"].push_back(r.new_fraction);
        if (r.new_metrics) {
            if (labels_available) series["purity_new"].push_back(r.new_metrics->purity);
            if (r.new_metrics->has_silhouette) series["silhouette_new"].push_back(r.new_metrics->mean_silhouette);
        }
        if (r.known_metrics) {
            if (labels_available) series["purity_known"].push_back(r.known_metrics->purity);
            if (r.known_metrics->has_silhouette) series["silhouette_known"].push_back(r.known_metrics->mean_silhouette);
        }
    }
    std::map<std::string, MetricSummary> out;
    for (const char* key : {"new_fraction", "purity_new", "silhouette_new", "purity_known", "silhouette_known"}) {
        out[key] = summarize(series[key]);
    }
    return out;
}

nlohmann::json RunReport::to_json() const {
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& r : repeats) {
        nlohmann::json j = {{"repeat", r.repeat},
                            {"seed", r.seed},
                            {"n_stream", r.n_stream},
                            {"n_known", r.n_known},
                            {"n_new", r.n_new},
                            {"new_fraction", r.new_fraction},
                            {"online_clusters_formed", r.online_clusters_formed}};
        auto pick = [&](const std::optional<MetricsReport>& m, const char* pkey, const char* skey) {
            j[pkey] = (m && labels_available) ? nlohmann::json(m->purity) : nlohmann::json(nullptr);
            j[skey] = (m && m->has_silhouette) ? nlohmann::json(m->mean_silhouette) : nlohmann::json(nullptr);
        };
        pick(r.new_metrics, "purity_new", "silhouette_new");
        pick(r.known_metrics, "purity_known", "silhouette_known");
        reps.push_back(std::move(j));
    }
    nlohmann::json agg = nlohmann::json::object();
    for (const auto& [k, v] : aggregates()) agg[k] = summary_json(v);
    return {{"algorithm", algorithm},
            {"n_clusters", n_clusters},
            {"labels_available", labels_available},
            {"repeats", reps},
            {"aggregates", agg}};
}

nlohmann::json RunReport::timings_json() const {
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& r : repeats) {
        nlohmann::json j = timings_to_json(r.timings);
        j["repeat"] = r.repeat;
        reps.push_back(std::move(j));
    }
    return {{"unit", "seconds"}, {"repeats", reps}};
}

PipelineRun run_pipeline(const PipelineConfig& config, const StreamInputs& inputs) {
    config.validate();
    const PreparedData data = prepare(inputs, config.n_features);
    const LabelMap* truth = data.truth ? &*data.truth : nullptr;
    const std::size_t n_clusters = config.online_clusters.front();

    PipelineRun run;
    run.report.algorithm = std::string(to_string(config.online_algorithm));
    run.report.n_clusters = n_clusters;
    run.report.labels_available = truth != nullptr;
    run.report.repeats.resize(config.repeats);
    std::vector<PipelineRun> firsts(1);

    parallel_repeats(config.repeats, [&](std::size_t rep) {
        const auto start = Clock::now();
        const std::uint64_t rseed = repeat_seed(config.seed, rep);
        RoutingResult routing = route_stream(data, config, rseed);
        auto [points, ids] = gather(data.stream, data.stream_ids, routing.new_rows);
        const OnlineConfig oc = online_config(config, config.online_algorithm, n_clusters, data.stream.rows());
        OnlineOutcome online = run_online_stage(points, ids, truth, oc, online_seed(rseed, config.online_algorithm, n_clusters));

        RepeatResult& r = run.report.repeats[rep];
        r.repeat = rep;
        r.seed = rseed;
        r.n_stream = data.stream.rows();
        r.n_new = routing.new_rows.size();
        r.n_known = r.n_stream - r.n_new;
        r.new_fraction = r.n_stream == 0 ? 0.0 : static_cast<double>(r.n_new) / static_cast<double>(r.n_stream);
        r.online_clusters_formed = online.clusters_formed;
        if (!points.empty()) r.new_metrics = online.metrics;
        r.known_metrics = known_route_metrics(routing.model, truth);
        r.timings.preprocess = data.seconds;
        r.timings.corpus_clustering = routing.corpus_seconds;
        r.timings.wknn_total = routing.wknn_seconds;
        r.timings.online_total = online.seconds;
        r.timings.total = data.seconds + seconds_since(start);

        if (rep == 0) {
            PipelineRun& first = firsts[0];
            first.assignments = routing.routes;
            std::size_t next = 0;
            for (auto& a : first.assignments) {
                if (a.route == Route::new_family) a.cluster_id = online.labels[next++];
            }
            first.new_metrics = r.new_metrics;
            first.known_metrics = r.known_metrics;
            first.models = {{"scaler", data.scaler.to_json()},
                            {"pca", data.pca.to_json()},
                            {"known_clusters", routing.model.clusters.to_json()},
                            {"online", online.state}};
        }
    });
    run.assignments = std::move(firsts[0].assignments);
    run.new_metrics = std::move(firsts[0].new_metrics);
    run.known_metrics = std::move(firsts[0].known_metrics);
    run.models = std::move(firsts[0].models);
    return run;
}

// ---- grids --------------------------------------------------------------------

std::vector<CurvePoint> GridResult::curves(const std::vector<OnlineAlgorithm>& algorithms,
                                           const std::vector<std::size_t>& counts) const {
    std::vector<CurvePoint> out;
    for (auto a : algorithms) {
        for (auto k : counts) {
            std::vector<double> pur;
            std::vector<double> sil;
            for (const auto& c : cells) {
                if (c.algorithm != a || c.n_clusters != k) continue;
                if (c.purity) pur.push_back(*c.purity);
                if (c.silhouette) sil.push_back(*c.silhouette);
            }
            out.push_back({a, k, summarize(pur), summarize(sil)});
        }
    }
    return out;
}

const GridCell* GridResult::find(OnlineAlgorithm a, std::size_t n_clusters, std::size_t repeat) const {
    for (const auto& c : cells) {
        if (c.algorithm == a && c.n_clusters == n_clusters && c.repeat == repeat) return &c;
    }
    return nullptr;
}

nlohmann::json GridResult::to_json(const std::vector<OnlineAlgorithm>& algorithms,
                                   const std::vector<std::size_t>& counts) const {
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& r : repeats) {
        reps.push_back({{"repeat", r.repeat},
                        {"seed", r.seed},
                        {"n_stream", r.n_stream},
                        {"n_new", r.n_new},
                        {"new_fraction", r.new_fraction}});
    }
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& p : curves(algorithms, counts)) {
        curve.push_back({{"algorithm", to_string(p.algorithm)},
                         {"n_clusters", p.n_clusters},
                         {"purity", summary_json(p.purity)},
                         {"silhouette", summary_json(p.silhouette)}});
    }
    std::size_t failed = 0;
    for (const auto& c : cells) failed += c.error.empty() ? 0 : 1;
    return {{"mode", mode}, {"repeats", reps}, {"curves", curve}, {"failed_cells", failed}};
}

namespace {

// Above this many points silhouettes are computed without the distance cache
// (the cache holds n^2 / 2 doubles).
constexpr std::size_t kMaxCachedPoints = 8000;

std::optional<PairwiseDistances> maybe_cache(const Matrix& points) {
    std::optional<PairwiseDistances> cache;
    if (points.rows() >= 2 && points.rows() <= kMaxCachedPoints) cache.emplace(points);
    return cache;
}

// Clusters `points` once per (algorithm, count) and appends the cells.
std::vector<GridCell> grid_cells(const PipelineConfig& config, const Matrix& points, const std::vector<std::string>& ids,
                                 const LabelMap* truth, const std::vector<std::size_t>& counts,
                                 const std::vector<OnlineAlgorithm>& algorithms, std::size_t rep, std::uint64_t rseed,
                                 std::size_t stream_length, const PairwiseDistances* cache,
                                 std::span<const std::size_t> order) {
    std::vector<GridCell> cells;
    for (auto a : algorithms) {
        for (auto k : counts) {
            GridCell cell;
            cell.algorithm = a;
            cell.n_clusters = k;
            cell.repeat = rep;
            cell.seed = online_seed(rseed, a, k);
            cell.n_points = points.rows();
            try {
                const auto outcome = run_online_stage(points, ids, truth, online_config(config, a, k, stream_length),
                                                      cell.seed, cache, order);
                cell.purity = outcome.purity;
                cell.silhouette = outcome.silhouette;
                cell.clusters_formed = outcome.clusters_formed;
                cell.online_seconds = outcome.seconds;
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

void validate_grid(const std::vector<std::size_t>& counts, const std::vector<OnlineAlgorithm>& algorithms,
                   std::size_t repeats) {
    if (counts.empty()) throw_usage("grid: no cluster counts");
    if (algorithms.empty()) throw_usage("grid: no algorithms");
    if (repeats == 0) throw_usage("grid: repeats must be positive");
}

}  // namespace

GridResult run_grid(const PipelineConfig& config, const PreparedData& data, const std::vector<std::size_t>& counts,
                    const std::vector<OnlineAlgorithm>& algorithms, std::size_t repeats) {
    validate_grid(counts, algorithms, repeats);
    const LabelMap* truth = data.truth ? &*data.truth : nullptr;
    GridResult g;
    g.mode = "proposed";
    g.repeats.resize(repeats);
    std::vector<std::vector<GridCell>> per_repeat(repeats);

    parallel_repeats(repeats, [&](std::size_t rep) {
        const auto start = Clock::now();
        const std::uint64_t rseed = repeat_seed(config.seed, rep);
        const RoutingResult routing = route_stream(data, config, rseed);
        auto [points, ids] = gather(data.stream, data.stream_ids, routing.new_rows);
        const auto cache = maybe_cache(points);
        per_repeat[rep] = grid_cells(config, points, ids, truth, counts, algorithms, rep, rseed, data.stream.rows(),
                                     cache ? &*cache : nullptr, {});

        GridRepeat& r = g.repeats[rep];
        r.repeat = rep;
        r.seed = rseed;
        r.n_stream = data.stream.rows();
        r.n_new = routing.new_rows.size();
        r.new_fraction = r.n_stream == 0 ? 0.0 : static_cast<double>(r.n_new) / static_cast<double>(r.n_stream);
        r.timings.preprocess = data.seconds;
        r.timings.corpus_clustering = routing.corpus_seconds;
        r.timings.wknn_total = routing.wknn_seconds;
        for (const auto& c : per_repeat[rep]) r.timings.online_total += c.online_seconds;
        r.timings.total = data.seconds + seconds_since(start);
    });
    for (auto& cells : per_repeat) g.cells.insert(g.cells.end(), cells.begin(), cells.end());
    return g;
}

GridResult run_reference_baseline(const PipelineConfig& config, const PreparedData& data,
                                  const std::vector<std::size_t>& counts,
                                  const std::vector<OnlineAlgorithm>& algorithms, std::size_t repeats) {
    validate_grid(counts, algorithms, repeats);
    const LabelMap* truth = data.truth ? &*data.truth : nullptr;

    Matrix points = data.corpus;
    for (std::size_t i = 0; i < data.stream.rows(); ++i) points.push_row(data.stream.row(i));
    std::vector<std::string> ids = data.corpus_ids;
    ids.insert(ids.end(), data.stream_ids.begin(), data.stream_ids.end());

    const auto cache = maybe_cache(points);

    GridResult g;
    g.mode = "baseline";
    g.repeats.resize(repeats);
    std::vector<std::vector<GridCell>> per_repeat(repeats);
    parallel_repeats(repeats, [&](std::size_t rep) {
        const auto start = Clock::now();
        const std::uint64_t rseed = repeat_seed(config.seed, rep);
        // Corpus first, then stream, each in the repeat's chronological order.
        std::vector<std::size_t> order = chronological_order(data.corpus_periods, corpus_order_seed(rseed));
        for (std::size_t i : chronological_order(data.stream_periods, stream_order_seed(rseed))) {
            order.push_back(data.corpus.rows() + i);
        }
        per_repeat[rep] = grid_cells(config, points, ids, truth, counts, algorithms, rep, rseed, points.rows(),
                                     cache ? &*cache : nullptr, order);
        GridRepeat& r = g.repeats[rep];
        r.repeat = rep;
        r.seed = rseed;
        r.n_stream = points.rows();
        r.n_new = points.rows();
        r.new_fraction = 1.0;
        for (const auto& c : per_repeat[rep]) r.timings.online_total += c.online_seconds;
        r.timings.preprocess = data.seconds;
        r.timings.total = data.seconds + seconds_since(start);
    });
    for (auto& cells : per_repeat) g.cells.insert(g.cells.end(), cells.begin(), cells.end());
    return g;
}

std::vector<TauSweepRow> run_tau_sweep(const PipelineConfig& config, const PreparedData& data) {
    config.validate();
    const std::uint64_t rseed = repeat_seed(config.seed, 0);
    const KnownModel model(
        som_batch(data.corpus, data.corpus_ids, config.corpus_clusters, config.corpus_epochs, corpus_seed(rseed)));
    return sweep_tau(model, config.wknn, config.decision, data.stream, config.taus);
}

FeatureSelection run_feature_selection(const PipelineConfig& config, const StreamInputs& inputs) {
    config.validate();
    const Matrix raw = inputs.corpus.feature_matrix();
    const Matrix scaled = apply_scaler(fit_scaler(raw), raw);
    std::vector<BatchClustererConfig> clusterers(3);
    clusterers[0].algorithm = BatchAlgorithm::kmeans;
    clusterers[1].algorithm = BatchAlgorithm::som;
    clusterers[1].epochs = config.corpus_epochs;
    clusterers[2].algorithm = BatchAlgorithm::dbscan;
    for (auto& c : clusterers) c.k = config.corpus_clusters;
    return select_feature_count(scaled, config.feature_candidates, clusterers, corpus_seed(repeat_seed(config.seed, 0)));
}

}  // namespace famstream
