#pragma once

// End-to-end orchestration: scale + project the corpus, cluster it, route the
// stream through WKNN and the decision rule, cluster the new-family route
// online, and score both routes.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "famstream/dataset.hpp"
#include "famstream/decision.hpp"
#include "famstream/metrics.hpp"
#include "famstream/online.hpp"
#include "famstream/preprocess.hpp"
#include "famstream/wknn.hpp"

namespace famstream {

struct PipelineConfig {
    std::filesystem::path corpus_path;
    std::filesystem::path stream_path;
    // Alternative to corpus/stream: one file split at `cutoff`.
    std::filesystem::path data_path;
    std::optional<YearMonth> cutoff;

    std::size_t n_features = 40;
    std::size_t corpus_clusters = 4;
    int corpus_epochs = 10;
    WKNNParams wknn;
    DecisionParams decision;
    OnlineAlgorithm online_algorithm = OnlineAlgorithm::okm;
    // `run` uses the first entry; `grid` and `baseline` sweep all of them.
    std::vector<std::size_t> online_clusters{4, 5, 6, 7, 8, 9, 10};
    std::vector<OnlineAlgorithm> algorithms{OnlineAlgorithm::som, OnlineAlgorithm::bsas, OnlineAlgorithm::okm};
    std::optional<double> bsas_theta;
    // SOM learning-rate decay constant; defaults to the length of the stream
    // being clustered.
    std::optional<double> som_lambda;
    // Final SOM neighbourhood width; null keeps the width decay equal to som_lambda.
    std::optional<double> som_sigma_final = 0.01;
    OKMSeeding okm_seeding = OKMSeeding::kmeanspp;
    std::size_t repeats = 20;
    std::uint64_t seed = 42;
    std::filesystem::path output_dir = "famstream-out";
    std::vector<double> taus{-5.0, -2.0, 0.0, 2.0, 5.0};
    std::vector<std::size_t> feature_candidates{20, 30, 40, 50, 60, 70, 80};

    // Keys are the field names above; wknn and decision are flattened to
    // wknn_k, wknn_weighting, tau, update_centroids, grow_reference, grow_members.
    static PipelineConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    // Throws a usage error on out-of-range settings.
    void validate() const;
};

// ---- seeds --------------------------------------------------------------------

// splitmix64 finalizer.
std::uint64_t mix_seed(std::uint64_t x) noexcept;
// Seed of repeat r: mix_seed(master + r + 1).
std::uint64_t repeat_seed(std::uint64_t master, std::size_t repeat) noexcept;
// Corpus clustering seed of a repeat: mix_seed(repeat_seed ^ 0xC0).
std::uint64_t corpus_seed(std::uint64_t repeat_seed) noexcept;
// Online clusterer seed: mix_seed(repeat_seed + 0x100 * (algorithm + 1) + n_clusters).
std::uint64_t online_seed(std::uint64_t repeat_seed, OnlineAlgorithm algorithm, std::size_t n_clusters) noexcept;

// ---- stages -------------------------------------------------------------------

struct StreamInputs {
    Dataset corpus;
    Dataset stream;
};

// Reads corpus + stream, or one file split at the cutoff. Throws a usage error when
// the config names neither or both input modes.
StreamInputs load_inputs(const PipelineConfig& config);

struct PreparedData {
    ScalerModel scaler;
    PCAModel pca;
    Matrix corpus;
    std::vector<std::string> corpus_ids;
    Matrix stream;
    std::vector<std::string> stream_ids;
    // Months since year 0 of each sample's first_seen, -1 when undated.
    std::vector<int> corpus_periods;
    std::vector<int> stream_periods;
    std::optional<LabelMap> truth;  // present when every sample carries a family
    double seconds = 0.0;
};

// Scaler and PCA are fitted on the corpus only and applied unchanged to the stream.
PreparedData prepare(const StreamInputs& inputs, std::size_t n_features);

// Processing order of a repeat: chronological by month, with samples of the
// same month shuffled by `seed` since dates carry no finer order. Input order
// is kept when any sample is undated.
std::vector<std::size_t> chronological_order(std::span<const int> periods, std::uint64_t seed);

// Within-month shuffle seeds of a repeat.
std::uint64_t stream_order_seed(std::uint64_t repeat_seed) noexcept;
std::uint64_t corpus_order_seed(std::uint64_t repeat_seed) noexcept;

struct RoutingResult {
    KnownModel model;
    std::vector<RouteAssignment> routes;  // processing order
    std::vector<std::size_t> new_rows;    // stream rows routed new, in processing order
    double corpus_seconds = 0.0;
    double wknn_seconds = 0.0;
};

// Clusters the corpus with the batch SOM, then walks the stream in the
// repeat's chronological order.
RoutingResult route_stream(const PreparedData& data, const PipelineConfig& config, std::uint64_t repeat_seed);

OnlineConfig online_config(const PipelineConfig& config, OnlineAlgorithm algorithm, std::size_t n_clusters,
                           std::size_t stream_length);

struct OnlineOutcome {
    std::vector<int> labels;
    std::optional<double> purity;
    std::optional<double> silhouette;
    MetricsReport metrics;
    std::size_t clusters_formed = 0;
    double seconds = 0.0;
    nlohmann::json state;
};

// Streams `points` through the clusterer (rows in `order`, or as stored when
// `order` is empty), then assigns every row to its final nearest center.
// `cache`, when given, must hold the distances of `points`.
OnlineOutcome run_online_stage(const Matrix& points, const std::vector<std::string>& ids, const LabelMap* truth,
                               const OnlineConfig& config, std::uint64_t seed, const PairwiseDistances* cache = nullptr,
                               std::span<const std::size_t> order = {});

// ---- reports --------------------------------------------------------------------

struct StageTimings {
    double preprocess = 0.0;
    double corpus_clustering = 0.0;
    double wknn_total = 0.0;
    double online_total = 0.0;
    double total = 0.0;
};

struct RepeatResult {
    std::size_t repeat = 0;
    std::uint64_t seed = 0;
    std::size_t n_stream = 0;
    std::size_t n_known = 0;
    std::size_t n_new = 0;
    double new_fraction = 0.0;
    std::optional<MetricsReport> new_metrics;
    std::optional<MetricsReport> known_metrics;
    std::size_t online_clusters_formed = 0;
    StageTimings timings;
};

struct MetricSummary {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
    std::size_t count = 0;
};

MetricSummary summarize(const std::vector<double>& values);

struct RunReport {
    std::string algorithm;
    std::size_t n_clusters = 0;
    bool labels_available = false;
    std::vector<RepeatResult> repeats;

    // new_fraction, purity_new, silhouette_new, purity_known, silhouette_known.
    std::map<std::string, MetricSummary> aggregates() const;
    // Everything except wall-clock timings, which live in timings_json().
    nlohmann::json to_json() const;
    nlohmann::json timings_json() const;
};

struct PipelineRun {
    RunReport report;
    // Assignments, metrics and fitted models of repeat 0.
    std::vector<RouteAssignment> assignments;
    std::optional<MetricsReport> new_metrics;
    std::optional<MetricsReport> known_metrics;
    nlohmann::json models;
};

// `repeats` independent repeats of the whole pipeline for the configured
// algorithm and the first online cluster count.
PipelineRun run_pipeline(const PipelineConfig& config, const StreamInputs& inputs);

// ---- experiment grids ---------------------------------------------------------

struct GridCell {
    OnlineAlgorithm algorithm = OnlineAlgorithm::okm;
    std::size_t n_clusters = 0;
    std::size_t repeat = 0;
    std::uint64_t seed = 0;
    std::size_t n_points = 0;
    std::optional<double> purity;
    std::optional<double> silhouette;
    std::size_t clusters_formed = 0;
    double online_seconds = 0.0;
    std::string error;
};

struct GridRepeat {
    std::size_t repeat = 0;
    std::uint64_t seed = 0;
    std::size_t n_stream = 0;
    std::size_t n_new = 0;
    double new_fraction = 0.0;
    StageTimings timings;  // online_total sums every cell of the repeat
};

struct CurvePoint {
    OnlineAlgorithm algorithm = OnlineAlgorithm::okm;
    std::size_t n_clusters = 0;
    MetricSummary purity;
    MetricSummary silhouette;
};

struct GridResult {
    std::string mode;  // "proposed" or "baseline"
    std::vector<GridRepeat> repeats;
    std::vector<GridCell> cells;  // repeat-major, then algorithm, then cluster count

    // Mean curves per (algorithm, cluster count) in config order.
    std::vector<CurvePoint> curves(const std::vector<OnlineAlgorithm>& algorithms,
                                   const std::vector<std::size_t>& counts) const;
    const GridCell* find(OnlineAlgorithm a, std::size_t n_clusters, std::size_t repeat) const;
    nlohmann::json to_json(const std::vector<OnlineAlgorithm>& algorithms, const std::vector<std::size_t>& counts) const;
};

// Per repeat: one routing pass, then every (algorithm, count) cell clusters
// the same new-route population.
GridResult run_grid(const PipelineConfig& config, const PreparedData& data, const std::vector<std::size_t>& counts,
                    const std::vector<OnlineAlgorithm>& algorithms, std::size_t repeats);

// Skips WKNN and the decision rule: corpus then stream go straight through
// each online clusterer; cells use the same seeds as run_grid.
GridResult run_reference_baseline(const PipelineConfig& config, const PreparedData& data,
                                  const std::vector<std::size_t>& counts,
                                  const std::vector<OnlineAlgorithm>& algorithms, std::size_t repeats);

// Fraction routed new per tau; the corpus is clustered with repeat 0's seed.
std::vector<TauSweepRow> run_tau_sweep(const PipelineConfig& config, const PreparedData& data);

// Candidate feature counts on the scaled corpus with k-means, SOM and DBSCAN
// (eps 5, min_samples 10), corpus_clusters clusters each.
FeatureSelection run_feature_selection(const PipelineConfig& config, const StreamInputs& inputs);

}  // namespace famstream
