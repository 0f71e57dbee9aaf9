#pragma once

// File writers for the CLI. CSV headers are fixed; numbers use the shortest
// round-trip form so identical runs give identical bytes. Wall-clock timings
// only go to timings.json, fig7_online_timing.csv and fig8_total_timing.csv.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include <json.hpp>

#include "famstream/decision.hpp"
#include "famstream/pipeline.hpp"
#include "famstream/preprocess.hpp"

namespace famstream {

// n_features,clusterer,mean_silhouette
void write_feature_selection_csv(const FeatureSelection& selection, std::ostream& out);
// tau,new_fraction,n_new,n_stream
void write_tau_sweep_csv(const std::vector<TauSweepRow>& rows, std::ostream& out);
// algorithm,n_clusters,repeats,purity_mean,purity_std,silhouette_mean,silhouette_std
void write_curves_csv(const std::vector<CurvePoint>& curves, std::ostream& out);
// mode,algorithm,n_clusters,repeat,seed,n_points,purity,silhouette,clusters_formed,error
void write_grid_cells_csv(const GridResult& grid, std::ostream& out);
// algorithm,n_clusters,repeat,online_seconds
void write_online_timing_csv(const GridResult& grid, std::ostream& out);
// repeat,preprocess,corpus_clustering,wknn_total,online_total,total
void write_total_timing_csv(const std::vector<StageTimings>& timings, std::ostream& out);

struct BaselinePair {
    OnlineAlgorithm algorithm = OnlineAlgorithm::okm;
    std::size_t repeat = 0;
    double proposed_purity = 0.0;  // mean over the swept cluster counts
    double baseline_purity = 0.0;
    bool proposed_wins() const noexcept { return proposed_purity > baseline_purity; }
};

// One pair per (algorithm, repeat); cells that failed or lack purity are skipped.
std::vector<BaselinePair> pair_with_baseline(const GridResult& proposed, const GridResult& baseline,
                                             const std::vector<OnlineAlgorithm>& algorithms,
                                             const std::vector<std::size_t>& counts);
// algorithm,repeat,proposed_purity,baseline_purity,proposed_wins
void write_baseline_comparison_csv(const std::vector<BaselinePair>& pairs, std::ostream& out);

// ---- directory writers ------------------------------------------------------

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

struct OutputOptions {
    bool timings = true;
};

void write_run_outputs(const std::filesystem::path& dir, const PipelineConfig& config, const PipelineRun& run,
                       const OutputOptions& options = {});
void write_grid_outputs(const std::filesystem::path& dir, const PipelineConfig& config, const GridResult& proposed,
                        const std::optional<GridResult>& baseline, const OutputOptions& options = {});
void write_tau_sweep_outputs(const std::filesystem::path& dir, const PipelineConfig& config,
                             const std::vector<TauSweepRow>& rows);
void write_feature_selection_outputs(const std::filesystem::path& dir, const PipelineConfig& config,
                                     const FeatureSelection& selection);

}  // namespace famstream
