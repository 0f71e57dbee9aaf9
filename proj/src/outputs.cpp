#include "famstream/outputs.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "famstream/dataset.hpp"
#include "famstream/error.hpp"

namespace famstream {

namespace {

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

// Keeps free text on one CSV field.
std::string csv_text(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = c == ',' ? ';' : ' ';
    }
    return s;
}

// The written config describes the experiment, not where its files went, so
// identical runs into different directories stay byte-identical.
nlohmann::json config_record(const PipelineConfig& config) {
    nlohmann::json j = config.to_json();
    j.erase("output_dir");
    return j;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_runtime("cannot write " + path.string());
    return out;
}

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
    auto out = open_output(path);
    fn(out);
    if (!out.flush()) throw_runtime("write failed: " + path.string());
}

void make_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw_runtime("cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

void write_feature_selection_csv(const FeatureSelection& selection, std::ostream& out) {
    out << "n_features,clusterer,mean_silhouette\n";
    for (const auto& c : selection.table) {
        out << c.n_features << ',' << c.clusterer << ',' << optional_cell(c.mean_silhouette) << '\n';
    }
}

void write_tau_sweep_csv(const std::vector<TauSweepRow>& rows, std::ostream& out) {
    out << "tau,new_fraction,n_new,n_stream\n";
    for (const auto& r : rows) {
        out << format_double(r.tau) << ',' << format_double(r.new_fraction) << ',' << r.n_new << ',' << r.n_stream << '\n';
    }
}

void write_curves_csv(const std::vector<CurvePoint>& curves, std::ostream& out) {
    out << "algorithm,n_clusters,repeats,purity_mean,purity_std,silhouette_mean,silhouette_std\n";
    for (const auto& p : curves) {
        auto pair = [](const MetricSummary& s) {
            return s.count == 0 ? std::string(",") : format_double(s.mean) + ',' + format_double(s.std);
        };
        out << to_string(p.algorithm) << ',' << p.n_clusters << ',' << std::max(p.purity.count, p.silhouette.count) << ','
            << pair(p.purity) << ',' << pair(p.silhouette) << '\n';
    }
}

void write_grid_cells_csv(const GridResult& grid, std::ostream& out) {
    out << "mode,algorithm,n_clusters,repeat,seed,n_points,purity,silhouette,clusters_formed,error\n";
    for (const auto& c : grid.cells) {
        out << grid.mode << ',' << to_string(c.algorithm) << ',' << c.n_clusters << ',' << c.repeat << ',' << c.seed << ','
            << c.n_points << ',' << optional_cell(c.purity) << ',' << optional_cell(c.silhouette) << ','
            << c.clusters_formed << ',' << csv_text(c.error) << '\n';
    }
}

void write_online_timing_csv(const GridResult& grid, std::ostream& out) {
    out << "algorithm,n_clusters,repeat,online_seconds\n";
    for (const auto& c : grid.cells) {
        out << to_string(c.algorithm) << ',' << c.n_clusters << ',' << c.repeat << ',' << format_double(c.online_seconds)
            << '\n';
    }
}

void write_total_timing_csv(const std::vector<StageTimings>& timings, std::ostream& out) {
    out << "repeat,preprocess,corpus_clustering,wknn_total,online_total,total\n";
    for (std::size_t r = 0; r < timings.size(); ++r) {
        const auto& t = timings[r];
        out << r << ',' << format_double(t.preprocess) << ',' << format_double(t.corpus_clustering) << ','
            << format_double(t.wknn_total) << ',' << format_double(t.online_total) << ',' << format_double(t.total) << '\n';
    }
}

std::vector<BaselinePair> pair_with_baseline(const GridResult& proposed, const GridResult& baseline,
                                             const std::vector<OnlineAlgorithm>& algorithms,
                                             const std::vector<std::size_t>& counts) {
    std::vector<BaselinePair> pairs;
    const std::size_t repeats = std::min(proposed.repeats.size(), baseline.repeats.size());
    for (auto a : algorithms) {
        for (std::size_t r = 0; r < repeats; ++r) {
            double p_sum = 0.0;
            double b_sum = 0.0;
            std::size_t n = 0;
            for (auto k : counts) {
                const GridCell* p = proposed.find(a, k, r);
                const GridCell* b = baseline.find(a, k, r);
                if (p == nullptr || b == nullptr || !p->purity || !b->purity) continue;
                p_sum += *p->purity;
                b_sum += *b->purity;
                ++n;
            }
            if (n == 0) continue;
            pairs.push_back({a, r, p_sum / static_cast<double>(n), b_sum / static_cast<double>(n)});
        }
    }
    return pairs;
}

void write_baseline_comparison_csv(const std::vector<BaselinePair>& pairs, std::ostream& out) {
    out << "algorithm,repeat,proposed_purity,baseline_purity,proposed_wins\n";
    for (const auto& p : pairs) {
        out << to_string(p.algorithm) << ',' << p.repeat << ',' << format_double(p.proposed_purity) << ','
            << format_double(p.baseline_purity) << ',' << (p.proposed_wins() ? 1 : 0) << '\n';
    }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    write_file(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

void write_run_outputs(const std::filesystem::path& dir, const PipelineConfig& config, const PipelineRun& run,
                       const OutputOptions& options) {
    make_dir(dir / "models");
    write_json_file(dir / "config.json", config_record(config));
    write_file(dir / "assignments.csv", [&](std::ostream& out) { write_assignments_csv(run.assignments, out); });
    nlohmann::json metrics = {{"labels_available", run.report.labels_available}};
    metrics["new_route"] = run.new_metrics ? run.new_metrics->to_json() : nlohmann::json(nullptr);
    metrics["known_route"] = run.known_metrics ? run.known_metrics->to_json() : nlohmann::json(nullptr);
    write_json_file(dir / "metrics.json", metrics);
    write_json_file(dir / "report.json", run.report.to_json());
    for (const auto& [name, model] : run.models.items()) write_json_file(dir / "models" / (name + ".json"), model);
    if (options.timings) {
        write_json_file(dir / "timings.json", run.report.timings_json());
        std::vector<StageTimings> t;
        for (const auto& r : run.report.repeats) t.push_back(r.timings);
        write_file(dir / "fig8_total_timing.csv", [&](std::ostream& out) { write_total_timing_csv(t, out); });
    }
}

void write_grid_outputs(const std::filesystem::path& dir, const PipelineConfig& config, const GridResult& proposed,
                        const std::optional<GridResult>& baseline, const OutputOptions& options) {
    make_dir(dir);
    const auto& algs = config.algorithms;
    const auto& counts = config.online_clusters;
    write_json_file(dir / "config.json", config_record(config));
    nlohmann::json report = {{"proposed", proposed.to_json(algs, counts)}};
    write_file(dir / "fig5_new_route.csv", [&](std::ostream& out) { write_curves_csv(proposed.curves(algs, counts), out); });
    write_file(dir / "grid_cells.csv", [&](std::ostream& out) {
        write_grid_cells_csv(proposed, out);
        if (baseline) {
            // Same header; rows only.
            std::ostringstream tmp;
            write_grid_cells_csv(*baseline, tmp);
            const std::string s = tmp.str();
            out << s.substr(s.find('\n') + 1);
        }
    });
    if (baseline) {
        report["baseline"] = baseline->to_json(algs, counts);
        write_file(dir / "fig6_baseline.csv",
                   [&](std::ostream& out) { write_curves_csv(baseline->curves(algs, counts), out); });
        const auto pairs = pair_with_baseline(proposed, *baseline, algs, counts);
        write_file(dir / "baseline_comparison.csv", [&](std::ostream& out) { write_baseline_comparison_csv(pairs, out); });
        nlohmann::json wins = nlohmann::json::object();
        for (auto a : algs) {
            std::size_t won = 0;
            std::size_t total = 0;
            for (const auto& p : pairs) {
                if (p.algorithm != a) continue;
                ++total;
                won += p.proposed_wins() ? 1 : 0;
            }
            wins[std::string(to_string(a))] = {{"proposed_wins", won}, {"repeats", total}};
        }
        report["comparison"] = wins;
    }
    write_json_file(dir / "report.json", report);
    if (options.timings) {
        write_file(dir / "fig7_online_timing.csv", [&](std::ostream& out) {
            write_online_timing_csv(proposed, out);
        });
        std::vector<StageTimings> t;
        for (const auto& r : proposed.repeats) t.push_back(r.timings);
        write_file(dir / "fig8_total_timing.csv", [&](std::ostream& out) { write_total_timing_csv(t, out); });
    }
}

void write_tau_sweep_outputs(const std::filesystem::path& dir, const PipelineConfig& config,
                             const std::vector<TauSweepRow>& rows) {
    make_dir(dir);
    write_json_file(dir / "config.json", config_record(config));
    write_file(dir / "fig4_tau_sweep.csv", [&](std::ostream& out) { write_tau_sweep_csv(rows, out); });
}

void write_feature_selection_outputs(const std::filesystem::path& dir, const PipelineConfig& config,
                                     const FeatureSelection& selection) {
    make_dir(dir);
    write_json_file(dir / "config.json", config_record(config));
    write_file(dir / "fig3_feature_selection.csv", [&](std::ostream& out) { write_feature_selection_csv(selection, out); });
    write_json_file(dir / "feature_selection.json", {{"best_count", selection.best_count},
                                                     {"best_clusterer", selection.best_clusterer},
                                                     {"best_silhouette", selection.best_silhouette}});
}

}  // namespace famstream
