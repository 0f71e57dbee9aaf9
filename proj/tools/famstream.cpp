// famstream command line: run, grid, baseline, sweep-tau, select-features, synth.

#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "famstream/error.hpp"
#include "famstream/outputs.hpp"
#include "famstream/pipeline.hpp"
#include "famstream/synthetic.hpp"

using namespace famstream;

namespace {

// "4..10", "4-10", "4,6,8" or "7".
std::vector<std::size_t> parse_counts(const std::string& text) {
    auto number = [&](std::string_view s) {
        std::size_t v = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || v == 0) {
            throw_usage("bad cluster count '" + std::string(s) + "' in '" + text + "'");
        }
        return v;
    };
    std::vector<std::size_t> out;
    for (auto sep : {std::string(".."), std::string("-")}) {
        const auto at = text.find(sep);
        if (at == std::string::npos) continue;
        const std::size_t lo = number(std::string_view(text).substr(0, at));
        const std::size_t hi = number(std::string_view(text).substr(at + sep.size()));
        if (hi < lo) throw_usage("empty cluster range '" + text + "'");
        for (std::size_t k = lo; k <= hi; ++k) out.push_back(k);
        return out;
    }
    std::string_view rest(text);
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        out.push_back(number(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    if (out.empty()) throw_usage("no cluster counts given");
    return out;
}

// Flags shared by the pipeline subcommands. Only flags present on the
// command line override the config file.
struct Flags {
    std::string config_file;
    std::string corpus_path, stream_path, data_path, cutoff, output_dir;
    std::size_t n_features = 0, corpus_clusters = 0, wknn_k = 0, repeats = 0;
    int corpus_epochs = 0;
    std::string wknn_weighting, online_algorithm, online_clusters;
    std::vector<std::string> algorithms;
    double tau = 0, bsas_theta = 0, som_lambda = 0, som_sigma_final = 0;
    std::string okm_seeding;
    std::vector<double> taus;
    std::vector<std::size_t> feature_candidates;
    std::uint64_t seed = 0;
    bool update_centroids = true, grow_reference = true, grow_members = true;
    bool no_timings = false;
    std::vector<std::pair<CLI::Option*, std::function<void(PipelineConfig&)>>> setters;

    template <typename T>
    void add(CLI::App* app, const std::string& name, T& target, const std::string& help,
             std::function<void(PipelineConfig&)> apply) {
        setters.emplace_back(app->add_option(name, target, help), std::move(apply));
    }

    void attach(CLI::App* app) {
        app->add_option("--config", config_file, "JSON config file; flags override it")->check(CLI::ExistingFile);
        add(app, "--corpus-path", corpus_path, "corpus file (.csv or .jsonl)", [this](auto& c) { c.corpus_path = corpus_path; });
        add(app, "--stream-path", stream_path, "stream file (.csv or .jsonl)", [this](auto& c) { c.stream_path = stream_path; });
        add(app, "--data-path", data_path, "single file split at --cutoff", [this](auto& c) { c.data_path = data_path; });
        add(app, "--cutoff", cutoff, "YYYY-MM; samples first seen from this month on form the stream",
            [this](auto& c) { c.cutoff = YearMonth::parse(cutoff); });
        add(app, "--output-dir", output_dir, "output directory", [this](auto& c) { c.output_dir = output_dir; });
        add(app, "--n-features", n_features, "PCA components", [this](auto& c) { c.n_features = n_features; });
        add(app, "--corpus-clusters", corpus_clusters, "SOM units for the corpus",
            [this](auto& c) { c.corpus_clusters = corpus_clusters; });
        add(app, "--corpus-epochs", corpus_epochs, "SOM epochs over the corpus",
            [this](auto& c) { c.corpus_epochs = corpus_epochs; });
        add(app, "--wknn-k", wknn_k, "neighbours", [this](auto& c) { c.wknn.k = wknn_k; });
        add(app, "--wknn-weighting", wknn_weighting, "uniform or wknn",
            [this](auto& c) { c.wknn.weighting = parse_weighting(wknn_weighting); });
        add(app, "--tau", tau, "decision rule slack", [this](auto& c) { c.decision.tau = tau; });
        add(app, "--update-centroids", update_centroids, "move known centroids on acceptance",
            [this](auto& c) { c.decision.update_centroids = update_centroids; });
        add(app, "--grow-reference", grow_reference, "add accepted samples to the WKNN reference",
            [this](auto& c) { c.decision.grow_reference = grow_reference; });
        add(app, "--grow-members", grow_members, "add accepted samples to cluster members",
            [this](auto& c) { c.decision.grow_members = grow_members; });
        add(app, "--online-algorithm", online_algorithm, "okm, som or bsas (run)",
            [this](auto& c) { c.online_algorithm = parse_online_algorithm(online_algorithm); });
        add(app, "--online-clusters", online_clusters, "count, range 4..10 or list 4,6,8",
            [this](auto& c) { c.online_clusters = parse_counts(online_clusters); });
        setters.emplace_back(app->add_option("--algorithms", algorithms, "online algorithms (grid, baseline)")->delimiter(','),
                             [this](auto& c) {
                                 c.algorithms.clear();
                                 for (const auto& a : algorithms) c.algorithms.push_back(parse_online_algorithm(a));
                             });
        add(app, "--bsas-theta", bsas_theta, "BSAS threshold; default from a warm-up buffer",
            [this](auto& c) { c.bsas_theta = bsas_theta; });
        add(app, "--som-lambda", som_lambda, "SOM decay constant; default stream length",
            [this](auto& c) { c.som_lambda = som_lambda; });
        add(app, "--som-sigma-final", som_sigma_final, "final SOM neighbourhood width",
            [this](auto& c) { c.som_sigma_final = som_sigma_final; });
        add(app, "--okm-seeding", okm_seeding, "kmeans++ or first-distinct",
            [this](auto& c) { c.okm_seeding = parse_okm_seeding(okm_seeding); });
        add(app, "--repeats", repeats, "independent repeats", [this](auto& c) { c.repeats = repeats; });
        add(app, "--seed", seed, "master seed", [this](auto& c) { c.seed = seed; });
        setters.emplace_back(app->add_option("--taus", taus, "taus for sweep-tau")->delimiter(','),
                             [this](auto& c) { c.taus = taus; });
        setters.emplace_back(
            app->add_option("--feature-candidates", feature_candidates, "feature counts for select-features")->delimiter(','),
            [this](auto& c) { c.feature_candidates = feature_candidates; });
        app->add_flag("--no-timings", no_timings, "skip the wall-clock timing files");
    }

    PipelineConfig resolve() const {
        PipelineConfig c;
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw_usage(config_file + ": " + e.what());
            }
            c = PipelineConfig::from_json(j);
        }
        for (const auto& [opt, apply] : setters) {
            if (opt->count() > 0) apply(c);
        }
        c.validate();
        return c;
    }
};

void print_summary(const std::map<std::string, MetricSummary>& agg) {
    for (const auto& [name, s] : agg) {
        if (s.count == 0) continue;
        std::printf("  %-17s %.4f +- %.4f (n=%zu)\n", name.c_str(), s.mean, s.std, s.count);
    }
}

void print_curves(const char* title, const std::vector<CurvePoint>& curves) {
    std::printf("%s\n  %-5s %3s %8s %10s\n", title, "alg", "k", "purity", "silhouette");
    for (const auto& p : curves) {
        std::printf("  %-5s %3zu %8.4f %10.4f\n", std::string(to_string(p.algorithm)).c_str(), p.n_clusters,
                    p.purity.mean, p.silhouette.mean);
    }
}

int run_synth(const std::string& out, const std::string& corpus_out, const std::string& stream_out,
              const SyntheticSpec& spec) {
    const Dataset all = make_synthetic(spec);
    auto save = [](const Dataset& d, const std::string& path) {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw_runtime("cannot write " + path);
        if (format_from_path(path) == FileFormat::jsonl) write_jsonl(d, f);
        else write_csv(d, f);
    };
    if (!out.empty()) save(all, out);
    if (!corpus_out.empty() || !stream_out.empty()) {
        const auto [corpus, stream] = split_by_time(all, spec.cutoff);
        if (!corpus_out.empty()) save(corpus, corpus_out);
        if (!stream_out.empty()) save(stream, stream_out);
    }
    std::printf("wrote %zu samples (cutoff %s)\n", all.size(), spec.cutoff.to_string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming malware-family clustering"};
    app.require_subcommand(1);

    Flags run_flags, grid_flags, base_flags, tau_flags, feat_flags;
    auto* run = app.add_subcommand("run", "route the stream and cluster the new-family route");
    run_flags.attach(run);
    auto* grid = app.add_subcommand("grid", "every algorithm x cluster count x repeat on the new-family route");
    grid_flags.attach(grid);
    auto* base = app.add_subcommand("baseline", "grid plus direct online clustering of corpus + stream");
    base_flags.attach(base);
    auto* sweep = app.add_subcommand("sweep-tau", "fraction routed new per tau");
    tau_flags.attach(sweep);
    auto* feat = app.add_subcommand("select-features", "silhouette per PCA feature count and batch clusterer");
    feat_flags.attach(feat);

    auto* synth = app.add_subcommand("synth", "write the synthetic seven-family fixture");
    SyntheticSpec spec;
    std::string synth_out, synth_corpus, synth_stream, synth_cutoff = spec.cutoff.to_string();
    synth->add_option("--out", synth_out, "one file with corpus and stream");
    synth->add_option("--corpus-out", synth_corpus, "corpus only");
    synth->add_option("--stream-out", synth_stream, "stream only");
    synth->add_option("--seed", spec.seed, "generator seed")->capture_default_str();
    synth->add_option("--dim", spec.dim, "raw dimension")->capture_default_str();
    synth->add_option("--separation", spec.separation, "norm of family means")->capture_default_str();
    synth->add_option("--latent-sd", spec.latent_sd, "spread along latent axes")->capture_default_str();
    synth->add_option("--noise-sd", spec.noise_sd, "isotropic noise")->capture_default_str();
    synth->add_option("--cutoff", synth_cutoff, "YYYY-MM")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) {
            if (synth_out.empty() && synth_corpus.empty() && synth_stream.empty()) {
                throw_usage("synth: give --out, --corpus-out or --stream-out");
            }
            spec.cutoff = YearMonth::parse(synth_cutoff);
            return run_synth(synth_out, synth_corpus, synth_stream, spec);
        }
        if (run->parsed()) {
            const auto config = run_flags.resolve();
            const auto result = run_pipeline(config, load_inputs(config));
            write_run_outputs(config.output_dir, config, result, {!run_flags.no_timings});
            std::printf("run: %s, %zu clusters, %zu repeats -> %s\n", result.report.algorithm.c_str(),
                        result.report.n_clusters, result.report.repeats.size(), config.output_dir.string().c_str());
            print_summary(result.report.aggregates());
            return 0;
        }
        if (grid->parsed() || base->parsed()) {
            const Flags& flags = grid->parsed() ? grid_flags : base_flags;
            const auto config = flags.resolve();
            const auto data = prepare(load_inputs(config), config.n_features);
            const auto proposed = run_grid(config, data, config.online_clusters, config.algorithms, config.repeats);
            std::optional<GridResult> baseline;
            if (base->parsed()) {
                baseline = run_reference_baseline(config, data, config.online_clusters, config.algorithms, config.repeats);
            }
            write_grid_outputs(config.output_dir, config, proposed, baseline, {!flags.no_timings});
            print_curves("proposed (new-family route)", proposed.curves(config.algorithms, config.online_clusters));
            if (baseline) print_curves("baseline (direct)", baseline->curves(config.algorithms, config.online_clusters));
            return 0;
        }
        if (sweep->parsed()) {
            const auto config = tau_flags.resolve();
            const auto rows = run_tau_sweep(config, prepare(load_inputs(config), config.n_features));
            write_tau_sweep_outputs(config.output_dir, config, rows);
            for (const auto& r : rows) std::printf("  tau %6.2f  new %.4f (%zu/%zu)\n", r.tau, r.new_fraction, r.n_new, r.n_stream);
            return 0;
        }
        if (feat->parsed()) {
            const auto config = feat_flags.resolve();
            const auto selection = run_feature_selection(config, load_inputs(config));
            write_feature_selection_outputs(config.output_dir, config, selection);
            std::printf("best: %zu features with %s (silhouette %.4f)\n", selection.best_count,
                        selection.best_clusterer.c_str(), selection.best_silhouette);
            return 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "famstream: %s\n", e.what());
        switch (e.kind()) {
            case ErrorKind::usage: return 1;
            case ErrorKind::data: return 2;
            case ErrorKind::runtime: return 3;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "famstream: %s\n", e.what());
        return 3;
    }
    return 1;
}
