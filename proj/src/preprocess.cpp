#include "famstream/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "famstream/dataset.hpp"
#include "famstream/error.hpp"
#include "famstream/kernels.hpp"
#include "famstream/linalg.hpp"
#include "famstream/metrics.hpp"

namespace famstream {

// ---- scaler -------------------------------------------------------------------

ScalerModel fit_scaler(const Matrix& corpus) {
    if (corpus.empty()) throw_data("fit_scaler: corpus is empty");
    const std::size_t n = corpus.rows();
    const std::size_t d = corpus.cols();
    ScalerModel m{Vector(d, 0.0), Vector(d, 0.0)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m.means[j] += corpus(i, j);
    for (double& v : m.means) v /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double c = corpus(i, j) - m.means[j];
            m.stds[j] += c * c;
        }
    }
    for (double& v : m.stds) {
        v = std::sqrt(v / static_cast<double>(n));
        if (v == 0.0) v = 1.0;
    }
    return m;
}

ScalerModel fit_scaler(const Dataset& corpus) {
    if (corpus.empty()) throw_data("fit_scaler: corpus is empty");
    return fit_scaler(corpus.feature_matrix());
}

Vector apply_scaler(const ScalerModel& model, std::span<const double> x) {
    check_dim(model.dim(), x.size(), "apply_scaler");
    Vector out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - model.means[j]) / model.stds[j];
    return out;
}

Matrix apply_scaler(const ScalerModel& model, const Matrix& points) {
    check_dim(model.dim(), points.cols(), "apply_scaler");
    Matrix out = points;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        auto r = out.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) r[j] = (r[j] - model.means[j]) / model.stds[j];
    }
    return out;
}

nlohmann::json ScalerModel::to_json() const { return {{"means", means}, {"stds", stds}}; }

ScalerModel ScalerModel::from_json(const nlohmann::json& j) {
    ScalerModel m{j.at("means").get<Vector>(), j.at("stds").get<Vector>()};
    if (m.means.size() != m.stds.size() || m.means.empty()) throw_data("scaler model: means/stds length mismatch");
    if (std::any_of(m.stds.begin(), m.stds.end(), [](double s) { return !(s > 0.0); })) {
        throw_data("scaler model: stds must be positive");
    }
    return m;
}

// ---- PCA ----------------------------------------------------------------------

PCAModel fit_pca(const Matrix& scaled_corpus, std::size_t n_components) {
    const std::size_t n = scaled_corpus.rows();
    const std::size_t d = scaled_corpus.cols();
    if (n_components == 0 || n_components > std::min(d, n)) {
        throw_usage("fit_pca: n_components = " + std::to_string(n_components) + " outside [1, " +
                    std::to_string(std::min(d, n)) + "]");
    }
    PCAModel m;
    m.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m.mean[j] += scaled_corpus(i, j);
    for (double& v : m.mean) v /= static_cast<double>(n);

    Matrix centered = scaled_corpus;
    for (std::size_t i = 0; i < n; ++i) {
        auto r = centered.row(i);
        for (std::size_t j = 0; j < d; ++j) r[j] -= m.mean[j];
    }
    const auto eig = symmetric_eigen(kernels::covariance(centered));
    m.components = Matrix(n_components, d);
    m.variances.resize(n_components);
    for (std::size_t c = 0; c < n_components; ++c) {
        const auto src = eig.vectors.row(c);
        std::copy(src.begin(), src.end(), m.components.row(c).begin());
        m.variances[c] = std::max(0.0, eig.values[c]);
    }
    return m;
}

Vector transform_pca(const PCAModel& model, std::span<const double> x) {
    check_dim(model.dim(), x.size(), "transform_pca");
    Vector out(model.n_components(), 0.0);
    for (std::size_t c = 0; c < model.n_components(); ++c) {
        const auto comp = model.components.row(c);
        double acc = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) acc += comp[j] * (x[j] - model.mean[j]);
        out[c] = acc;
    }
    return out;
}

Matrix transform_pca(const PCAModel& model, const Matrix& points) {
    check_dim(model.dim(), points.cols(), "transform_pca");
    Matrix out(points.rows(), model.n_components());
    for (std::size_t i = 0; i < points.rows(); ++i) {
        const auto y = transform_pca(model, points.row(i));
        std::copy(y.begin(), y.end(), out.row(i).begin());
    }
    return out;
}

nlohmann::json PCAModel::to_json() const {
    return {{"mean", mean},
            {"n_components", n_components()},
            {"components", std::vector<double>(components.data().begin(), components.data().end())},
            {"variances", variances}};
}

PCAModel PCAModel::from_json(const nlohmann::json& j) {
    PCAModel m;
    m.mean = j.at("mean").get<Vector>();
    const auto n = j.at("n_components").get<std::size_t>();
    const auto flat = j.at("components").get<std::vector<double>>();
    m.variances = j.at("variances").get<Vector>();
    if (m.mean.empty() || flat.size() != n * m.mean.size() || m.variances.size() != n) {
        throw_data("PCA model: inconsistent sizes");
    }
    m.components = Matrix(n, m.mean.size());
    std::copy(flat.begin(), flat.end(), m.components.data().begin());
    return m;
}

// ---- feature-count selection ----------------------------------------------------

FeatureSelection select_feature_count(const Matrix& scaled_corpus, std::span<const std::size_t> candidates,
                                      std::span<const BatchClustererConfig> clusterers, std::uint64_t seed) {
    if (candidates.empty()) throw_usage("select_feature_count: no candidate feature counts");
    if (clusterers.empty()) throw_usage("select_feature_count: no clusterers");
    for (std::size_t c : candidates) {
        if (c == 0 || c > scaled_corpus.cols()) {
            throw_usage("select_feature_count: candidate " + std::to_string(c) + " exceeds dimension " +
                        std::to_string(scaled_corpus.cols()));
        }
    }

    // One decomposition serves every candidate: the top-c components are a
    // prefix of the top-max components.
    const std::size_t max_count = *std::max_element(candidates.begin(), candidates.end());
    const PCAModel full = fit_pca(scaled_corpus, max_count);
    const Matrix projected_full = transform_pca(full, scaled_corpus);

    FeatureSelection out;
    bool have_best = false;
    for (std::size_t count : candidates) {
        Matrix projected(projected_full.rows(), count);
        for (std::size_t i = 0; i < projected.rows(); ++i) {
            const auto src = projected_full.row(i).first(count);
            std::copy(src.begin(), src.end(), projected.row(i).begin());
        }
        for (const auto& cfg : clusterers) {
            FeatureSelectionCell cell{count, cfg.name(), std::nullopt, {}};
            try {
                const auto labels = cluster_labels(cfg, projected, seed);
                std::vector<std::size_t> keep;
                std::vector<int> kept_labels;
                for (std::size_t i = 0; i < labels.size(); ++i) {
                    if (labels[i] >= 0) {
                        keep.push_back(i);
                        kept_labels.push_back(labels[i]);
                    }
                }
                cell.mean_silhouette = mean_silhouette(projected.select_rows(keep), kept_labels);
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
            if (cell.mean_silhouette && (!have_best || *cell.mean_silhouette > out.best_silhouette)) {
                have_best = true;
                out.best_count = count;
                out.best_clusterer = cell.clusterer;
                out.best_silhouette = *cell.mean_silhouette;
            }
            out.table.push_back(std::move(cell));
        }
    }
    if (!have_best) throw_runtime("select_feature_count: every grid cell failed");
    return out;
}

}  // namespace famstream
