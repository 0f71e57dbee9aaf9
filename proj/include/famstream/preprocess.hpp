#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "famstream/batch.hpp"
#include "famstream/matrix.hpp"

namespace famstream {

class Dataset;

// Standard score fitted on the corpus. Zero-variance features keep std = 1.
struct ScalerModel {
    Vector means;
    Vector stds;

    std::size_t dim() const noexcept { return means.size(); }
    nlohmann::json to_json() const;
    static ScalerModel from_json(const nlohmann::json& j);
};

ScalerModel fit_scaler(const Matrix& corpus);
ScalerModel fit_scaler(const Dataset& corpus);
Vector apply_scaler(const ScalerModel& model, std::span<const double> x);
Matrix apply_scaler(const ScalerModel& model, const Matrix& points);

struct PCAModel {
    Vector mean;
    Matrix components;  // n_components x dim, orthonormal rows
    Vector variances;   // non-increasing, clamped at 0

    std::size_t n_components() const noexcept { return components.rows(); }
    std::size_t dim() const noexcept { return mean.size(); }
    nlohmann::json to_json() const;
    static PCAModel from_json(const nlohmann::json& j);
};

// Top eigenvectors of the sample covariance (divisor n - 1). Each component's
// largest-magnitude entry is positive.
PCAModel fit_pca(const Matrix& scaled_corpus, std::size_t n_components);
Vector transform_pca(const PCAModel& model, std::span<const double> x);
Matrix transform_pca(const PCAModel& model, const Matrix& points);

struct FeatureSelectionCell {
    std::size_t n_features = 0;
    std::string clusterer;
    std::optional<double> mean_silhouette;  // absent when the cell failed
    std::string error;
};

struct FeatureSelection {
    std::size_t best_count = 0;
    std::string best_clusterer;
    double best_silhouette = 0.0;
    std::vector<FeatureSelectionCell> table;
};

// For every candidate: fit PCA on the scaled corpus, cluster with every
// config and record the mean silhouette. DBSCAN noise points are left out of
// the silhouette. A cell that throws or yields fewer than two clusters is
// recorded without a value. Purity is never consulted.
FeatureSelection select_feature_count(const Matrix& scaled_corpus, std::span<const std::size_t> candidates,
                                      std::span<const BatchClustererConfig> clusterers, std::uint64_t seed);

}  // namespace famstream
