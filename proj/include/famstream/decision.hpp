#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "famstream/batch.hpp"
#include "famstream/dataset.hpp"
#include "famstream/matrix.hpp"
#include "famstream/wknn.hpp"

namespace famstream {

struct DecisionParams {
    double tau = -2.0;
    // Move the centroid of a cluster by the running mean when it accepts a sample.
    bool update_centroids = true;
    // Append accepted samples to the WKNN reference set.
    bool grow_reference = true;
    // Append accepted samples to the cluster's member list (false = frozen members).
    bool grow_members = true;
};

// x stays in the cluster iff some member y satisfies
//   D(y, c) + tau >= max(D(y, x), D(x, c)).
bool accepts(const Matrix& members, std::span<const double> centroid, std::span<const double> x, double tau);

// The same predicate over precomputed member-to-centroid distances, for callers
// that evaluate many x against one frozen cluster.
bool accepts_with_radii(const Matrix& members, std::span<const double> member_radii, std::span<const double> centroid,
                        std::span<const double> x, double tau);

// Mutable known-family state walked by the stream.
struct KnownModel {
    KnownClusters clusters;
    ReferenceSet reference;

    explicit KnownModel(KnownClusters c) : clusters(std::move(c)), reference(ReferenceSet::from_clusters(clusters)) {}
};

// WKNN picks the candidate cluster; if `accepts` holds, x joins it (mutating
// the model as the params say) and the route is known. Otherwise the route is
// new, cluster_id is -1 until the online stage assigns one, and the model is
// left untouched.
RouteAssignment route_sample(KnownModel& model, const WKNNParams& wknn, const DecisionParams& dp,
                             std::span<const double> x, const std::string& sample_id);

struct TauSweepRow {
    double tau = 0.0;
    std::size_t n_new = 0;
    std::size_t n_stream = 0;
    double new_fraction = 0.0;
};

// Replays the stream from a fresh copy of `model` for each tau.
std::vector<TauSweepRow> sweep_tau(const KnownModel& model, const WKNNParams& wknn, const DecisionParams& dp,
                                   const Matrix& stream, std::span<const double> taus);

}  // namespace famstream
