#include "famstream/wknn.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "famstream/batch.hpp"
#include "famstream/error.hpp"
#include "famstream/kernels.hpp"

namespace famstream {

ReferenceSet ReferenceSet::from_clusters(const KnownClusters& clusters) {
    ReferenceSet ref(clusters.dim());
    for (const auto& c : clusters.clusters()) {
        for (std::size_t i = 0; i < c.count(); ++i) ref.add(c.members.row(i), c.id);
    }
    return ref;
}

void ReferenceSet::add(std::span<const double> x, int label) {
    points_.push_row(x);
    labels_.push_back(label);
}

std::string_view to_string(Weighting w) { return w == Weighting::uniform ? "uniform" : "wknn"; }

Weighting parse_weighting(std::string_view text) {
    if (text == "uniform") return Weighting::uniform;
    if (text == "wknn" || text == "distance" || text == "distance_weighted") return Weighting::distance_weighted;
    throw_usage("unknown weighting '" + std::string(text) + "' (expected uniform or wknn)");
}

std::vector<double> vote_weights(std::span<const double> distances, Weighting weighting) {
    std::vector<double> w(distances.size(), 1.0);
    if (weighting == Weighting::uniform || distances.empty()) return w;
    const double d1 = distances.front();
    const double dk = distances.back();
    if (dk == d1) return w;
    for (std::size_t i = 0; i < distances.size(); ++i) w[i] = (dk - distances[i]) / (dk - d1);
    return w;
}

Classification classify(const ReferenceSet& ref, const WKNNParams& params, std::span<const double> x) {
    if (params.k == 0) throw_usage("classify: k must be at least 1");
    if (params.k > ref.size()) {
        throw_data("classify: k = " + std::to_string(params.k) + " exceeds the " + std::to_string(ref.size()) +
                   " reference points");
    }
    check_dim(ref.dim(), x.size(), "classify");

    std::vector<double> dist(ref.size());
    kernels::distances_to(ref.points(), x, dist);
    std::vector<std::size_t> order(ref.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto k = static_cast<std::ptrdiff_t>(params.k);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](std::size_t a, std::size_t b) {
        return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
    });

    Classification out;
    std::vector<double> nd(params.k);
    for (std::size_t i = 0; i < params.k; ++i) {
        const std::size_t r = order[i];
        out.neighbors.push_back({r, dist[r], ref.labels()[r]});
        nd[i] = dist[r];
    }
    out.weights = vote_weights(nd, params.weighting);

    // Labels in order of first appearance among the neighbors; the scan keeps
    // the earliest label on equal scores.
    std::vector<int> seen;
    std::vector<double> score;
    for (std::size_t i = 0; i < params.k; ++i) {
        const int label = out.neighbors[i].label;
        const auto it = std::find(seen.begin(), seen.end(), label);
        if (it == seen.end()) {
            seen.push_back(label);
            score.push_back(out.weights[i]);
        } else {
            score[static_cast<std::size_t>(it - seen.begin())] += out.weights[i];
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < seen.size(); ++i) {
        if (score[i] > score[best]) best = i;
    }
    out.label = seen[best];
    return out;
}

}  // namespace famstream
