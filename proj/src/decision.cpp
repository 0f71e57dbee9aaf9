#include "famstream/decision.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>

#include "famstream/error.hpp"

namespace famstream {

bool accepts_with_radii(const Matrix& members, std::span<const double> member_radii, std::span<const double> centroid,
                        std::span<const double> x, double tau) {
    if (members.empty()) throw_data("accepts: cluster has no members");
    check_dim(members.cols(), x.size(), "accepts");
    check_dim(members.cols(), centroid.size(), "accepts");
    const double dxc = std::sqrt(squared_distance(x, centroid));
    for (std::size_t i = 0; i < members.rows(); ++i) {
        const double lhs = member_radii[i] + tau;
        if (lhs < dxc) continue;
        if (lhs >= std::sqrt(squared_distance(members.row(i), x))) return true;
    }
    return false;
}

bool accepts(const Matrix& members, std::span<const double> centroid, std::span<const double> x, double tau) {
    if (members.empty()) throw_data("accepts: cluster has no members");
    check_dim(members.cols(), centroid.size(), "accepts");
    std::vector<double> radii(members.rows());
    for (std::size_t i = 0; i < members.rows(); ++i) radii[i] = std::sqrt(squared_distance(members.row(i), centroid));
    return accepts_with_radii(members, radii, centroid, x, tau);
}

RouteAssignment route_sample(KnownModel& model, const WKNNParams& wknn, const DecisionParams& dp,
                             std::span<const double> x, const std::string& sample_id) {
    if (!std::isfinite(dp.tau)) throw_usage("tau must be finite");
    const int cx = classify(model.reference, wknn, x).label;
    Cluster& cluster = model.clusters.at(cx);
    if (!accepts(cluster.members, cluster.centroid, x, dp.tau)) return {sample_id, Route::new_family, -1};

    if (dp.grow_members) {
        cluster.members.push_row(x);
        cluster.member_ids.push_back(sample_id);
    }
    if (dp.update_centroids) {
        const double n = static_cast<double>(++cluster.weight);
        for (std::size_t j = 0; j < x.size(); ++j) cluster.centroid[j] += (x[j] - cluster.centroid[j]) / n;
    }
    if (dp.grow_reference) model.reference.add(x, cx);
    return {sample_id, Route::known, cx};
}

std::vector<TauSweepRow> sweep_tau(const KnownModel& model, const WKNNParams& wknn, const DecisionParams& dp,
                                   const Matrix& stream, std::span<const double> taus) {
    if (taus.empty()) throw_usage("sweep_tau: no tau values");
    for (double t : taus) {
        if (!std::isfinite(t)) throw_usage("sweep_tau: tau values must be finite");
    }
    std::vector<TauSweepRow> rows(taus.size());
    std::vector<std::exception_ptr> failures(taus.size());
    const auto n_taus = static_cast<std::int64_t>(taus.size());
    const auto ids = default_ids(stream.rows());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t t = 0; t < n_taus; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        try {
            KnownModel local = model;
            DecisionParams p = dp;
            p.tau = taus[ti];
            TauSweepRow row{p.tau, 0, stream.rows(), 0.0};
            for (std::size_t i = 0; i < stream.rows(); ++i) {
                if (route_sample(local, wknn, p, stream.row(i), ids[i]).route == Route::new_family) ++row.n_new;
            }
            row.new_fraction =
                stream.empty() ? 0.0 : static_cast<double>(row.n_new) / static_cast<double>(stream.rows());
            rows[ti] = row;
        } catch (...) {
            failures[ti] = std::current_exception();
        }
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
    return rows;
}

}  // namespace famstream
