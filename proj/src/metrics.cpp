#include "famstream/metrics.hpp"

#include <algorithm>
#include <ostream>

#include "famstream/dataset.hpp"
#include "famstream/error.hpp"
#include "famstream/kernels.hpp"

namespace famstream {

MetricsReport purity(const std::vector<std::pair<std::string, int>>& assignments, const LabelMap& labels) {
    std::vector<std::string> missing;
    std::map<int, std::map<std::string, std::size_t>> counts;
    for (const auto& [id, cluster] : assignments) {
        const auto it = labels.find(id);
        if (it == labels.end()) {
            missing.push_back(id);
            continue;
        }
        ++counts[cluster][it->second];
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
        throw_data("purity: no family label for " + list);
    }

    MetricsReport r;
    std::size_t total = 0;
    std::size_t dominant_total = 0;
    for (const auto& [cluster, families] : counts) {
        ClusterPurity cp;
        cp.cluster_id = cluster;
        std::size_t best = 0;
        for (const auto& [family, n] : families) {
            cp.size += n;
            if (n > best) {
                best = n;
                cp.dominant_family = family;
            }
        }
        cp.purity = static_cast<double>(best) / static_cast<double>(cp.size);
        total += cp.size;
        dominant_total += best;
        r.per_cluster.push_back(std::move(cp));
    }
    r.purity = total == 0 ? 0.0 : static_cast<double>(dominant_total) / static_cast<double>(total);
    return r;
}

namespace {

std::pair<std::vector<int>, std::size_t> compact_labels(std::span<const int> labels) {
    std::map<int, int> index;
    for (int l : labels) index.emplace(l, 0);
    int next = 0;
    for (auto& [label, slot] : index) slot = next++;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = index.at(labels[i]);
    return {std::move(out), index.size()};
}

}  // namespace

std::vector<double> silhouette_samples(const Matrix& points, std::span<const int> labels) {
    if (labels.size() != points.rows()) throw_runtime("silhouette: labels and points differ in length");
    const auto [dense, n_labels] = compact_labels(labels);
    if (n_labels < 2) throw_data("silhouette: at least two clusters required, got " + std::to_string(n_labels));
    std::vector<double> s(points.rows());
    kernels::silhouette_values(points, dense, n_labels, s);
    return s;
}

double mean_silhouette(const Matrix& points, std::span<const int> labels) {
    const auto s = silhouette_samples(points, labels);
    double sum = 0.0;
    for (double v : s) sum += v;
    return sum / static_cast<double>(s.size());
}

PairwiseDistances::PairwiseDistances(const Matrix& points)
    : n_(points.rows()), packed_(points.rows() < 2 ? 0 : points.rows() * (points.rows() - 1) / 2) {
    kernels::pairwise_packed(points, packed_);
}

double mean_silhouette(const PairwiseDistances& distances, std::span<const int> labels) {
    if (labels.size() != distances.size()) throw_runtime("silhouette: labels and cached points differ in length");
    const auto [dense, n_labels] = compact_labels(labels);
    if (n_labels < 2) throw_data("silhouette: at least two clusters required, got " + std::to_string(n_labels));
    std::vector<double> s(labels.size());
    kernels::silhouette_values_packed(distances.packed(), distances.size(), dense, n_labels, s);
    double sum = 0.0;
    for (double v : s) sum += v;
    return sum / static_cast<double>(s.size());
}

MetricsReport evaluate(const Matrix& points, std::span<const std::string> ids, std::span<const int> labels,
                       const LabelMap* truth) {
    MetricsReport r;
    if (truth != nullptr) {
        std::vector<std::pair<std::string, int>> assignments;
        assignments.reserve(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) assignments.emplace_back(ids[i], labels[i]);
        r = purity(assignments, *truth);
    }
    std::vector<int> distinct(labels.begin(), labels.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() >= 2) {
        r.mean_silhouette = mean_silhouette(points, labels);
        r.has_silhouette = true;
    }
    return r;
}

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json clusters = nlohmann::json::array();
    for (const auto& c : per_cluster) {
        clusters.push_back(
            {{"cluster_id", c.cluster_id}, {"size", c.size}, {"purity", c.purity}, {"dominant_family", c.dominant_family}});
    }
    nlohmann::json j = {{"purity", purity}, {"per_cluster", clusters}};
    j["mean_silhouette"] = has_silhouette ? nlohmann::json(mean_silhouette) : nlohmann::json(nullptr);
    return j;
}

void write_per_cluster_csv(const MetricsReport& report, std::ostream& out) {
    out << "cluster_id,size,purity,dominant_family\n";
    for (const auto& c : report.per_cluster) {
        out << c.cluster_id << ',' << c.size << ',' << format_double(c.purity) << ',' << c.dominant_family << '\n';
    }
}

}  // namespace famstream
