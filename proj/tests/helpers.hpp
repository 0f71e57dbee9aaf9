#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "famstream/matrix.hpp"

namespace testing {

using famstream::Matrix;

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Matrix m(rows, cols);
    for (double& v : m.data()) v = normal(rng);
    return m;
}

inline Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m = Matrix::with_cols(rows.empty() ? 0 : rows.front().size());
    for (const auto& r : rows) m.push_row(r);
    return m;
}

inline double plain_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// Textbook silhouette written straight from the definition, one point at a time.
inline double naive_mean_silhouette(const Matrix& x, const std::vector<int>& labels) {
    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto& own = members[labels[i]];
        if (own.size() == 1) continue;
        double a = 0.0;
        for (std::size_t j : own) {
            if (j != i) a += plain_distance(x.row(i), x.row(j));
        }
        a /= static_cast<double>(own.size() - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [label, idx] : members) {
            if (label == labels[i]) continue;
            double d = 0.0;
            for (std::size_t j : idx) d += plain_distance(x.row(i), x.row(j));
            b = std::min(b, d / static_cast<double>(idx.size()));
        }
        const double m = std::max(a, b);
        total += m > 0.0 ? (b - a) / m : 0.0;
    }
    return total / static_cast<double>(labels.size());
}

// Weighted k-NN vote by a full scan: sort every reference point by (distance,
// index), weight the first k by (d_k - d_i) / (d_k - d_1) (all ones when
// d_k == d_1), and pick the top score, breaking ties toward the label whose
// first neighbor comes earliest.
inline int brute_force_vote(const Matrix& ref, const std::vector<int>& labels, std::size_t k,
                            std::span<const double> x) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < ref.rows(); ++i) all.push_back({plain_distance(ref.row(i), x), i});
    std::sort(all.begin(), all.end());
    const double d1 = all[0].first, dk = all[k - 1].first;
    std::map<int, double> score;
    std::map<int, std::size_t> first_rank;
    for (std::size_t r = 0; r < k; ++r) {
        const int label = labels[all[r].second];
        score[label] += dk == d1 ? 1.0 : (dk - all[r].first) / (dk - d1);
        first_rank.emplace(label, r);
    }
    int best = 0;
    double best_score = -1.0;
    std::size_t best_rank = 0;
    for (const auto& [label, s] : score) {
        if (s > best_score || (s == best_score && first_rank[label] < best_rank)) {
            best = label;
            best_score = s;
            best_rank = first_rank[label];
        }
    }
    return best;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("famstream-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing
