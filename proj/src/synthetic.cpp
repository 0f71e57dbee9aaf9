#include "famstream/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "famstream/error.hpp"

namespace famstream {

namespace {

struct Family {
    std::string name;
    Vector mean;
    Matrix basis;  // latent_dims x dim, rows orthogonal with norm latent_sd
};

// Gram-Schmidt on Gaussian rows.
Matrix random_basis(std::size_t rows, std::size_t dim, double scale, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix b(rows, dim);
    for (std::size_t r = 0; r < rows; ++r) {
        auto v = b.row(r);
        for (double& x : v) x = normal(rng);
        for (std::size_t p = 0; p < r; ++p) {
            const auto u = b.row(p);
            double dot = 0.0;
            for (std::size_t j = 0; j < dim; ++j) dot += u[j] * v[j];
            for (std::size_t j = 0; j < dim; ++j) v[j] -= dot * u[j];
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
    }
    for (double& x : b.data()) x *= scale;
    return b;
}

Vector draw(const Family& f, double noise_sd, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector x = f.mean;
    for (std::size_t r = 0; r < f.basis.rows(); ++r) {
        const double z = normal(rng);
        const auto b = f.basis.row(r);
        for (std::size_t j = 0; j < x.size(); ++j) x[j] += z * b[j];
    }
    for (double& v : x) v += noise_sd * normal(rng);
    return x;
}

YearMonth shift(YearMonth ym, int months) {
    int idx = ym.year * 12 + (ym.month - 1) + months;
    return {idx / 12, idx % 12 + 1};
}

}  // namespace

Dataset make_synthetic(const SyntheticSpec& spec) {
    if (spec.dim == 0 || spec.latent_dims == 0 || spec.latent_dims > spec.dim) {
        throw_usage("synthetic: need 0 < latent_dims <= dim");
    }
    if (spec.known_families + spec.emerging_families == 0) throw_usage("synthetic: no families requested");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Family> families;
    for (std::size_t f = 0; f < spec.known_families + spec.emerging_families; ++f) {
        Family fam;
        fam.name = f < spec.known_families ? "known-" + std::to_string(f) : "new-" + std::to_string(f - spec.known_families);
        fam.mean.resize(spec.dim);
        double norm = 0.0;
        for (double& v : fam.mean) {
            v = normal(rng);
            norm += v * v;
        }
        for (double& v : fam.mean) v *= spec.separation / std::sqrt(norm);
        fam.basis = random_basis(spec.latent_dims, spec.dim, spec.latent_sd, rng);
        families.push_back(std::move(fam));
    }

    // (family index, draw) pairs per period, shuffled before dating.
    std::vector<std::size_t> corpus_plan;
    std::vector<std::size_t> stream_plan;
    for (std::size_t f = 0; f < spec.known_families; ++f) {
        corpus_plan.insert(corpus_plan.end(), spec.corpus_per_family, f);
        stream_plan.insert(stream_plan.end(), spec.stream_known_per_family, f);
    }
    for (std::size_t f = spec.known_families; f < families.size(); ++f) {
        stream_plan.insert(stream_plan.end(), spec.stream_emerging_per_family, f);
    }
    std::shuffle(corpus_plan.begin(), corpus_plan.end(), rng);
    std::shuffle(stream_plan.begin(), stream_plan.end(), rng);

    Dataset data(spec.dim);
    auto emit = [&](const std::vector<std::size_t>& plan, const char* prefix, int first_month, int months) {
        for (std::size_t i = 0; i < plan.size(); ++i) {
            Sample s;
            s.id = std::string(prefix) + std::to_string(i);
            s.family = families[plan[i]].name;
            const int offset = static_cast<int>(i * static_cast<std::size_t>(months) / std::max<std::size_t>(plan.size(), 1));
            s.first_seen = shift(spec.cutoff, first_month + offset);
            s.features = draw(families[plan[i]], spec.noise_sd, rng);
            data.add(std::move(s));
        }
    };
    emit(corpus_plan, "d", -10, 10);
    emit(stream_plan, "s", 0, 2);
    return data;
}

}  // namespace famstream
