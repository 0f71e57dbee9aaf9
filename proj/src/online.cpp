#include "famstream/online.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "famstream/error.hpp"
#include "famstream/kernels.hpp"

namespace famstream {

namespace {

void check_state_dim(const Matrix& m, std::span<const double> x, const char* ctx) { check_dim(m.cols(), x.size(), ctx); }

nlohmann::json matrix_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(m.row_vector(i));
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& rows, std::size_t dim) {
    Matrix m = Matrix::with_cols(dim);
    for (const auto& r : rows) m.push_row(r.get<std::vector<double>>());
    return m;
}

}  // namespace

// ---- OKM --------------------------------------------------------------------

OKMState okm_init(std::size_t k, const Matrix& warmup) {
    if (k == 0) throw_usage("okm_init: k must be positive");
    if (warmup.rows() != k) {
        throw_usage("okm_init: expected " + std::to_string(k) + " warm-up points, got " + std::to_string(warmup.rows()));
    }
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            if (squared_distance(warmup.row(a), warmup.row(b)) == 0.0) {
                throw_data("okm_init: warm-up points " + std::to_string(a) + " and " + std::to_string(b) +
                           " are identical");
            }
        }
    }
    return OKMState{warmup, std::vector<std::size_t>(k, 0)};
}

std::size_t okm_update(OKMState& state, std::span<const double> x) {
    check_state_dim(state.centroids, x, "okm_update");
    const std::size_t i = kernels::nearest_row(state.centroids, x);
    const std::size_t n = ++state.counts[i];
    auto mu = state.centroids.row(i);
    for (std::size_t j = 0; j < mu.size(); ++j) mu[j] += (1.0 / static_cast<double>(n)) * (x[j] - mu[j]);
    return i;
}

// ---- SOM --------------------------------------------------------------------

double SOMState::alpha() const noexcept { return alpha0 * std::exp(-static_cast<double>(t) / lambda_alpha); }

double SOMState::sigma() const noexcept { return sigma0 * std::exp(-static_cast<double>(t) / lambda_sigma); }

SOMState som_init_with_weights(Matrix weights, const SOMParams& params) {
    const std::size_t n = weights.rows();
    if (n == 0) throw_usage("som_init: at least one unit required");
    if (!(params.alpha0 > 0.0 && params.alpha0 <= 1.0)) throw_usage("som_init: alpha0 must lie in (0, 1]");
    if (!(params.lambda_alpha > 0.0) || !(params.lambda_sigma > 0.0)) throw_usage("som_init: decay constants must be positive");
    SOMState s;
    s.weights = std::move(weights);
    s.alpha0 = params.alpha0;
    s.lambda_alpha = params.lambda_alpha;
    s.sigma0 = params.sigma0.value_or(static_cast<double>(n) / 2.0);
    if (!(s.sigma0 > 0.0)) throw_usage("som_init: sigma0 must be positive");
    s.lambda_sigma = params.lambda_sigma;
    s.kernel = params.kernel;
    s.rate = params.rate;
    s.grid_positions.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.grid_positions[i] = static_cast<double>(i);
    s.counts.assign(n, 0);
    return s;
}

SOMState som_init(std::size_t n_units, std::size_t dim, std::uint64_t seed, const SOMParams& params) {
    if (n_units == 0) throw_usage("som_init: at least one unit required");
    if (dim == 0) throw_usage("som_init: dimension must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-0.1, 0.1);
    Matrix w(n_units, dim);
    for (double& v : w.data()) v = uniform(rng);
    return som_init_with_weights(std::move(w), params);
}

std::size_t som_update(SOMState& state, std::span<const double> x) {
    check_state_dim(state.weights, x, "som_update");
    const std::size_t c = kernels::nearest_row(state.weights, x);
    ++state.counts[c];

    if (state.kernel == SOMKernel::winner_only) {
        const double rate =
            state.rate == SOMRate::inverse_wins ? 1.0 / static_cast<double>(state.counts[c]) : state.alpha();
        auto w = state.weights.row(c);
        for (std::size_t j = 0; j < w.size(); ++j) w[j] += rate * (x[j] - w[j]);
    } else {
        const double alpha = state.alpha();
        const double sigma = state.sigma();
        const double two_sigma2 = 2.0 * sigma * sigma;
        for (std::size_t i = 0; i < state.n_units(); ++i) {
            const double d = state.grid_positions[c] - state.grid_positions[i];
            const double h = std::exp(-(d * d) / two_sigma2);
            const double rate = state.rate == SOMRate::inverse_wins
                                    ? (i == c ? 1.0 / static_cast<double>(state.counts[c]) : 0.0) * h
                                    : alpha * h;
            if (rate == 0.0) continue;
            auto w = state.weights.row(i);
            for (std::size_t j = 0; j < w.size(); ++j) w[j] += rate * (x[j] - w[j]);
        }
    }
    ++state.t;
    return c;
}

// ---- BSAS -------------------------------------------------------------------

BSASState bsas_init(double theta, std::size_t q, std::size_t dim) {
    if (!(theta >= 0.0)) throw_usage("bsas_init: theta must be non-negative");
    if (q == 0) throw_usage("bsas_init: q must be positive");
    if (dim == 0) throw_usage("bsas_init: dimension must be positive");
    BSASState s;
    s.theta = theta;
    s.q = q;
    s.centroids = Matrix::with_cols(dim);
    return s;
}

BSASStep bsas_update(BSASState& state, std::span<const double> x) {
    check_state_dim(state.centroids, x, "bsas_update");
    if (state.m() == 0) {
        state.centroids.push_row(x);
        state.counts.push_back(1);
        return {0, true};
    }
    const std::size_t k = kernels::nearest_row(state.centroids, x);
    const double d = std::sqrt(squared_distance(x, state.centroids.row(k)));
    if (d > state.theta && state.m() < state.q) {
        state.centroids.push_row(x);
        state.counts.push_back(1);
        return {state.m() - 1, true};
    }
    const std::size_t n = ++state.counts[k];
    auto c = state.centroids.row(k);
    for (std::size_t j = 0; j < c.size(); ++j) c[j] += (1.0 / static_cast<double>(n)) * (x[j] - c[j]);
    return {k, false};
}

double bsas_theta_heuristic(const Matrix& buffer) {
    const std::size_t n = buffer.rows();
    if (n < 2) return 0.0;
    double sum = 0.0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) sum += std::sqrt(squared_distance(buffer.row(a), buffer.row(b)));
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    return 0.5 * sum / pairs;
}

// ---- common ---------------------------------------------------------------

const Matrix& centers(const OKMState& s) { return s.centroids; }
const Matrix& centers(const SOMState& s) { return s.weights; }
const Matrix& centers(const BSASState& s) { return s.centroids; }

template <typename State>
std::vector<int> final_assign(const State& state, const Matrix& points) {
    std::vector<int> out(points.rows(), 0);
    if (points.empty()) return out;
    const Matrix& c = centers(state);
    if (c.empty()) throw_runtime("final_assign: clusterer holds no clusters");
    check_dim(c.cols(), points.cols(), "final_assign");
    kernels::nearest_rows(points, c, out);
    return out;
}

template std::vector<int> final_assign<OKMState>(const OKMState&, const Matrix&);
template std::vector<int> final_assign<SOMState>(const SOMState&, const Matrix&);
template std::vector<int> final_assign<BSASState>(const BSASState&, const Matrix&);

nlohmann::json to_json(const OKMState& s) {
    return {{"algorithm", "okm"}, {"dim", s.centroids.cols()}, {"centroids", matrix_json(s.centroids)}, {"counts", s.counts}};
}

nlohmann::json to_json(const SOMState& s) {
    return {{"algorithm", "som"},
            {"dim", s.weights.cols()},
            {"weights", matrix_json(s.weights)},
            {"t", s.t},
            {"alpha0", s.alpha0},
            {"lambda_alpha", s.lambda_alpha},
            {"sigma0", s.sigma0},
            {"lambda_sigma", s.lambda_sigma},
            {"kernel", s.kernel == SOMKernel::gaussian ? "gaussian" : "winner_only"},
            {"rate", s.rate == SOMRate::exponential ? "exponential" : "inverse_wins"},
            {"grid_positions", s.grid_positions},
            {"counts", s.counts}};
}

nlohmann::json to_json(const BSASState& s) {
    return {{"algorithm", "bsas"},
            {"dim", s.centroids.cols()},
            {"theta", s.theta},
            {"q", s.q},
            {"centroids", matrix_json(s.centroids)},
            {"counts", s.counts}};
}

OKMState okm_from_json(const nlohmann::json& j) {
    OKMState s;
    s.centroids = matrix_from_json(j.at("centroids"), j.at("dim").get<std::size_t>());
    s.counts = j.at("counts").get<std::vector<std::size_t>>();
    if (s.counts.size() != s.centroids.rows()) throw_data("OKM state: counts and centroids disagree");
    return s;
}

SOMState som_from_json(const nlohmann::json& j) {
    SOMParams p;
    p.alpha0 = j.at("alpha0").get<double>();
    p.lambda_alpha = j.at("lambda_alpha").get<double>();
    p.sigma0 = j.at("sigma0").get<double>();
    p.lambda_sigma = j.at("lambda_sigma").get<double>();
    p.kernel = j.at("kernel").get<std::string>() == "gaussian" ? SOMKernel::gaussian : SOMKernel::winner_only;
    p.rate = j.at("rate").get<std::string>() == "exponential" ? SOMRate::exponential : SOMRate::inverse_wins;
    SOMState s = som_init_with_weights(matrix_from_json(j.at("weights"), j.at("dim").get<std::size_t>()), p);
    s.t = j.at("t").get<std::uint64_t>();
    s.counts = j.at("counts").get<std::vector<std::size_t>>();
    s.grid_positions = j.at("grid_positions").get<std::vector<double>>();
    return s;
}

BSASState bsas_from_json(const nlohmann::json& j) {
    BSASState s = bsas_init(j.at("theta").get<double>(), j.at("q").get<std::size_t>(), j.at("dim").get<std::size_t>());
    s.centroids = matrix_from_json(j.at("centroids"), j.at("dim").get<std::size_t>());
    s.counts = j.at("counts").get<std::vector<std::size_t>>();
    return s;
}

// ---- driver -------------------------------------------------------------------

std::string_view to_string(OnlineAlgorithm a) {
    switch (a) {
        case OnlineAlgorithm::okm: return "okm";
        case OnlineAlgorithm::som: return "som";
        case OnlineAlgorithm::bsas: return "bsas";
    }
    return "?";
}

OnlineAlgorithm parse_online_algorithm(std::string_view text) {
    if (text == "okm") return OnlineAlgorithm::okm;
    if (text == "som") return OnlineAlgorithm::som;
    if (text == "bsas") return OnlineAlgorithm::bsas;
    throw_usage("unknown online algorithm '" + std::string(text) + "' (expected okm, som or bsas)");
}

std::string_view to_string(OKMSeeding s) { return s == OKMSeeding::first_distinct ? "first-distinct" : "kmeans++"; }

OKMSeeding parse_okm_seeding(std::string_view text) {
    if (text == "first-distinct") return OKMSeeding::first_distinct;
    if (text == "kmeans++") return OKMSeeding::kmeanspp;
    throw_usage("unknown okm seeding '" + std::string(text) + "' (expected first-distinct or kmeans++)");
}

namespace {

// k-means++ D^2 sampling over the rows of `buffer`.
Matrix dsquared_seeds(const Matrix& buffer, std::size_t k, std::mt19937_64& rng) {
    Matrix seeds = Matrix::with_cols(buffer.cols());
    std::vector<double> d2(buffer.rows(), std::numeric_limits<double>::infinity());
    std::size_t pick = std::uniform_int_distribution<std::size_t>(0, buffer.rows() - 1)(rng);
    while (true) {
        seeds.push_row(buffer.row(pick));
        double total = 0.0;
        for (std::size_t i = 0; i < buffer.rows(); ++i) {
            d2[i] = std::min(d2[i], squared_distance(buffer.row(i), buffer.row(pick)));
            total += d2[i];
        }
        if (seeds.rows() == k || total == 0.0) break;
        double u = std::uniform_real_distribution<double>(0.0, total)(rng);
        for (std::size_t i = 0; i < buffer.rows(); ++i) {
            if (d2[i] == 0.0) continue;
            pick = i;
            if (u < d2[i]) break;
            u -= d2[i];
        }
    }
    return seeds;
}

// Lloyd iterations on the buffer; returns the final within-cluster sum of squares.
double lloyd(const Matrix& buffer, Matrix& centers, int max_iters) {
    std::vector<std::size_t> assign(buffer.rows(), centers.rows());
    double wcss = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        bool changed = false;
        wcss = 0.0;
        for (std::size_t i = 0; i < buffer.rows(); ++i) {
            const std::size_t j = kernels::nearest_row(centers, buffer.row(i));
            wcss += squared_distance(buffer.row(i), centers.row(j));
            changed |= j != assign[i];
            assign[i] = j;
        }
        if (!changed) break;
        Matrix sums(centers.rows(), centers.cols());
        std::vector<std::size_t> counts(centers.rows());
        for (std::size_t i = 0; i < buffer.rows(); ++i) {
            ++counts[assign[i]];
            auto row = sums.row(assign[i]);
            const auto x = buffer.row(i);
            for (std::size_t d = 0; d < x.size(); ++d) row[d] += x[d];
        }
        // An emptied center keeps its position.
        for (std::size_t j = 0; j < centers.rows(); ++j) {
            if (counts[j] == 0) continue;
            for (std::size_t d = 0; d < centers.cols(); ++d) centers(j, d) = sums(j, d) / static_cast<double>(counts[j]);
        }
    }
    return wcss;
}

bool has_duplicate_rows(const Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = i + 1; j < m.rows(); ++j) {
            if (squared_distance(m.row(i), m.row(j)) == 0.0) return true;
        }
    }
    return false;
}

}  // namespace

Matrix okm_first_distinct(const Matrix& buffer, std::size_t k) {
    Matrix distinct = Matrix::with_cols(buffer.cols());
    for (std::size_t i = 0; i < buffer.rows() && distinct.rows() < k; ++i) {
        bool seen = false;
        for (std::size_t r = 0; r < distinct.rows() && !seen; ++r) {
            seen = squared_distance(distinct.row(r), buffer.row(i)) == 0.0;
        }
        if (!seen) distinct.push_row(buffer.row(i));
    }
    return distinct;
}

Matrix okm_warmup_centers(const Matrix& buffer, std::size_t k, std::uint64_t seed, int restarts) {
    if (buffer.empty() || k == 0) return Matrix::with_cols(buffer.cols());
    std::mt19937_64 rng(seed);
    Matrix best = Matrix::with_cols(buffer.cols());
    double best_wcss = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(restarts, 1); ++r) {
        Matrix centers = dsquared_seeds(buffer, k, rng);
        if (centers.rows() < k) return centers;  // fewer than k distinct points
        Matrix refined = centers;
        const double wcss = lloyd(buffer, refined, 100);
        if (has_duplicate_rows(refined)) refined = std::move(centers);
        if (wcss < best_wcss) {
            best_wcss = wcss;
            best = std::move(refined);
        }
    }
    return best;
}

OnlineClusterer::OnlineClusterer(const OnlineConfig& config, std::size_t dim, std::uint64_t seed)
    : config_(config), dim_(dim), seed_(seed), buffer_(Matrix::with_cols(dim)) {
    if (config.n_clusters == 0) throw_usage("online clusterer needs at least one cluster");
    if (config.bsas_theta && !(*config.bsas_theta > 0.0)) throw_usage("bsas theta must be positive");
    if (config.algorithm == OnlineAlgorithm::som) {
        SOMParams p;
        p.alpha0 = config.som_alpha0;
        p.sigma0 = config.som_sigma0;
        p.lambda_alpha = p.lambda_sigma = std::max(1.0, config.som_expected_length);
        const double sigma0 = p.sigma0.value_or(static_cast<double>(config.n_clusters) / 2.0);
        if (config.som_sigma_final && *config.som_sigma_final > 0.0 && sigma0 > *config.som_sigma_final) {
            p.lambda_sigma = p.lambda_alpha / std::log(sigma0 / *config.som_sigma_final);
        }
        state_ = som_init(config.n_clusters, dim, seed, p);
    } else if (config.algorithm == OnlineAlgorithm::bsas && config.bsas_theta) {
        state_ = bsas_init(*config.bsas_theta, config.n_clusters, dim);
    }
}

void OnlineClusterer::update(std::span<const double> x) {
    check_dim(dim_, x.size(), "OnlineClusterer::update");
    ++updates_;
    if (auto* okm = std::get_if<OKMState>(&state_)) {
        okm_update(*okm, x);
    } else if (auto* som = std::get_if<SOMState>(&state_)) {
        som_update(*som, x);
    } else if (auto* bsas = std::get_if<BSASState>(&state_)) {
        bsas_update(*bsas, x);
    } else {
        buffer_.push_row(x);
        try_initialize(false);
    }
}

void OnlineClusterer::try_initialize(bool force) {
    if (config_.algorithm == OnlineAlgorithm::okm) {
        const std::size_t wanted = config_.okm_seeding == OKMSeeding::first_distinct ? config_.n_clusters
                                                                                        : std::max(config_.okm_warmup, config_.n_clusters);
        if (buffer_.rows() < wanted && !force) return;
        if (buffer_.empty()) return;
        const Matrix seeds = config_.okm_seeding == OKMSeeding::first_distinct
                                 ? okm_first_distinct(buffer_, config_.n_clusters)
                                 : okm_warmup_centers(buffer_, config_.n_clusters, seed_, config_.okm_restarts);
        if (seeds.rows() < config_.n_clusters && !force) return;
        state_ = okm_init(seeds.rows(), seeds);
    } else if (config_.algorithm == OnlineAlgorithm::bsas) {
        if (buffer_.rows() < config_.bsas_warmup && !force) return;
        if (buffer_.empty()) return;
        state_ = bsas_init(bsas_theta_heuristic(buffer_), config_.n_clusters, dim_);
    }
    replay_buffer();
}

void OnlineClusterer::replay_buffer() {
    Matrix pending = std::move(buffer_);
    buffer_ = Matrix::with_cols(dim_);
    for (std::size_t i = 0; i < pending.rows(); ++i) {
        if (auto* okm = std::get_if<OKMState>(&state_)) okm_update(*okm, pending.row(i));
        if (auto* bsas = std::get_if<BSASState>(&state_)) bsas_update(*bsas, pending.row(i));
    }
}

void OnlineClusterer::finish() {
    if (!ready()) try_initialize(true);
}

std::size_t OnlineClusterer::n_clusters() const { return ready() ? centers().rows() : 0; }

const Matrix& OnlineClusterer::centers() const {
    return std::visit(
        [](const auto& s) -> const Matrix& {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, std::monostate>) {
                throw_runtime("online clusterer has not seen any data");
            } else {
                return famstream::centers(s);
            }
        },
        state_);
}

std::vector<int> OnlineClusterer::final_assign(const Matrix& points) const {
    if (points.empty()) return {};
    return std::visit(
        [&](const auto& s) -> std::vector<int> {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, std::monostate>) {
                throw_runtime("final_assign: online clusterer has not been initialized");
            } else {
                return famstream::final_assign(s, points);
            }
        },
        state_);
}

nlohmann::json OnlineClusterer::to_json() const {
    nlohmann::json state = std::visit(
        [](const auto& s) -> nlohmann::json {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, std::monostate>) {
                return nullptr;
            } else {
                return famstream::to_json(s);
            }
        },
        state_);
    return {{"algorithm", to_string(config_.algorithm)},
            {"n_clusters", config_.n_clusters},
            {"updates", updates_},
            {"buffered", buffer_.rows()},
            {"state", state}};
}

}  // namespace famstream
