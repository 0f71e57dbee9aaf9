#pragma once

// Streaming clusterers: sequential k-means (OKM), a self-organizing map on a
// 1 x n line of units (SOM) and the basic sequential algorithmic scheme (BSAS).
// Each consumes one vector per update and keeps only incremental state.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "famstream/matrix.hpp"

namespace famstream {

// ---- sequential k-means -------------------------------------------------

struct OKMState {
    Matrix centroids;
    std::vector<std::size_t> counts;

    std::size_t k() const noexcept { return centroids.rows(); }
};

// Centroids start at the warm-up points (which must be pairwise distinct);
// counts start at zero.
OKMState okm_init(std::size_t k, const Matrix& warmup);

// Nearest centroid i (lowest index on ties): n_i += 1, mu_i += (x - mu_i) / n_i.
std::size_t okm_update(OKMState& state, std::span<const double> x);

// ---- self-organizing map --------------------------------------------------

enum class SOMKernel { gaussian, winner_only };
enum class SOMRate { exponential, inverse_wins };

struct SOMParams {
    double alpha0 = 0.5;
    double lambda_alpha = 1000.0;
    std::optional<double> sigma0;  // defaults to n_units / 2
    double lambda_sigma = 1000.0;
    // winner_only + inverse_wins turns the map into sequential k-means.
    SOMKernel kernel = SOMKernel::gaussian;
    SOMRate rate = SOMRate::exponential;
};

struct SOMState {
    Matrix weights;
    std::uint64_t t = 0;
    double alpha0 = 0.5;
    double lambda_alpha = 1000.0;
    double sigma0 = 1.0;
    double lambda_sigma = 1000.0;
    SOMKernel kernel = SOMKernel::gaussian;
    SOMRate rate = SOMRate::exponential;
    std::vector<double> grid_positions;
    std::vector<std::size_t> counts;

    std::size_t n_units() const noexcept { return weights.rows(); }
    double alpha() const noexcept;
    double sigma() const noexcept;
};

// Weights uniform in [-0.1, 0.1]^dim drawn from `seed`.
SOMState som_init(std::size_t n_units, std::size_t dim, std::uint64_t seed, const SOMParams& params = {});
// Same, with caller-provided initial weights.
SOMState som_init_with_weights(Matrix weights, const SOMParams& params = {});

// Winner c = argmin ||x - w_i|| (lowest index on ties); every unit moves by
// alpha(t) * h_ci(t) * (x - w_i) with h_ci = exp(-d_ci^2 / (2 sigma(t)^2)),
// d_ci = |c - i|; then t advances.
std::size_t som_update(SOMState& state, std::span<const double> x);

// ---- BSAS -------------------------------------------------------------------

struct BSASState {
    double theta = 0.0;
    std::size_t q = 1;
    Matrix centroids;
    std::vector<std::size_t> counts;

    std::size_t m() const noexcept { return centroids.rows(); }
};

BSASState bsas_init(double theta, std::size_t q, std::size_t dim);

struct BSASStep {
    std::size_t cluster = 0;
    bool created = false;
};

// The first call founds cluster 0. Afterwards a point founds a new cluster
// when it is farther than theta from every centroid and fewer than q clusters
// exist; otherwise it joins the nearest cluster, whose centroid tracks the
// running mean.
BSASStep bsas_update(BSASState& state, std::span<const double> x);

// 0.5 x mean pairwise distance of the given points (0 for fewer than two).
double bsas_theta_heuristic(const Matrix& buffer);

// ---- common ---------------------------------------------------------------

// Cluster centers of any state: centroids or unit weights.
const Matrix& centers(const OKMState& s);
const Matrix& centers(const SOMState& s);
const Matrix& centers(const BSASState& s);

// Nearest center per point (ties to the lowest index).
template <typename State>
std::vector<int> final_assign(const State& state, const Matrix& points);

nlohmann::json to_json(const OKMState& s);
nlohmann::json to_json(const SOMState& s);
nlohmann::json to_json(const BSASState& s);
OKMState okm_from_json(const nlohmann::json& j);
SOMState som_from_json(const nlohmann::json& j);
BSASState bsas_from_json(const nlohmann::json& j);

// ---- driver used by the pipeline --------------------------------------------

enum class OnlineAlgorithm { okm, som, bsas };

std::string_view to_string(OnlineAlgorithm a);
OnlineAlgorithm parse_online_algorithm(std::string_view text);

// How OKM picks its k starting centroids from the buffered first samples.
enum class OKMSeeding {
    first_distinct,  // the first k distinct samples
    kmeanspp,        // best of several k-means++ + Lloyd runs over the buffer
};

std::string_view to_string(OKMSeeding s);
OKMSeeding parse_okm_seeding(std::string_view text);

// The first k distinct rows of `buffer` (fewer if it has fewer).
Matrix okm_first_distinct(const Matrix& buffer, std::size_t k);

// Lloyd-refined centers of the lowest-WCSS run among `restarts` k-means++
// seedings of `buffer`. Returns fewer than k rows only when the buffer has
// fewer than k distinct points.
Matrix okm_warmup_centers(const Matrix& buffer, std::size_t k, std::uint64_t seed, int restarts = 10);

struct OnlineConfig {
    OnlineAlgorithm algorithm = OnlineAlgorithm::okm;
    // k for OKM, unit count for SOM, upper bound q for BSAS.
    std::size_t n_clusters = 4;
    std::optional<double> bsas_theta;
    std::size_t bsas_warmup = 100;
    OKMSeeding okm_seeding = OKMSeeding::kmeanspp;
    // kmeanspp seeding buffers this many samples before choosing centroids.
    std::size_t okm_warmup = 100;
    int okm_restarts = 10;
    // Expected number of updates; the learning-rate decay constant.
    double som_expected_length = 1000.0;
    // When set, the width decay constant is chosen so that sigma falls from
    // sigma0 to this value over som_expected_length updates; otherwise it
    // equals som_expected_length.
    std::optional<double> som_sigma_final = 0.01;
    double som_alpha0 = 0.5;
    std::optional<double> som_sigma0;
};

// Wraps one of the three states and handles their warm-up: OKM buffers until
// it has seen k distinct vectors, BSAS without an explicit theta buffers
// `bsas_warmup` vectors to derive one. Buffered vectors are replayed in order
// once the state exists.
class OnlineClusterer {
public:
    OnlineClusterer(const OnlineConfig& config, std::size_t dim, std::uint64_t seed);

    void update(std::span<const double> x);
    // Initializes from whatever is buffered. Idempotent.
    void finish();

    bool ready() const noexcept { return !std::holds_alternative<std::monostate>(state_); }
    std::size_t n_clusters() const;
    const Matrix& centers() const;
    std::vector<int> final_assign(const Matrix& points) const;
    std::size_t updates() const noexcept { return updates_; }

    nlohmann::json to_json() const;

private:
    void try_initialize(bool force);
    void replay_buffer();

    OnlineConfig config_;
    std::size_t dim_;
    std::uint64_t seed_;
    std::size_t updates_ = 0;
    Matrix buffer_;
    std::variant<std::monostate, OKMState, SOMState, BSASState> state_;
};

}  // namespace famstream
