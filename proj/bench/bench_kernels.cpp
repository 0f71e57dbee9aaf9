// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS set to the
// thread count of interest.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "famstream/kernels.hpp"

using namespace famstream;
namespace ks = famstream::kernels::serial;
namespace kp = famstream::kernels::parallel;

namespace {

Matrix random_points(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(n, d);
    for (double& v : m.data()) v = normal(rng);
    return m;
}

std::vector<int> labels(std::size_t n, std::size_t k) {
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) l[i] = static_cast<int>(i % k);
    return l;
}

template <bool Parallel>
void nearest_rows(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = random_points(n, 40, 1);
    const auto c = random_points(10, 40, 2);
    std::vector<int> out(n);
    for (auto _ : state) {
        Parallel ? kp::nearest_rows(x, c, out) : ks::nearest_rows(x, c, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

template <bool Parallel>
void distances_to(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = random_points(n, 40, 1);
    const auto q = random_points(1, 40, 3);
    std::vector<double> out(n);
    for (auto _ : state) {
        Parallel ? kp::distances_to(x, q.row(0), out) : ks::distances_to(x, q.row(0), out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

template <bool Parallel>
void covariance(benchmark::State& state) {
    const auto x = random_points(static_cast<std::size_t>(state.range(0)), 100, 4);
    for (auto _ : state) {
        auto c = Parallel ? kp::covariance(x) : ks::covariance(x);
        benchmark::DoNotOptimize(c.data().data());
    }
}

template <bool Parallel>
void silhouette(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = random_points(n, 40, 5);
    const auto l = labels(n, 7);
    std::vector<double> out(n);
    for (auto _ : state) {
        Parallel ? kp::silhouette_values(x, l, 7, out) : ks::silhouette_values(x, l, 7, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void pairwise_packed(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = random_points(n, 40, 6);
    std::vector<double> out(n * (n - 1) / 2);
    for (auto _ : state) {
        Parallel ? kp::pairwise_packed(x, out) : ks::pairwise_packed(x, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void silhouette_packed(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = random_points(n, 40, 7);
    std::vector<double> packed(n * (n - 1) / 2);
    ks::pairwise_packed(x, packed);
    const auto l = labels(n, 7);
    std::vector<double> out(n);
    for (auto _ : state) {
        Parallel ? kp::silhouette_values_packed(packed, n, l, 7, out)
                 : ks::silhouette_values_packed(packed, n, l, 7, out);
        benchmark::DoNotOptimize(out.data());
    }
}

}  // namespace

BENCHMARK(nearest_rows<false>)->Name("nearest_rows/serial")->Arg(3000)->Arg(30000);
BENCHMARK(nearest_rows<true>)->Name("nearest_rows/parallel")->Arg(3000)->Arg(30000);
BENCHMARK(distances_to<false>)->Name("distances_to/serial")->Arg(7000)->Arg(70000);
BENCHMARK(distances_to<true>)->Name("distances_to/parallel")->Arg(7000)->Arg(70000);
BENCHMARK(covariance<false>)->Name("covariance/serial")->Arg(4000);
BENCHMARK(covariance<true>)->Name("covariance/parallel")->Arg(4000);
BENCHMARK(silhouette<false>)->Name("silhouette/serial")->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK(silhouette<true>)->Name("silhouette/parallel")->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK(pairwise_packed<false>)->Name("pairwise_packed/serial")->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK(pairwise_packed<true>)->Name("pairwise_packed/parallel")->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK(silhouette_packed<false>)->Name("silhouette_packed/serial")->Arg(3000)->Arg(7000)->Unit(benchmark::kMillisecond);
BENCHMARK(silhouette_packed<true>)->Name("silhouette_packed/parallel")->Arg(3000)->Arg(7000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
