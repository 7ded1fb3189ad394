#include <benchmark/benchmark.h>

#include "mobicomm/encounter.hpp"
#include "mobicomm/ingest.hpp"
#include "mobicomm/spectral.hpp"
#include "mobicomm/static_metrics.hpp"
#include "mobicomm/synthetic.hpp"
#include "mobicomm/temporal_metrics.hpp"

using namespace mobicomm;

namespace {

ContactGraph ba_graph(std::size_t n) {
    return barabasi_albert({SyntheticModel::PreferentialAttachment, n, 2, 2, 0.0, 42});
}

void BM_MatrixExponentialDense(benchmark::State& state) {
    const auto s = adjacency_matrix(ba_graph(state.range(0)), Storage::Dense);
    for (auto _ : state) benchmark::DoNotOptimize(matrix_exponential(s));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MatrixExponentialDense)->RangeMultiplier(2)->Range(64, 1024)->Unit(benchmark::kMillisecond)->Complexity();

void BM_ExpActionLanczos(benchmark::State& state) {
    const auto s = adjacency_matrix(ba_graph(state.range(0)), Storage::Sparse);
    const Vector ones = Vector::Ones(s.size());
    for (auto _ : state) benchmark::DoNotOptimize(exp_action(s, ones));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ExpActionLanczos)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Unit(benchmark::kMillisecond)->Complexity();

void BM_SpectralRadius(benchmark::State& state) {
    const auto s = adjacency_matrix(ba_graph(state.range(0)), Storage::Sparse);
    for (auto _ : state) benchmark::DoNotOptimize(spectral_radius(s));
}
BENCHMARK(BM_SpectralRadius)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Unit(benchmark::kMillisecond);

void BM_ResolventConjugateGradient(benchmark::State& state) {
    const auto s = adjacency_matrix(ba_graph(state.range(0)), Storage::Sparse);
    const double rho = spectral_radius(s);
    const ResolventSolver solver(s, 0.85 / rho, rho);
    const Vector ones = Vector::Ones(s.size());
    for (auto _ : state) benchmark::DoNotOptimize(solver.apply(ones));
}
BENCHMARK(BM_ResolventConjugateGradient)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Unit(benchmark::kMillisecond);

void BM_TotalCommunicabilityMatrixFree(benchmark::State& state) {
    const auto g = ba_graph(state.range(0));
    StaticOptions opts;
    opts.dense_limit = 0;
    for (auto _ : state) benchmark::DoNotOptimize(total_communicability(g, opts));
}
BENCHMARK(BM_TotalCommunicabilityMatrixFree)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_EncounterSweep(benchmark::State& state) {
    AssociationLogSpec spec;
    spec.nodes = state.range(0);
    spec.access_points = spec.nodes / 20;
    spec.days = 7;
    const auto intervals = smooth_ping_pong(build_intervals(synthetic_association_log(spec)).intervals);
    for (auto _ : state) benchmark::DoNotOptimize(extract_encounters(intervals));
    state.counters["intervals"] = static_cast<double>(intervals.size());
}
BENCHMARK(BM_EncounterSweep)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_DynamicCommunicability(benchmark::State& state) {
    const auto events = poisson_contact_trace({static_cast<std::size_t>(state.range(0)), 30, 5, 600, 7});
    const auto [origin, span] = observation_window(events);
    const auto seq = snapshot_sequence(events, 86'400, origin, span);
    const double gamma = katz_gamma(seq).gamma;
    TemporalOptions opts;
    opts.keep_matrix = false;
    for (auto _ : state) benchmark::DoNotOptimize(dynamic_communicability(seq, gamma, opts));
}
BENCHMARK(BM_DynamicCommunicability)->Arg(200)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
