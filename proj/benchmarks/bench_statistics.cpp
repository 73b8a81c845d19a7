#include <benchmark/benchmark.h>

#include "sepcp/cpstat.hpp"
#include "sepcp/model.hpp"

namespace {

sepcp::ScoreMatrix scores(std::size_t n, Eigen::Index d) {
    const Eigen::VectorXd sds = Eigen::VectorXd::LinSpaced(d, 1.0, 0.3);
    return sepcp::ScoreMatrix::from_values(sepcp::simulate_latent_scores(n, sepcp::NoiseProcess::ar1, 0.4, sds, 1));
}

void BM_StatisticDiag(benchmark::State& state) {
    const auto s = scores(static_cast<std::size_t>(state.range(0)), state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(sepcp::statistic_diag(s).sum.value);
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_StatisticDiag)->ArgsProduct({{100, 200, 400, 800}, {4, 64}})->Unit(benchmark::kMillisecond);

void BM_FlatTop(benchmark::State& state) {
    const auto s = scores(static_cast<std::size_t>(state.range(0)), 1);
    const Eigen::VectorXd e = s.values.col(0).array() - s.values.col(0).mean();
    for (auto _ : state) benchmark::DoNotOptimize(sepcp::flat_top_long_run_variance({e.data(), static_cast<std::size_t>(e.size())}));
}
BENCHMARK(BM_FlatTop)->Arg(1000)->Arg(10000);

}  // namespace
