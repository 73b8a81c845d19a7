#include <benchmark/benchmark.h>

#include "sepcp/bootstrap.hpp"
#include "sepcp/model.hpp"

namespace {

void BM_Bootstrap(benchmark::State& state) {
    const Eigen::VectorXd sds = Eigen::VectorXd::LinSpaced(4, 1.0, 0.4);
    const auto s = sepcp::ScoreMatrix::from_values(
        sepcp::simulate_latent_scores(static_cast<std::size_t>(state.range(0)), sepcp::NoiseProcess::ar1, 0.4, sds, 2));
    sepcp::BootstrapConfig cfg;
    cfg.replicates = 200;
    cfg.threads = 1;
    cfg.studentizer = static_cast<sepcp::ReplicateStudentizer>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(sepcp::bootstrap_test(s, cfg).p_value());
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.replicates));
}
BENCHMARK(BM_Bootstrap)->ArgsProduct({{225, 450}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace
