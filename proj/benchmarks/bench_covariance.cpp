#include <benchmark/benchmark.h>

#include "sepcp/model.hpp"
#include "sepcp/sepfpca.hpp"

namespace {

sepcp::FunctionalSeries volume(std::size_t side, std::size_t n) {
    const sepcp::GridSpec grid({side, side, side});
    sepcp::NoiseSpec noise;
    noise.latent_basis = sepcp::separable_cosine_basis(grid, std::vector<std::size_t>{3, 3, 3});
    noise.channel_sd = Eigen::VectorXd::LinSpaced(27, 1.0, 0.1);
    noise.mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
    return sepcp::generate_synthetic(grid, n, noise, sepcp::ChangeSpec::none(), 3);
}

void BM_DirectionalCovariance(benchmark::State& state) {
    const auto s = volume(static_cast<std::size_t>(state.range(0)), 100);
    for (auto _ : state)
        for (std::size_t a = 0; a < 3; ++a) benchmark::DoNotOptimize(sepcp::directional_covariance(s, a).values.sum());
}
BENCHMARK(BM_DirectionalCovariance)->Arg(8)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_SeparableBasisAndProjection(benchmark::State& state) {
    const auto s = volume(static_cast<std::size_t>(state.range(0)), 100);
    const std::vector<std::size_t> d{4, 4, 4};
    for (auto _ : state) benchmark::DoNotOptimize(sepcp::project(s, sepcp::estimate_separable_basis(s, d)).values.sum());
}
BENCHMARK(BM_SeparableBasisAndProjection)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
