// Serial reference vs OpenMP kernels: Monte Carlo cycles, the alpha-series
// grid and the Laplace-inversion table.
#include "levydam/mc_oracle.hpp"

#include <benchmark/benchmark.h>

using namespace levydam;

namespace {

const LevyModel kCp = LevyModel::compound_poisson(2.0, 1.0, JumpDistribution::exponential(1.0));

CostSpec costs() {
    CostSpec c;
    c.K1 = 1.0;
    c.K2 = 0.5;
    c.R = 0.3;
    c.g = PiecewisePolynomial::piecewise_linear({0, 1, 2}, {0.2, 1, 0.5});
    c.g_star = PiecewisePolynomial::piecewise_linear({0.5, 2, 4}, {1, 0.4, 2});
    return c;
}

void BM_McCycles(benchmark::State& st) {
    const auto exec = st.range(0) ? Execution::Parallel : Execution::Serial;
    const bool brownian = st.range(1) != 0;
    const LevyModel m = brownian ? LevyModel::brownian(0.5, 1.0) : kCp;
    const PolicyParams p = brownian ? PolicyParams{1.5, 0.5, 1.0, 3.0} : PolicyParams{2.0, 0.5, 1.0, 4.0};
    PathConfig cfg;
    cfg.n_paths = brownian ? 500 : 5000;
    cfg.seed = 1;
    const auto c = costs();
    for (auto _ : st) {
        auto b = run_policy_cycles(m, p, c, cfg, InputMode::Reflected, {0.5, 0.0}, p.tau, exec);
        benchmark::DoNotOptimize(b.cycles.data());
    }
    st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * cfg.n_paths));
}
BENCHMARK(BM_McCycles)
    ->ArgsProduct({{0, 1}, {0, 1}})
    ->ArgNames({"parallel", "brownian"})
    ->Unit(benchmark::kMillisecond);

void BM_SeriesGrid(benchmark::State& st) {
    const bool parallel = st.range(0) != 0;
    const auto kernel = st.range(1) ? SeriesKernel::Fft : SeriesKernel::Direct;
    const auto n = static_cast<std::size_t>(st.range(2));
    for (auto _ : st) {
        auto w = series_scale_grid(kCp, 0.5, 8.0 / static_cast<double>(n), n, 1e-15, parallel, kernel);
        benchmark::DoNotOptimize(w.data());
    }
}
BENCHMARK(BM_SeriesGrid)
    ->ArgsProduct({{0, 1}, {0}, {1024, 4096}})
    ->ArgsProduct({{0}, {1}, {1024, 4096, 16384}})
    ->ArgNames({"parallel", "fft", "n"})
    ->Unit(benchmark::kMillisecond);

void BM_LaplaceTable(benchmark::State& st) {
    ScaleOptions o;
    o.method = ScaleMethod::LaplaceInversion;
    o.parallel = st.range(0) != 0;
    o.x_max = 10.0;
    const auto m = LevyModel::gamma(1.5, 1.0, 1.0);
    for (auto _ : st) {
        auto s = ScaleFunctionSet::build(m, 0.5, o);
        benchmark::DoNotOptimize(s.w(1.0));
    }
}
BENCHMARK(BM_LaplaceTable)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
