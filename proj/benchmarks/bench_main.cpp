#include "landsel/bbob.hpp"
#include "landsel/common.hpp"
#include "landsel/ela.hpp"
#include "landsel/forest.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <span>
#include <vector>

using namespace landsel;

namespace {

void BM_Evaluate(benchmark::State& state) {
    const auto inst = bbob::make_instance(static_cast<int>(state.range(0)), 1, 5);
    std::vector<double> x{0.1, -1.2, 3.3, 0.0, -4.1};
    for (auto _ : state) {
        x[0] += 1e-9;
        benchmark::DoNotOptimize(bbob::evaluate(inst, std::span<const double>(x)));
    }
}
BENCHMARK(BM_Evaluate)->Arg(1)->Arg(10)->Arg(16)->Arg(24);

// One feature replicate: sampling plus all 56 features.
void BM_FeatureReplicate(benchmark::State& state) {
    const auto inst = bbob::make_instance(3, 1, 5);
    const int n = static_cast<int>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        const auto s = ela::uniform_sample(inst, n, ++seed);
        benchmark::DoNotOptimize(ela::all_features(s));
    }
}
BENCHMARK(BM_FeatureReplicate)->Arg(250)->Arg(2000)->Unit(benchmark::kMillisecond);

// Training-set shape of one cross-validation fold: 96 rows x 56 features.
void BM_Fit(benchmark::State& state) {
    Rng rng(7);
    const int n = 96;
    Eigen::MatrixXd x(n, ela::kFeatureCount);
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.uniform(-1.0, 1.0);
        y[i] = rng.uniform(-8.0, 4.0);  // log10 precision
    }
    const auto configs = forest::enumerate_configs(1);
    const auto& cfg = configs[static_cast<std::size_t>(state.range(0))];
    state.SetLabel(cfg.id());
    for (auto _ : state) benchmark::DoNotOptimize(forest::fit(cfg, x, y));
}
// Two single trees, a forest and a bagged ensemble.
BENCHMARK(BM_Fit)->Arg(0)->Arg(1)->Arg(6)->Arg(18)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
