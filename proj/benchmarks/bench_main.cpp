#include <benchmark/benchmark.h>

#include "microdim/dims.hpp"
#include "microdim/dyadic.hpp"
#include "microdim/families.hpp"
#include "microdim/percolation.hpp"
#include "microdim/realize.hpp"
#include "microdim/seq.hpp"

using namespace microdim;

namespace {

void BM_KxSet(benchmark::State& state) {
  const Word x = beatty_balanced(Rational(1, 3)).prefix(static_cast<std::uint64_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kx_set(x));
}
BENCHMARK(BM_KxSet)->Arg(64)->Arg(1024)->Arg(16384);

void BM_CoveringCounts(benchmark::State& state) {
  const DyadicSet a = kx_set(beatty_balanced(Rational(2, 5)).prefix(static_cast<std::uint64_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(covering_counts(a));
}
BENCHMARK(BM_CoveringCounts)->Arg(256)->Arg(4096);

void BM_HausdorffSup(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  const DyadicSet a = kx_set(beatty_balanced(Rational(1, 3)).prefix(n));
  const DyadicSet b = kx_set(beatty_balanced(Rational(1, 2)).prefix(n));
  for (auto _ : state) benchmark::DoNotOptimize(hausdorff_sup_exact(a, b));
}
BENCHMARK(BM_HausdorffSup)->Arg(16)->Arg(24);

void BM_HausdorffEuclidean2d(benchmark::State& state) {
  const DyadicSet a = product(kx_set(Word::parse("10110101")), kx_set(Word::parse("01101011")));
  const DyadicSet b = product(kx_set(Word::parse("11010110")), kx_set(Word::parse("10101101")));
  for (auto _ : state) benchmark::DoNotOptimize(hausdorff_distance(a, b, Metric::euclidean, 1e-6));
}
BENCHMARK(BM_HausdorffEuclidean2d);

void BM_ChooseK(benchmark::State& state) {
  const BlockTarget t(Rational(3, 10), Rational(7, 10), Rational(11, 20));
  const auto n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(choose_k(n, t, KRule::minimal));
    benchmark::DoNotOptimize(choose_k(n, t, KRule::nearest));
  }
}
BENCHMARK(BM_ChooseK)->Arg(16)->Arg(1000)->Arg(100000);

void BM_PsiPrefix(benchmark::State& state) {
  const auto spec = TargetSpec::parse("interval:3/10,7/10");
  const Word x = beatty_balanced(Rational(1, 2)).prefix(static_cast<std::uint64_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_psi_prefix(x, spec, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_PsiPrefix)->Arg(50)->Arg(200);

void BM_PercolationSample(benchmark::State& state) {
  const auto schedule = RetentionSchedule::constant(Rational(1, 2));
  const PercField field(1);
  std::uint32_t key = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample(schedule, field, key++, static_cast<int>(state.range(0)), 1));
}
BENCHMARK(BM_PercolationSample)->Arg(12)->Arg(24);

void BM_HawkesTrials(benchmark::State& state) {
  const DyadicSet k = DyadicSet::full(1, 16);
  const PercField field(2);
  for (auto _ : state) benchmark::DoNotOptimize(hawkes_experiment(k, Rational(1, 2), {16}, 1000, field, 0, 1));
}
BENCHMARK(BM_HawkesTrials)->Unit(benchmark::kMillisecond);

void BM_LevelSchedule(benchmark::State& state) {
  const auto view = grid_view(1, 4096, PointMetric::euclidean);
  for (auto _ : state) benchmark::DoNotOptimize(level_schedule(view, {Rational(1)}, FamilyVariant::box));
}
BENCHMARK(BM_LevelSchedule)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
