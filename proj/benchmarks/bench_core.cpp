#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "todalab/join_maps.hpp"
#include "todalab/measures.hpp"
#include "todalab/quantization.hpp"
#include "todalab/spectral.hpp"
#include "todalab/transport.hpp"

using namespace todalab;

namespace {

GridField bump(const FlatTorus& t, double lambda) {
  const Point c{0.5, 0.5};
  return GridField::from_function(t, [&](Point x) {
    const double d = distance(t, x, c);
    return -2.0 * std::log1p(lambda * lambda * d * d);
  });
}

void BM_Laplacian(benchmark::State& st) {
  const FlatTorus t(static_cast<std::size_t>(st.range(0)));
  const GridField f = bump(t, 20);
  for (auto _ : st) benchmark::DoNotOptimize(laplacian(f));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(t.size()));
}
BENCHMARK(BM_Laplacian)->Arg(64)->Arg(256)->Arg(1024);

void BM_SolveTransport(benchmark::State& st) {
  const auto m = static_cast<std::size_t>(st.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> a(m), b(m), c(m * m);
  for (auto& x : a) x = u(rng);
  for (auto& x : b) x = u(rng);
  for (auto& x : c) x = u(rng);
  for (auto _ : st) benchmark::DoNotOptimize(solve_transport(a, b, c));
}
BENCHMARK(BM_SolveTransport)->Arg(16)->Arg(64)->Arg(256);

void BM_LocalLambda(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(local_lambda(1.5, 0.25));
}
BENCHMARK(BM_LocalLambda);

void BM_DistanceToBarycenters(benchmark::State& st) {
  const FlatTorus t(static_cast<std::size_t>(st.range(0)));
  const DiscreteMeasure mu = normalize_exp(GridField(t, 1.0), bump(t, 10));
  for (auto _ : st) benchmark::DoNotOptimize(distance_to_barycenters(mu, 2));
}
BENCHMARK(BM_DistanceToBarycenters)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_EnergyCurve(benchmark::State& st) {
  const FlatTorus t(256);
  const CurveSystem cs(t, 0.25, 0.75);
  const BarycenterMeasure s1({{1.0, t.snap({0.3, 0.25})}}, 1), s2({{1.0, t.snap({0.6, 0.75})}}, 1);
  const JoinElement z(t, cs, s1, s2, 0.5);
  const GridField w(t, 1.0);
  const std::vector<double> lambdas{10, 31.6227766, 100, 316.227766, 1000};
  const RhoPair rho(5 * std::numbers::pi, 5 * std::numbers::pi);
  for (auto _ : st) benchmark::DoNotOptimize(energy_curve(t, z, rho, lambdas, w, w, false, 1));
}
BENCHMARK(BM_EnergyCurve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
