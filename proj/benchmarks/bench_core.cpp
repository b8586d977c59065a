#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "chebgsee/chebyshev.hpp"
#include "chebgsee/dmrg.hpp"
#include "chebgsee/filter.hpp"
#include "chebgsee/gsee.hpp"
#include "chebgsee/hamiltonians.hpp"
#include "chebgsee/oracle.hpp"

using namespace chebgsee;

static void BM_ChebStep(benchmark::State& state) {
  const auto H = tfim_1d(static_cast<std::size_t>(state.range(0)), 1.0, 1.0);
  const std::size_t chi = static_cast<std::size_t>(state.range(1));
  DmrgConfig dc;
  dc.chi_init = chi;
  dc.sweeps = 2;
  const Mps t0 = dmrg_ground(H, dc).state;
  ChebRunConfig cfg;
  cfg.chi_mps = chi;
  const Mps t1 = cheb_first_step(H.mpo, t0, cfg).first;
  for (auto _ : state) {
    auto r = cheb_step(H.mpo, t1, t0, cfg);
    benchmark::DoNotOptimize(r.first);
  }
}
BENCHMARK(BM_ChebStep)->Args({32, 8})->Args({32, 16})->Args({32, 32})->Args({100, 16})->Unit(benchmark::kMillisecond);

static void BM_FilterBuild(benchmark::State& state) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  FilterBuilder fb(d);
  const double kappa = erfc_kappa(1.0 / static_cast<double>(d), 0.1);
  std::vector<double> out;
  for (auto _ : state) {
    fb.build(0.1, kappa, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_FilterBuild)->Arg(400)->Arg(2000)->Arg(10000);

static void BM_CumulativeScan(benchmark::State& state) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  std::vector<double> mu(d + 1);
  for (std::size_t k = 0; k <= d; ++k) mu[k] = std::cos(static_cast<double>(k) * 2.3);
  for (auto _ : state) {
    auto r = estimate_energy(mu, 1.0, 1.0 / static_cast<double>(d), d);
    benchmark::DoNotOptimize(r.lo);
  }
}
BENCHMARK(BM_CumulativeScan)->Arg(400)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_DenseMatvec(benchmark::State& state) {
  const auto H = tfim_1d(static_cast<std::size_t>(state.range(0)), 1.0, 1.0);
  const DenseSystem sys(H, 20);
  DenseVector x = DenseVector::Ones(static_cast<Eigen::Index>(sys.dim())).normalized();
  DenseVector y(x.size());
  for (auto _ : state) {
    sys.apply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_DenseMatvec)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
