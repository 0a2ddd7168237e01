#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <random>

#include "pmlbie/cli.hpp"

using namespace pmlbie;

namespace {

struct Fixture {
  solve::ProblemSpec spec;
  std::unique_ptr<operators::Discretization> disc;
  std::unique_ptr<operators::OperatorSet> ops;
  CVector phi;
};

// Kite at k = pi, block storage; one shared fixture per N.
Fixture& fixture(int n) {
  static std::map<int, std::unique_ptr<Fixture>> cache;
  auto& f = cache[n];
  if (!f) {
    f = std::make_unique<Fixture>();
    const cli::RunConfig c = cli::parse_config({{"scene", "kite2d"}, {"bc", "dirichlet"}});
    f->spec = cli::make_problem(c, n, c.t_over_lambda);
    f->disc = std::make_unique<operators::Discretization>(*f->spec.scene, f->spec.disc);
    f->ops = std::make_unique<operators::OperatorSet>(*f->disc, f->spec.k,
                                                      std::vector<operators::Op>{operators::Op::single},
                                                      operators::Storage::blocks);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    f->phi.resize(f->disc->size());
    for (auto& v : f->phi) v = cd(g(rng), g(rng));
  }
  return *f;
}

void BM_apply(benchmark::State& state) {
  Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(f.ops->apply(operators::Op::single, f.phi));
  state.counters["dof"] = f.disc->size();
}

void BM_apply_serial(benchmark::State& state) {
  Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(f.ops->apply_serial(operators::Op::single, f.phi));
  state.counters["dof"] = f.disc->size();
}

void BM_precompute(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        operators::OperatorSet(*f.disc, f.spec.k, {operators::Op::single}, operators::Storage::blocks));
}

}  // namespace

BENCHMARK(BM_apply)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_apply_serial)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_precompute)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
