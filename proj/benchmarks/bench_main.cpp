#include <benchmark/benchmark.h>

#include "innodiff/influence.hpp"
#include "innodiff/population.hpp"
#include "innodiff/rng.hpp"
#include "innodiff/scenario.hpp"
#include "innodiff/socialnet.hpp"

using namespace innodiff;

namespace {

CoherenceNetwork random_network(Rng& rng, int needs, int actions) {
  DenseMatrix fac(needs, actions);
  for (int g = 0; g < needs; ++g) {
    for (int a = 0; a < actions; ++a) fac(g, a) = rng.uniform(-0.3, 0.3);
  }
  std::vector<double> pri(needs), nval(needs), aval(actions);
  for (auto& x : pri) x = rng.uniform(0.0, 0.5);
  for (auto& x : nval) x = rng.uniform(-0.2, 0.2);
  for (auto& x : aval) x = rng.uniform(-0.3, 0.3);
  return CoherenceNetwork::build(fac, pri, nval, aval);
}

ProfileSet bench_profiles(int n) {
  ProfileSet p;
  p.population_size = n;
  p.need_labels = default_need_labels();
  p.action_labels = default_action_labels();
  const double shares[] = {0.15, 0.16, 0.34, 0.35};
  for (int t = 1; t <= kMobilityTypes; ++t) {
    TypeProfile tp;
    tp.type_id = t;
    tp.share = shares[t - 1];
    tp.target_initial_shares = {0.2, 0.2, 0.2, 0.2, 0.2};
    tp.mu_mean = {0.5, 0.6, 0.7};
    tp.mu_sd = {0.2, 0.2, 0.2};
    tp.facilitation.assign(40, {0.05, 0.04});
    tp.priorities.assign(8, {0.3, 0.2});
    tp.need_valences.assign(8, {0.1, 0.1});
    tp.action_valences.assign(5, {0.0, 0.2});
    p.types.push_back(std::move(tp));
  }
  return p;
}

void BM_Settle(benchmark::State& state) {
  Rng rng(1);
  auto net = random_network(rng, 8, 5);
  for (auto _ : state) {
    net.reset_state();
    benchmark::DoNotOptimize(net.settle());
  }
}
BENCHMARK(BM_Settle);

void BM_Exchange(benchmark::State& state) {
  const auto pop = generate_population(4, bench_profiles(4), 3);
  const auto tables = InfluenceTables::defaults();
  for (auto _ : state) {
    Agent a = pop.agents[0], b = pop.agents[1];
    benchmark::DoNotOptimize(exchange(a, b, tables, {}, {}));
  }
}
BENCHMARK(BM_Exchange);

void BM_BuildGraph(benchmark::State& state) {
  const auto pop = generate_population(static_cast<int>(state.range(0)),
                                       bench_profiles(static_cast<int>(state.range(0))), 4);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(build_graph(pop, ++seed));
}
BENCHMARK(BM_BuildGraph)->Arg(100)->Arg(675);

void BM_ReplicateStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto pop = generate_population(n, bench_profiles(n), 5);
  const auto graph = build_graph(pop, 6);
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::Reference;
  cfg.steps = 1;
  cfg.replicates = 1;
  cfg.population.file = "in-memory";
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_replicate(pop, graph, cfg, 0, ++seed));
}
BENCHMARK(BM_ReplicateStep)->Arg(100)->Arg(675)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
