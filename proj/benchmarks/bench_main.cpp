#include <benchmark/benchmark.h>

#include <random>

#include "rankforge/history.hpp"
#include "rankforge/influence.hpp"
#include "rankforge/rival.hpp"
#include "rankforge/scenario.hpp"
#include "rankforge/synthetic.hpp"

using namespace rankforge;

namespace {

struct Fixture {
  RankingSystemSpec spec = default_spec();
  HistoryTable table = generate_synthetic(SyntheticConfig::with_random_forms(spec, 50, 5, 42));
  EnsembleModel model = fit(table.rows, spec, {100, 1e-3, 1});
  RankeeRecord baseline = *table.latest("R001");
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

std::vector<AttributeRange> ranges_of(int per_axis) {
  const auto& spec = fixture().spec;
  std::vector<AttributeRange> out;
  for (const char* id : {"students", "faculty", "citations", "intl_students"}) {
    const auto& a = spec.attribute(id);
    AttributeRange r{id, {}};
    for (int k = 0; k < per_axis; ++k) {
      r.values.push_back(a.domain_min + (a.domain_max - a.domain_min) * (k + 1) / (per_axis + 1));
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

static void BM_Fit(benchmark::State& state) {
  const auto& f = fixture();
  const FitConfig config{static_cast<std::size_t>(state.range(0)), 1e-3, 1};
  for (auto _ : state) benchmark::DoNotOptimize(fit(f.table.rows, f.spec, config));
}
BENCHMARK(BM_Fit)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_GenerateScenarios(benchmark::State& state) {
  const auto& f = fixture();
  const auto ranges = ranges_of(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(generate_scenarios(ranges, f.baseline, f.model));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scenario_product(ranges)));
}
BENCHMARK(BM_GenerateScenarios)->Arg(4)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_WinProbability(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(50, 10);
  std::vector<double> a(static_cast<std::size_t>(state.range(0))), b(a.size());
  for (auto& v : a) v = n(rng);
  for (auto& v : b) v = n(rng);
  const EnsemblePrediction ea("f", a), eb("f", b);
  for (auto _ : state) benchmark::DoNotOptimize(win_probability(ea, eb));
}
BENCHMARK(BM_WinProbability)->Arg(100)->Arg(1000);

static void BM_InfluenceMatrix(benchmark::State& state) {
  const auto& f = fixture();
  const auto scenarios = generate_scenarios(ranges_of(2), f.baseline, f.model);
  const auto policy = DeltaPolicy::from_history(f.table.rows, f.spec);
  for (auto _ : state) benchmark::DoNotOptimize(build_matrix(f.model, scenarios, policy));
}
BENCHMARK(BM_InfluenceMatrix)->Unit(benchmark::kMicrosecond);

static void BM_Heatmap(benchmark::State& state) {
  const auto& f = fixture();
  std::map<std::string, std::vector<RankeeRecord>, std::less<>> histories;
  for (const auto& id : f.table.rankee_ids()) {
    if (histories.size() == 10) break;
    if (id != "R001") histories[id] = f.table.rankee_history(id);
  }
  const auto scenario = generate_scenarios(ranges_of(1), f.baseline, f.model).front();
  const auto methods = default_rival_methods(100, 1);
  for (auto _ : state) {
    const auto book = RivalBook::build(histories, methods, f.model);
    benchmark::DoNotOptimize(heatmap(scenario, book, f.spec));
  }
}
BENCHMARK(BM_Heatmap)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
