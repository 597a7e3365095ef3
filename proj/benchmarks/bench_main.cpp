#include <benchmark/benchmark.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "petacat/mixture.hpp"
#include "petacat/neighbors.hpp"
#include "petacat/paircount.hpp"
#include "petacat/random.hpp"
#include "petacat/scan.hpp"
#include "petacat/skygen.hpp"
#include "petacat/store.hpp"

using namespace petacat;

namespace {

std::vector<UnitVec> uniform(std::size_t n, std::uint64_t seed) {
  Rng r(seed);
  std::vector<UnitVec> out(n);
  for (auto& v : out) v = to_unit(r.uniform(0, 360), std::asin(r.uniform(-1, 1)) * 180 / std::numbers::pi);
  return out;
}

const std::string& bench_store() {
  static const std::string dir = [] {
    const auto p = std::filesystem::temp_directory_path() / "petacat_bench_store";
    skygen::SurveyConfig c;
    c.n_objects = 10000;
    c.passes = 25;
    ingest_detections(skygen::generate_survey(c).detections, 16, p.string());
    return p.string();
  }();
  return dir;
}

void BM_Scan(benchmark::State& state) {
  const Store store(bench_store());
  ScanOptions opt;
  opt.collect = false;
  opt.predicate = Predicate::parse("flux > 500");
  opt.workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(scan(store, opt).stats.records_matched);
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * store.manifest().data_bytes()));
}
BENCHMARK(BM_Scan)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime();

void BM_PairCount(benchmark::State& state) {
  const auto pts = uniform(static_cast<std::size_t>(state.range(0)), 1);
  const AngularBins bins = log_bins(0.01 * std::numbers::pi / 180, 5 * std::numbers::pi / 180, 10);
  const auto mode = state.range(1) ? PairCountMode::kDualTree : PairCountMode::kNaive;
  std::uint64_t evals = 0;
  for (auto _ : state) evals = pair_count(pts, bins, mode).distance_evaluations;
  state.counters["evaluations"] = static_cast<double>(evals);
}
BENCHMARK(BM_PairCount)->Args({2000, 0})->Args({2000, 1})->Args({10000, 0})->Args({10000, 1})->Args({40000, 1});

void BM_Neighbors(benchmark::State& state) {
  const auto pts = uniform(static_cast<std::size_t>(state.range(0)), 2);
  std::vector<std::uint64_t> ids(pts.size());
  std::vector<SkyPos> pos(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ids[i] = i + 1;
    pos[i] = to_sky(pts[i]);
  }
  for (auto _ : state) benchmark::DoNotOptimize(neighbors_join(ids, pos, 60.0).pairs.size());
}
BENCHMARK(BM_Neighbors)->Arg(10000)->Arg(100000);

void BM_Em(benchmark::State& state) {
  Rng r(3);
  const Eigen::Index n = state.range(0);
  PointMatrix x(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double cx = static_cast<double>(i % 3) * 10.0;
    x(i, 0) = cx + r.normal();
    x(i, 1) = -cx + r.normal();
  }
  EmOptions opt;
  opt.k = 3;
  opt.max_iter = 20;
  opt.mode = state.range(1) ? EmMode::kKd : EmMode::kExact;
  for (auto _ : state) benchmark::DoNotOptimize(em_fit(x, opt).model.log_likelihood.back());
}
BENCHMARK(BM_Em)->Args({20000, 0})->Args({20000, 1})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
