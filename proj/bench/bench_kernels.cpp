#include <benchmark/benchmark.h>

#include "ssms/datagen.hpp"
#include "ssms/metrics.hpp"
#include "ssms/rng.hpp"
#include "ssms/sampler.hpp"
#include "ssms/spaces.hpp"

namespace {

using namespace ssms;

const StarModels& star_models() {
  static StarModels models = generate_star_models(star_row_spec(2));
  return models;
}

ChainConfig bench_chains(int n_chains) {
  ChainConfig cfg;
  cfg.n_chains = n_chains;
  cfg.n_samples = 500;
  cfg.burn_in = 100;
  cfg.thin_to = 200 * n_chains;
  cfg.seed = 5;
  return cfg;
}

void BM_EnsembleParallel(benchmark::State& state) {
  const StarModels& m = star_models();
  LikelihoodConfig lik{0.003, LikelihoodMode::Intersection};
  ChainConfig cfg = bench_chains(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    ChainResult res =
        run_ensemble(m.m1, m.m2, lik, cfg, ProposalSpec::defaults());
    benchmark::DoNotOptimize(res.retained.data());
  }
}
BENCHMARK(BM_EnsembleParallel)->Arg(2)->Arg(8)->Arg(16)->UseRealTime();

void BM_EnsembleSerial(benchmark::State& state) {
  const StarModels& m = star_models();
  LikelihoodConfig lik{0.003, LikelihoodMode::Intersection};
  ChainConfig cfg = bench_chains(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    ChainResult res =
        reference::run_ensemble(m.m1, m.m2, lik, cfg, ProposalSpec::defaults());
    benchmark::DoNotOptimize(res.retained.data());
  }
}
BENCHMARK(BM_EnsembleSerial)->Arg(2)->Arg(8)->Arg(16)->UseRealTime();

struct HighDimFixture {
  ShapeModel model;
  std::vector<Coefficients> alphas;
  std::vector<Shape> shapes;
};

const HighDimFixture& highdim() {
  static HighDimFixture f = [] {
    SplitSpec spec;
    spec.seed = 9;
    HighDimFixture out;
    out.model = generate_split_models(spec).m1;
    Rng rng(123);
    out.alphas.assign(2000, Coefficients(out.model.q()));
    for (Coefficients& a : out.alphas)
      for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = rng.normal();
    out.shapes = synthesize_all(out.model, out.alphas);
    return out;
  }();
  return f;
}

void BM_SynthesizeParallel(benchmark::State& state) {
  const HighDimFixture& f = highdim();
  for (auto _ : state) {
    std::vector<Shape> shapes = synthesize_all(f.model, f.alphas);
    benchmark::DoNotOptimize(shapes.data());
  }
}
BENCHMARK(BM_SynthesizeParallel)->UseRealTime();

void BM_SynthesizeSerial(benchmark::State& state) {
  const HighDimFixture& f = highdim();
  for (auto _ : state) {
    std::vector<Shape> shapes = reference::synthesize_all(f.model, f.alphas);
    benchmark::DoNotOptimize(shapes.data());
  }
}
BENCHMARK(BM_SynthesizeSerial)->UseRealTime();

void BM_ReconErrorParallel(benchmark::State& state) {
  const HighDimFixture& f = highdim();
  for (auto _ : state) {
    ReconError err = reconstruction_error(f.shapes, f.model);
    benchmark::DoNotOptimize(err.mean);
  }
}
BENCHMARK(BM_ReconErrorParallel)->UseRealTime();

void BM_ReconErrorSerial(benchmark::State& state) {
  const HighDimFixture& f = highdim();
  for (auto _ : state) {
    ReconError err = reference::reconstruction_error(f.shapes, f.model);
    benchmark::DoNotOptimize(err.mean);
  }
}
BENCHMARK(BM_ReconErrorSerial)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
