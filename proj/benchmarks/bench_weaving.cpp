#include "gweave/genlab.hpp"
#include "gweave/perturb.hpp"
#include "gweave/weaving.hpp"

#include <benchmark/benchmark.h>

using namespace gweave;

namespace {

GFrameFamily family(std::size_t n, std::size_t blocks, std::size_t members) {
  GenSpec s;
  s.kind = GenKind::Perturbed;
  s.ambient_dim = n;
  s.block_dims.assign(blocks, 1);
  s.noise_scale = 0.1;
  s.members = members;
  s.seed = 11;
  s.complex = true;
  return std::get<GFrameFamily>(generate(s));
}

void BM_CertifyExhaustive(benchmark::State& state) {
  const auto fam = family(3, static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(certify_woven(fam));
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << state.range(0)));
}
BENCHMARK(BM_CertifyExhaustive)->DenseRange(4, 12, 4);

void BM_CertifySampled(benchmark::State& state) {
  const auto fam = family(4, 20, 3);
  SearchOptions opt;
  opt.mode = SearchMode::Sampled;
  opt.budget = static_cast<std::uint64_t>(state.range(0));
  opt.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(certify_woven(fam, opt));
}
BENCHMARK(BM_CertifySampled)->Arg(100)->Arg(1000);

void BM_MinimalK(benchmark::State& state) {
  const auto fam = family(3, 4, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(minimal_k(fam));
}
BENCHMARK(BM_MinimalK)->Arg(2)->Arg(3);

}  // namespace
BENCHMARK_MAIN();
