#include <benchmark/benchmark.h>

#include <random>

#include "csetlab/adversary.hpp"
#include "csetlab/executor.hpp"
#include "csetlab/protocols.hpp"

using namespace csetlab;

namespace {

ConsistentSet seeded_set(const Selector& selector, int size, UidAllocator& uids) {
  std::vector<Item> items;
  for (int i = 0; i < size; ++i) items.push_back(initial_item(i, uids));
  return ConsistentSet(selector, std::move(items));
}

void BM_CheckRegisterConsensus(benchmark::State& state) {
  const int initial = static_cast<int>(state.range(0));
  for (auto _ : state) {
    UidAllocator uids;
    ProtocolProgram program = consensus2_registers(
        5, 7, seeded_set(Selector::fifo_queue(), initial, uids), uids);
    auto verdicts = check_all_interleavings(
        program, {PropertyId::Agreement, PropertyId::Validity, PropertyId::WaitFreedom});
    benchmark::DoNotOptimize(verdicts);
  }
}
BENCHMARK(BM_CheckRegisterConsensus)->Arg(0)->Arg(2)->Arg(4);

void BM_CheckTournament(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    UidAllocator uids;
    ProtocolProgram program =
        tournament_tas(n, TournamentBuilder::TwoObjects, Selector::fifo_queue(), uids);
    auto verdicts = check_all_interleavings(program, {PropertyId::WinnerUniqueness});
    benchmark::DoNotOptimize(verdicts);
  }
}
BENCHMARK(BM_CheckTournament)->Arg(2)->Arg(3);

void BM_InterleaveRandomPairs(benchmark::State& state) {
  std::mt19937_64 rng(1);
  TraceGenConfig config;
  config.max_len = static_cast<int>(state.range(0));
  Selector selector = Selector::priority_queue();
  for (auto _ : state) {
    UidAllocator uids;
    SoloTrace e0 = random_trace(selector, uids, rng, config);
    SoloTrace e1 = random_trace(selector, uids, rng, config);
    auto result = interleave_single_set(e0, e1);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_InterleaveRandomPairs)->Arg(6)->Arg(10);

void BM_ValidateSelector(benchmark::State& state) {
  UidAllocator uids;
  std::vector<Item> universe;
  for (int i = 0; i < 6; ++i) universe.push_back(initial_item(i, uids));
  Selector selector = Selector::priority_queue();
  for (auto _ : state) {
    auto verdict = validate_selector(selector, universe, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(verdict);
  }
}
BENCHMARK(BM_ValidateSelector)->Arg(4)->Arg(6);

}  // namespace

BENCHMARK_MAIN();
