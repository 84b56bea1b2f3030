#include <random>

#include "csetlab/adversary.hpp"
#include "csetlab/errors.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace csetlab;

namespace {

SoloTrace queue_trace_insert_abc(UidAllocator& uids) {
  TraceBuilder builder(Selector::fifo_queue());
  for (std::int64_t p : {1, 2, 3}) builder.insert(value_item(p, 0, uids));
  return builder.take();
}

// The barrier fixture: one process stocks low priorities before a removal,
// the other works at strictly higher priorities, so every early prefix of the
// first is invisible to the second.
std::pair<SoloTrace, SoloTrace> priority_barrier_fixture(UidAllocator& uids) {
  TraceBuilder low(Selector::priority_queue());
  low.insert(value_item(1, 0, uids))
      .insert(value_item(1, 0, uids))
      .insert(value_item(2, 0, uids))
      .remove()  // the priority-2 item
      .insert(value_item(5, 0, uids));
  TraceBuilder high(Selector::priority_queue());
  high.insert(value_item(2, 0, uids)).insert(value_item(3, 0, uids)).remove();  // priority 3
  return {low.take(), high.take()};
}

}  // namespace

TEST_SUITE_BEGIN("adversary");

TEST_CASE("mute prefixes") {
  UidAllocator uids;
  TraceBuilder builder(Selector::fifo_queue());
  builder.insert(value_item(1, 0, uids)).remove();
  SoloTrace trace = builder.take();
  CHECK(is_mute_prefix(trace, 0));
  CHECK(is_mute_prefix(trace, 2));
  CHECK_FALSE(is_mute_prefix(trace, 1));

  UidAllocator more;
  TraceBuilder longer(Selector::fifo_queue());
  longer.insert(value_item(1, 0, more)).insert(value_item(2, 0, more)).remove();
  CHECK_FALSE(is_mute_prefix(longer.take(), 3));
}

TEST_CASE("removal candidates and the drain-last item") {
  UidAllocator uids;

  SUBCASE("queue drains in insertion order") {
    TraceBuilder builder(Selector::fifo_queue());
    Item a = value_item(1, 0, uids), b = value_item(2, 0, uids), c = value_item(3, 0, uids);
    builder.insert(a).insert(b).insert(c).remove().remove().remove();
    auto g = drain_last(builder.take());
    REQUIRE(g);
    CHECK(g->uid == c.uid);
  }
  SUBCASE("stack drains newest-first") {
    TraceBuilder builder(Selector::lifo_stack());
    Item a = value_item(1, 0, uids), b = value_item(2, 0, uids), c = value_item(3, 0, uids);
    builder.insert(a).insert(b).insert(c).remove().remove().remove();
    auto g = drain_last(builder.take());
    REQUIRE(g);
    CHECK(g->uid == a.uid);
  }
  SUBCASE("the candidate after a stack prefix is the top") {
    TraceBuilder builder(Selector::lifo_stack());
    Item a = value_item(1, 0, uids), b = value_item(2, 0, uids);
    builder.insert(a).insert(b);
    auto f = removal_candidate_after(builder.take(), 2);
    REQUIRE(f);
    CHECK(f->uid == b.uid);
  }
  SUBCASE("no inserted-and-removed items means no drain-last") {
    CHECK_FALSE(drain_last(queue_trace_insert_abc(uids)));
    TraceBuilder empty_remove(Selector::fifo_queue());
    empty_remove.remove();
    CHECK_FALSE(drain_last(empty_remove.take()));
  }
}

TEST_CASE("barrier analysis per selector") {
  UidAllocator uids;

  SUBCASE("queues never have barriers") {
    TraceBuilder a(Selector::fifo_queue());
    a.insert(value_item(1, 0, uids)).insert(value_item(2, 0, uids)).remove();
    TraceBuilder b(Selector::fifo_queue());
    b.insert(value_item(3, 0, uids)).remove();
    CHECK(find_barriers(a.take(), b.take()).barriers.empty());
  }
  SUBCASE("stacks are barriers at every position") {
    TraceBuilder a(Selector::lifo_stack());
    a.insert(value_item(1, 0, uids)).insert(value_item(2, 0, uids)).remove();
    TraceBuilder b(Selector::lifo_stack());
    b.insert(value_item(3, 0, uids)).remove();
    auto analysis = find_barriers(a.take(), b.take());
    CHECK(analysis.barriers == std::vector<std::size_t>{1, 2, 3});
  }
  SUBCASE("a removal-free other trace is vacuously barrier-free") {
    TraceBuilder a(Selector::fifo_queue());
    a.insert(value_item(1, 0, uids)).remove();
    auto analysis = find_barriers(a.take(), queue_trace_insert_abc(uids));
    CHECK_FALSE(analysis.other_drain_last);
    CHECK(analysis.barriers.empty());
  }
  SUBCASE("the low-priority prefix of the fixture is a barrier") {
    auto [low, high] = priority_barrier_fixture(uids);
    auto analysis = find_barriers(low, high);
    CHECK(analysis.barriers == std::vector<std::size_t>{1, 2, 3, 4});
  }
}

TEST_CASE("trim drops exactly the removes fed by the prefix") {
  UidAllocator uids;

  SUBCASE("no removes, nothing to drop") {
    SoloTrace trace = queue_trace_insert_abc(uids);
    auto result = trim(trace, 2);
    CHECK(result.trace.size() == trace.size());
    CHECK(result.registry.empty());
  }
  SUBCASE("boundary after the first insert drops only that item's removal") {
    Item a = value_item(1, 0, uids), b = value_item(2, 0, uids);
    TraceBuilder builder(Selector::fifo_queue());
    builder.insert(a).insert(b).remove().remove();
    auto result = trim(builder.take(), 1);
    REQUIRE(result.registry.size() == 1);
    CHECK(result.registry[0].original_index == 2);
    CHECK(result.registry[0].response.uid == a.uid);
    CHECK(result.trace.size() == 3);
  }
  SUBCASE("boundary zero keeps everything") {
    Item a = value_item(1, 0, uids);
    TraceBuilder builder(Selector::fifo_queue());
    builder.insert(a).remove();
    auto result = trim(builder.take(), 0);
    CHECK(result.trace.size() == 2);
    CHECK(result.registry.empty());
  }
}

TEST_CASE("a trimmed suffix replays from empty with its solo responses") {
  std::mt19937_64 rng(23);
  TraceGenConfig config;
  config.max_len = 8;
  for (const std::string& name : Selector::consistent_builtin_names()) {
    Selector selector = *Selector::by_name(name);
    for (int round = 0; round < 80; ++round) {
      UidAllocator uids;
      SoloTrace trace = random_trace(selector, uids, rng, config);
      std::uniform_int_distribution<std::size_t> boundary_dist(0, trace.size());
      auto result = trim_after_prefix(trace, boundary_dist(rng));
      std::string why;
      CAPTURE(name);
      CHECK_MESSAGE(replays_clean(result.trace, &why), why);
    }
  }
}

TEST_CASE("interleaving base cases") {
  UidAllocator uids;
  SoloTrace empty{Selector::fifo_queue(), {}};
  SoloTrace work = queue_trace_insert_abc(uids);

  auto result = interleave_single_set(empty, work);
  CHECK(result.schedule == Schedule(3, 1));
  CHECK(result.top_case == InterleaveCase::Base);

  auto both = interleave_single_set(empty, SoloTrace{Selector::fifo_queue(), {}});
  CHECK(both.schedule.empty());
}

TEST_CASE("identical insert-remove traces take the mute case") {
  UidAllocator uids;
  TraceBuilder a(Selector::fifo_queue());
  a.insert(value_item(1, 0, uids)).remove();
  TraceBuilder b(Selector::fifo_queue());
  b.insert(value_item(2, 0, uids)).remove();
  auto result = interleave_single_set(a.take(), b.take());
  CHECK(result.top_case == InterleaveCase::Mute);
  CHECK(result.schedule.size() == 4);
}

TEST_CASE("the priority fixture takes the barrier case and verifies") {
  UidAllocator uids;
  auto [low, high] = priority_barrier_fixture(uids);
  auto result = interleave_single_set(low, high);
  CHECK(result.top_case == InterleaveCase::Barrier);
  CHECK(verify_indistinguishable(result.schedule, low, high).pass);
}

TEST_CASE("verification accepts matching and rejects swapped removes") {
  UidAllocator uids;
  Item a0 = value_item(1, 0, uids), a1 = value_item(2, 0, uids);
  TraceBuilder t0(Selector::fifo_queue());
  t0.insert(a0).remove();
  TraceBuilder t1(Selector::fifo_queue());
  t1.insert(a1).remove();
  SoloTrace e0 = t0.take(), e1 = t1.take();

  CHECK(verify_indistinguishable(Schedule{0, 1, 0, 1}, e0, e1).pass);
  CHECK_FALSE(verify_indistinguishable(Schedule{0, 1, 1, 0}, e0, e1).pass);
  CHECK_THROWS_AS(verify_indistinguishable(Schedule{0, 0, 0, 1}, e0, e1),
                  std::invalid_argument);
  CHECK_THROWS_AS(verify_indistinguishable(Schedule{0, 1, 0, 2}, e0, e1),
                  std::invalid_argument);
}

TEST_CASE("interleaving rejects malformed inputs") {
  UidAllocator uids;
  Item shared = value_item(1, 0, uids);
  TraceBuilder t0(Selector::fifo_queue());
  t0.insert(shared);
  TraceBuilder t1(Selector::fifo_queue());
  t1.insert(shared);
  CHECK_THROWS_AS(interleave_single_set(t0.take(), t1.take()), std::invalid_argument);

  TraceBuilder q(Selector::fifo_queue());
  q.insert(value_item(1, 0, uids));
  TraceBuilder s(Selector::lifo_stack());
  s.insert(value_item(2, 0, uids));
  CHECK_THROWS_AS(interleave_single_set(q.take(), s.take()), std::invalid_argument);
}

TEST_CASE("random trace pairs interleave indistinguishably with full case coverage") {
  std::mt19937_64 rng(31);
  CaseCounts coverage;
  for (const std::string& name : Selector::consistent_builtin_names()) {
    Selector selector = *Selector::by_name(name);
    for (bool mute_free : {false, true}) {
      TraceGenConfig config;
      config.max_len = 8;
      config.forbid_mute_prefix = mute_free;
      for (int round = 0; round < 75; ++round) {
        UidAllocator uids;
        SoloTrace e0 = random_trace(selector, uids, rng, config);
        SoloTrace e1 = random_trace(selector, uids, rng, config);
        CAPTURE(name);
        CAPTURE(mute_free);
        auto result = interleave_single_set(e0, e1);
        coverage += result.cases;
        CHECK(verify_indistinguishable(result.schedule, e0, e1).pass);
      }
    }
  }
  CHECK(coverage.base > 0);
  CHECK(coverage.mute > 0);
  CHECK(coverage.barrier > 0);
  CHECK(coverage.pqr > 0);
}

TEST_CASE("process subsequences are never reordered internally") {
  std::mt19937_64 rng(37);
  TraceGenConfig config;
  config.max_len = 8;
  Selector selector = Selector::priority_queue();
  for (int round = 0; round < 40; ++round) {
    UidAllocator uids;
    SoloTrace e0 = random_trace(selector, uids, rng, config);
    SoloTrace e1 = random_trace(selector, uids, rng, config);
    auto result = interleave_single_set(e0, e1);
    std::size_t seen0 = 0, seen1 = 0;
    for (int pid : result.schedule) (pid == 0 ? seen0 : seen1) += 1;
    CHECK(seen0 == e0.size());
    CHECK(seen1 == e1.size());
  }
}

TEST_SUITE_END();
