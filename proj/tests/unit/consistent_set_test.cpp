#include <algorithm>
#include <random>

#include "csetlab/errors.hpp"
#include "csetlab/registers.hpp"
#include "csetlab/solo_trace.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace csetlab;

TEST_SUITE_BEGIN("objects");

TEST_CASE("insert appends and preserves everything else") {
  UidAllocator uids;
  ConsistentSet empty(Selector::fifo_queue());
  Item a = initial_item(1, uids), b = initial_item(2, uids), c = initial_item(3, uids);

  ConsistentSet one = empty.insert(a);
  REQUIRE(one.size() == 1);
  CHECK(one.contents()[0].uid == a.uid);

  ConsistentSet two = one.insert(b).insert(c);
  REQUIRE(two.size() == 3);
  CHECK(two.contents()[2].uid == c.uid);

  // lucky queue [W] + value
  ConsistentSet lucky = test::make_set(Selector::fifo_queue(), {9}, uids);
  Item v = value_item(4, 0, uids);
  ConsistentSet after = lucky.insert(v);
  CHECK(after.contents()[0].payload == 9);
  CHECK(after.contents()[1].uid == v.uid);
}

TEST_CASE("duplicate uid insertion violates the contract") {
  UidAllocator uids;
  Item a = initial_item(1, uids);
  ConsistentSet set = ConsistentSet(Selector::fifo_queue()).insert(a);
  CHECK_THROWS_AS(set.insert(a), contract_error);
}

TEST_CASE("remove follows the selector; empty yields null, not an error") {
  UidAllocator uids;
  ConsistentSet empty(Selector::fifo_queue());
  auto [unchanged, nothing] = empty.remove();
  CHECK_FALSE(nothing);
  CHECK(unchanged.empty());

  auto queue = test::make_set(Selector::fifo_queue(), {1, 2, 3}, uids);
  auto stack = test::make_set(Selector::lifo_stack(), {1, 2, 3}, uids);
  auto prio = test::make_set(Selector::priority_queue(), {1, 3, 2}, uids);
  CHECK(queue.remove().second->uid == queue.contents()[0].uid);
  CHECK(stack.remove().second->uid == stack.contents()[2].uid);
  CHECK(prio.remove().second->uid == prio.contents()[1].uid);
}

TEST_CASE("remove is deterministic on identical contents") {
  UidAllocator uids;
  auto set = test::make_set(Selector::priority_queue(), {2, 7, 7, 1}, uids);
  ConsistentSet copy = set;
  CHECK(test::removed_uid(set) == test::removed_uid(copy));
}

TEST_CASE("insert/remove round-trip: an inserted item drains out before null") {
  std::mt19937_64 rng(7);
  for (const std::string& name : Selector::consistent_builtin_names()) {
    Selector selector = *Selector::by_name(name);
    for (int round = 0; round < 50; ++round) {
      UidAllocator uids;
      TraceGenConfig config;
      config.max_len = 6;
      SoloTrace prefix = random_trace(selector, uids, rng, config);
      ConsistentSet state = replay_prefix(prefix, prefix.size());

      Item x = value_item(3, 0, uids);
      state = state.insert(x);
      bool seen = false;
      for (;;) {
        auto [next, removed] = state.remove();
        if (!removed) break;
        if (removed->uid == x.uid) seen = true;
        state = std::move(next);
      }
      CHECK(seen);
    }
  }
}

TEST_CASE("registers: unset reads, last write wins") {
  RegisterBank bank;
  CHECK_FALSE(bank.read("Proposed0"));
  bank = bank.write("Proposed0", 5);
  CHECK(bank.read("Proposed0") == 5);
  bank = bank.write("Proposed0", 9);
  CHECK(bank.read("Proposed0") == 9);
  CHECK_FALSE(bank.read("Proposed1"));
}

TEST_CASE("removal invariance on the documented executions") {
  UidAllocator uids;

  SUBCASE("two-element queue") {
    Item a = value_item(1, 0, uids), b = value_item(2, 0, uids);
    auto trace =
        TraceBuilder(Selector::fifo_queue()).insert(a).insert(b).remove().remove().take();
    CHECK(removal_invariance_check(trace, a).pass);
  }

  SUBCASE("stack with an interleaved third item") {
    Item a = value_item(1, 0, uids), b = value_item(2, 0, uids), c = value_item(3, 0, uids);
    auto trace = TraceBuilder(Selector::lifo_stack())
                     .insert(a)
                     .insert(b)
                     .remove()  // b
                     .insert(c)
                     .remove()  // c
                     .remove()  // a
                     .take();
    CHECK(removal_invariance_check(trace, b).pass);
  }

  SUBCASE("priority queue, deleting the middle priority at any placement") {
    for (int placement = 0; placement < 4; ++placement) {
      UidAllocator local;
      std::vector<std::int64_t> payloads{9, 1, 5, 7};
      std::swap(payloads[static_cast<std::size_t>(placement)], payloads[2]);
      TraceBuilder builder(Selector::priority_queue());
      std::vector<Item> items;
      for (std::int64_t p : payloads) {
        items.push_back(value_item(p, 0, local));
        builder.insert(items.back());
      }
      for (int k = 0; k < 4; ++k) builder.remove();
      auto trace = builder.take();
      auto middle = *std::find_if(items.begin(), items.end(),
                                  [](const Item& it) { return it.payload == 5; });
      CHECK(removal_invariance_check(trace, middle).pass);
    }
  }
}

TEST_CASE("removal invariance requires the item to be inserted and removed") {
  UidAllocator uids;
  Item a = value_item(1, 0, uids), stranger = value_item(2, 0, uids);
  auto trace = TraceBuilder(Selector::fifo_queue()).insert(a).remove().take();
  CHECK_THROWS_AS(removal_invariance_check(trace, stranger), contract_error);

  auto unremoved = TraceBuilder(Selector::fifo_queue()).insert(a).take();
  CHECK_THROWS_AS(removal_invariance_check(unremoved, a), contract_error);
}

TEST_CASE("removal invariance holds on random serial executions") {
  std::mt19937_64 rng(11);
  TraceGenConfig config;
  config.max_len = 10;
  for (const std::string& name : Selector::consistent_builtin_names()) {
    Selector selector = *Selector::by_name(name);
    for (int round = 0; round < 60; ++round) {
      UidAllocator uids;
      SoloTrace trace = random_trace(selector, uids, rng, config);
      for (const SoloOp& op : trace.steps) {
        const auto* rem = std::get_if<SoloRemove>(&op);
        if (!rem || !rem->response) continue;
        CAPTURE(name);
        CHECK(removal_invariance_check(trace, *rem->response).pass);
      }
    }
  }
}

TEST_SUITE_END();
