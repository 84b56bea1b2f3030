#include "csetlab/errors.hpp"
#include "csetlab/executor.hpp"
#include "csetlab/protocols.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace csetlab;

namespace {

// Runs process 0 to completion, then process 1, and returns the decisions.
std::pair<std::int64_t, std::int64_t> sequential_decisions(const ProtocolProgram& program,
                                                           bool zero_first = true) {
  SystemState state = initial_state(program);
  const int first = zero_first ? 0 : 1;
  const int second = 1 - first;
  while (!state.decided[static_cast<std::size_t>(first)]) apply_step(program, state, first);
  while (!state.decided[static_cast<std::size_t>(second)]) apply_step(program, state, second);
  return {*state.decided[0], *state.decided[1]};
}

}  // namespace

TEST_SUITE_BEGIN("protocols");

TEST_CASE("marker dominance per selector") {
  UidAllocator uids;
  Item first = marker_item(0, 5, 0, uids);
  Item second = marker_item(1, 5, 0, uids);
  CHECK(marker_dominance(Selector::fifo_queue(), first, second).uid == first.uid);
  CHECK(marker_dominance(Selector::lifo_stack(), first, second).uid == second.uid);

  // Priorities 2 vs 5: the priority-5 item wins in either insertion order.
  Item low = marker_item(0, 2, 0, uids);
  Item high = marker_item(1, 5, 0, uids);
  CHECK(marker_dominance(Selector::priority_queue(), low, high).uid == high.uid);
  CHECK(marker_dominance(Selector::priority_queue(), high, low).uid == high.uid);
}

TEST_CASE("remlw drains to the first marker and classifies it") {
  UidAllocator uids;
  Item init = initial_item(3, uids);
  Item p = marker_item(0, 7, 0, uids);
  Item q = marker_item(1, 7, 0, uids);
  MarkerRegistry registry;
  registry.register_pair(Selector::fifo_queue(), p, q);

  ConsistentSet object =
      ConsistentSet(Selector::fifo_queue()).insert(init).insert(p).insert(q);

  auto [after_first, first] = remlw(object, registry);
  CHECK(first.cls == RemLWResult::Class::Win);
  CHECK(first.value == 7);

  auto [after_second, second] = remlw(after_first, registry);
  CHECK(second.cls == RemLWResult::Class::Lose);
  CHECK(second.value == 7);

  auto [after_third, third] = remlw(after_second, registry);
  CHECK(third.cls == RemLWResult::Class::Null);
  CHECK_FALSE(third.value);
  CHECK(after_third.empty());
}

TEST_CASE("remlw on initial items only drains to null") {
  UidAllocator uids;
  MarkerRegistry registry;
  auto object = test::make_set(Selector::lifo_stack(), {1, 2}, uids);
  auto [state, result] = remlw(object, registry);
  CHECK(result.cls == RemLWResult::Class::Null);
  CHECK(state.empty());
}

TEST_CASE("remlw rejects a marker without a registered sibling") {
  UidAllocator uids;
  Item orphan = marker_item(0, 7, 0, uids);
  MarkerRegistry registry;
  ConsistentSet object = ConsistentSet(Selector::fifo_queue()).insert(orphan);
  CHECK_THROWS_AS(remlw(object, registry), contract_error);
}

TEST_CASE("register consensus: solo runs decide own input") {
  UidAllocator uids;
  ConsistentSet empty(Selector::fifo_queue());
  ProtocolProgram program = consensus2_registers(5, 7, empty, uids);

  SUBCASE("process 0 sees an unset register and decides immediately") {
    SoloExecution solo = solo_execution(program, 0);
    REQUIRE(solo.decided);
    CHECK(solo.decision == 5);
    // write, read unset, decide
    REQUIRE(solo.steps.size() == 3);
    CHECK(std::holds_alternative<WriteAction>(solo.steps[0].action));
    CHECK(std::holds_alternative<ReadAction>(solo.steps[1].action));
    CHECK(std::holds_alternative<DecideAction>(solo.steps[2].action));
  }

  SUBCASE("process 1 drains an arbitrary initial set down to its marker") {
    UidAllocator local;
    auto initial = test::make_set(Selector::fifo_queue(), {2, 9, 4}, local);
    ProtocolProgram seeded = consensus2_registers(5, 7, initial, local);
    SoloExecution solo = solo_execution(seeded, 1);
    REQUIRE(solo.decided);
    CHECK(solo.decision == 7);
    // insert W, write, read unset, then 4 removes (3 initials + W), decide
    CHECK(solo.steps.size() == 8);
  }
}

TEST_CASE("two-object consensus matches the sequential case analysis") {
  for (const std::string& name : Selector::consistent_builtin_names()) {
    CAPTURE(name);
    Selector selector = *Selector::by_name(name);
    UidAllocator uids;
    auto o0 = test::make_set(selector, {1, 2}, uids);
    auto o1 = test::make_set(selector, {3}, uids);

    SUBCASE(("process 0 first decides its own value: " + name).c_str()) {
      UidAllocator local;
      ProtocolProgram program = consensus2_two_objects(
          5, 7, test::make_set(selector, {1, 2}, local), test::make_set(selector, {3}, local),
          local);
      auto [d0, d1] = sequential_decisions(program, true);
      CHECK(d0 == 5);
      CHECK(d1 == 5);
    }
    SUBCASE(("process 1 first forces both to its value: " + name).c_str()) {
      UidAllocator local;
      ProtocolProgram program = consensus2_two_objects(
          5, 7, test::make_set(selector, {1, 2}, local), test::make_set(selector, {3}, local),
          local);
      auto [d0, d1] = sequential_decisions(program, false);
      CHECK(d0 == 7);
      CHECK(d1 == 7);
    }
  }
}

TEST_CASE("two-object consensus never touches a register") {
  UidAllocator uids;
  ProtocolProgram program =
      consensus2_two_objects(5, 7, ConsistentSet(Selector::fifo_queue()),
                             ConsistentSet(Selector::fifo_queue()), uids);
  Verdict verdict =
      check_all_interleavings(program, {PropertyId::RegisterFreeness}).front();
  CHECK(verdict.outcome == Outcome::Pass);
  CHECK(verdict.fully_explored);
}

TEST_CASE("lucky test-and-set: single process wins in two steps") {
  UidAllocator uids;
  auto lucky = test::make_set(Selector::fifo_queue(), {9}, uids);
  std::uint64_t w = find_unique_payload(lucky, 9);
  ProtocolProgram program = tas_lucky(1, lucky, w);
  SoloExecution solo = solo_execution(program, 0);
  REQUIRE(solo.decided);
  CHECK(solo.decision == 1);
  CHECK(solo.steps.size() == 2);  // remove W, decide 1
}

TEST_CASE("lucky state designation rejects zero or duplicated items") {
  UidAllocator uids;
  auto no_w = test::make_set(Selector::fifo_queue(), {1, 2}, uids);
  CHECK_THROWS_AS(find_unique_payload(no_w, 9), config_error);
  auto two_w = test::make_set(Selector::fifo_queue(), {9, 9}, uids);
  CHECK_THROWS_AS(find_unique_payload(two_w, 9), config_error);
}

TEST_CASE("lucky-queue consensus: winner path and selector gate") {
  UidAllocator uids;
  auto lucky = test::make_set(Selector::fifo_queue(), {9}, uids);
  std::uint64_t w = find_unique_payload(lucky, 9);
  ProtocolProgram program = consensus2_queue_lucky(4, 9, lucky, w, uids);

  SoloExecution solo = solo_execution(program, 0);
  REQUIRE(solo.decided);
  CHECK(solo.decision == 4);
  // enqueue own, dequeue W, decide
  CHECK(solo.steps.size() == 3);

  UidAllocator other;
  auto stack = test::make_set(Selector::lifo_stack(), {9}, other);
  CHECK_THROWS_AS(
      consensus2_queue_lucky(4, 9, stack, find_unique_payload(stack, 9), other),
      config_error);
}

TEST_CASE("lucky-queue consensus: the loser recovers the winner's input") {
  UidAllocator uids;
  auto lucky = test::make_set(Selector::fifo_queue(), {9}, uids);
  std::uint64_t w = find_unique_payload(lucky, 9);
  ProtocolProgram program = consensus2_queue_lucky(4, 9, lucky, w, uids);

  // Process 0 dequeues W and wins; process 1 drains everything, sees null,
  // and its last two dequeues must be the two input items.
  Schedule schedule{0, 0, 0, 1, 1, 1, 1, 1};
  RunResult result = run(program, schedule);
  CHECK(result.state.decided[0] == 4);
  CHECK(result.state.decided[1] == 4);

  const auto& loser = result.traces[1];
  REQUIRE(loser.size() == 5);
  auto payload_of = [](const StepRecord& record) {
    return std::get<RemovedResponse>(record.response).item->payload;
  };
  CHECK(payload_of(loser[1]) == 4);
  CHECK(payload_of(loser[2]) == 9);
  CHECK_FALSE(std::get<RemovedResponse>(loser[3].response).item);
}

TEST_CASE("tournament: bounds and the degenerate two-process tree") {
  UidAllocator uids;
  CHECK_THROWS_AS(tournament_tas(1, TournamentBuilder::TwoObjects, Selector::fifo_queue(), uids),
                  config_error);
  CHECK_THROWS_AS(
      tournament_tas(17, TournamentBuilder::TwoObjects, Selector::fifo_queue(), uids),
      config_error);

  for (TournamentBuilder builder :
       {TournamentBuilder::TwoObjects, TournamentBuilder::SetPlusRegisters}) {
    ProtocolProgram program = tournament_tas(2, builder, Selector::fifo_queue(), uids);
    CHECK(program.isolation_bound() > 0);
    for (int pid = 0; pid < 2; ++pid) {
      SoloExecution solo = solo_execution(program, pid);
      REQUIRE(solo.decided);
      CHECK(solo.decision == 1);
      CHECK(static_cast<std::int64_t>(solo.steps.size()) <= program.isolation_bound());
    }
  }
}

TEST_CASE("tournament: exhaustive winner uniqueness at n = 3 for both builders") {
  for (TournamentBuilder builder :
       {TournamentBuilder::TwoObjects, TournamentBuilder::SetPlusRegisters}) {
    UidAllocator uids;
    ProtocolProgram program = tournament_tas(3, builder, Selector::fifo_queue(), uids);
    auto verdicts = check_all_interleavings(
        program, {PropertyId::WinnerUniqueness, PropertyId::WaitFreedom}, CheckBounds{64, true});
    for (const Verdict& v : verdicts) {
      CAPTURE(property_name(v.property));
      CHECK(v.outcome == Outcome::Pass);
      CHECK(v.fully_explored);
    }
  }
}

TEST_CASE("two-object consensus tolerates objects of different kinds") {
  UidAllocator uids;
  ProtocolProgram program = consensus2_two_objects(
      5, 7, test::make_set(Selector::fifo_queue(), {1, 2}, uids),
      test::make_set(Selector::lifo_stack(), {3}, uids), uids);
  auto verdicts = check_all_interleavings(
      program,
      {PropertyId::Agreement, PropertyId::Validity, PropertyId::WaitFreedom,
       PropertyId::RegisterFreeness},
      CheckBounds{64, true});
  for (const Verdict& v : verdicts) {
    CAPTURE(property_name(v.property));
    CHECK(v.outcome == Outcome::Pass);
    CHECK(v.fully_explored);
  }
}

TEST_SUITE_END();
