#include "csetlab/lockstep.hpp"

#include "csetlab/errors.hpp"
#include "csetlab/protocols.hpp"
#include "doctest.h"

using namespace csetlab;

namespace {

CandidateScript script(std::string name, std::vector<ScriptOp> ops) {
  return CandidateScript{std::move(name), std::move(ops)};
}

ScriptOp ins(std::string object, std::int64_t payload) { return {true, std::move(object), payload}; }
ScriptOp rem(std::string object) { return {false, std::move(object), 0}; }

}  // namespace

TEST_SUITE_BEGIN("lockstep");

TEST_CASE("signatures record the solo object steps and footprint") {
  std::vector<CandidateScript> family{
      script("winner", {rem("O")}),
      script("tokener", {ins("O", 1), rem("O"), rem("O")}),
  };
  auto extraction = extract_signatures(family, ObjectKind::Queue, 8);
  REQUIRE(extraction.signatures.size() == 2);
  CHECK(extraction.violations.empty());

  CHECK(extraction.signatures[0].steps.size() == 1);
  CHECK_FALSE(extraction.signatures[0].steps[0].is_insert);
  CHECK(extraction.signatures[0].footprint == std::set<std::string>{"O"});

  CHECK(extraction.signatures[1].steps.size() == 3);
}

TEST_CASE("signatures extract from arbitrary programs, not just scripts") {
  UidAllocator uids;
  std::vector<Item> items{initial_item(9, uids)};
  ConsistentSet lucky(Selector::fifo_queue(), items);
  ProtocolProgram program = tas_lucky(2, lucky, find_unique_payload(lucky, 9));
  auto result = signature_of(program, 0, 0, 1);
  REQUIRE(std::holds_alternative<Signature>(result));
  const Signature& sig = std::get<Signature>(result);
  REQUIRE(sig.steps.size() == 1);
  CHECK_FALSE(sig.steps[0].is_insert);  // a single remove wins from [W]
  CHECK(sig.footprint.size() == 1);
}

TEST_CASE("an over-long candidate is an isolation violation, not a signature") {
  std::vector<CandidateScript> family{
      script("slow", {ins("O", 1), ins("O", 2), rem("O"), rem("O")}),
  };
  auto extraction = extract_signatures(family, ObjectKind::Queue, 3);
  CHECK(extraction.signatures.empty());
  REQUIRE(extraction.violations.size() == 1);
  CHECK(extraction.violations[0].candidate == 0);
}

TEST_CASE("disjoint scratch queues make identical candidates a conflict pair") {
  std::vector<CandidateScript> family{
      script("c0", {ins("p0", 1), ins("Q1", 2), rem("Q1")}),
      script("c1", {ins("p1", 1), ins("Q1", 2), rem("Q1")}),
  };
  auto extraction = extract_signatures(family, ObjectKind::Queue, 8);
  auto pair = select_conflict_pair(extraction.signatures);
  REQUIRE(pair);
  CHECK(pair->p == 0);
  CHECK(pair->q == 1);
  CHECK(pair->shared_objects == std::vector<std::string>{"Q1"});
}

TEST_CASE("families whose shared orders all differ have no conflict pair") {
  std::vector<CandidateScript> family{
      script("c0", {ins("Q1", 1), ins("Q2", 2)}),
      script("c1", {ins("Q2", 1), ins("Q1", 2)}),
  };
  auto extraction = extract_signatures(family, ObjectKind::Queue, 8);
  CHECK_FALSE(select_conflict_pair(extraction.signatures));
}

TEST_CASE("pigeonhole: a family larger than its pattern space yields a pair") {
  auto family = generate_candidate_family(10, 2, 3, 12345);
  REQUIRE(family.size() == 10);
  auto extraction = extract_signatures(family, ObjectKind::Queue, 8);
  CHECK(extraction.violations.empty());
  CHECK(select_conflict_pair(extraction.signatures));
}

TEST_CASE("queue lock-step: ins/ins/rem/rem, each process sees its own item") {
  std::vector<CandidateScript> family{
      script("p", {ins("Q1", 10), rem("Q1")}),
      script("q", {ins("Q1", 20), rem("Q1")}),
  };
  auto extraction = extract_signatures(family, ObjectKind::Queue, 8);
  REQUIRE(extraction.signatures.size() == 2);
  Schedule schedule =
      lockstep_schedule(extraction.signatures[0], extraction.signatures[1], ObjectKind::Queue);
  CHECK(schedule == Schedule{0, 1, 0, 1, 0, 1});

  auto cert = run_lockstep(family[0], family[1], extraction.signatures[0],
                           extraction.signatures[1], ObjectKind::Queue);
  REQUIRE(cert.double_win);
  const auto& p_remove = cert.traces[0][1];
  const auto& q_remove = cert.traces[1][1];
  CHECK(std::get<RemovedResponse>(p_remove.response).item->payload == 10);
  CHECK(std::get<RemovedResponse>(q_remove.response).item->payload == 20);
}

TEST_CASE("stack lock-step reverses the shared removes") {
  std::vector<CandidateScript> family{
      script("p", {ins("S", 10), rem("S")}),
      script("q", {ins("S", 20), rem("S")}),
  };
  auto extraction = extract_signatures(family, ObjectKind::Stack, 8);
  Schedule schedule =
      lockstep_schedule(extraction.signatures[0], extraction.signatures[1], ObjectKind::Stack);
  CHECK(schedule == Schedule{0, 1, 1, 0, 0, 1});

  auto cert = run_lockstep(family[0], family[1], extraction.signatures[0],
                           extraction.signatures[1], ObjectKind::Stack);
  REQUIRE(cert.double_win);
  CHECK(std::get<RemovedResponse>(cert.traces[0][1].response).item->payload == 10);
  CHECK(std::get<RemovedResponse>(cert.traces[1][1].response).item->payload == 20);
}

TEST_CASE("private operations interleave without interference") {
  std::vector<CandidateScript> family{
      script("p", {ins("priv_p", 1), ins("Q1", 10), rem("priv_p"), rem("Q1")}),
      script("q", {ins("Q1", 20), ins("priv_q", 2), rem("Q1"), rem("priv_q")}),
  };
  auto extraction = extract_signatures(family, ObjectKind::Queue, 8);
  REQUIRE(extraction.signatures.size() == 2);
  auto pair = select_conflict_pair(extraction.signatures);
  REQUIRE(pair);
  auto cert = run_lockstep(family[0], family[1], extraction.signatures[0],
                           extraction.signatures[1], ObjectKind::Queue);
  CHECK(cert.double_win);
}

TEST_CASE("mismatched shared patterns cannot be lock-step scheduled") {
  std::vector<CandidateScript> family{
      script("p", {ins("Q1", 10)}),
      script("q", {rem("Q1")}),
  };
  auto extraction = extract_signatures(family, ObjectKind::Queue, 8);
  CHECK_THROWS_AS(
      lockstep_schedule(extraction.signatures[0], extraction.signatures[1], ObjectKind::Queue),
      contract_error);
}

TEST_SUITE_END();
