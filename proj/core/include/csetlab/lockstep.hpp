#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "csetlab/executor.hpp"

namespace csetlab {

enum class ObjectKind { Queue, Stack };

std::string object_kind_name(ObjectKind kind);
Selector selector_for(ObjectKind kind);

/// A purported test-and-set candidate described by the ordered object
/// operations it performs when undisturbed. As a program it replays the
/// script, decides 1 when every response matches its solo run, and concedes
/// with 0 at the first deviation.
struct ScriptOp {
  bool is_insert = false;
  std::string object;
  std::int64_t payload = 0;  // inserts only
};

struct CandidateScript {
  std::string name;
  std::vector<ScriptOp> ops;
};

/// The ordered solo object-steps of a candidate (decides excluded) and the
/// set of objects they touch.
struct SigStep {
  bool is_insert = false;
  std::string object;
};

struct Signature {
  int candidate = 0;
  std::vector<SigStep> steps;
  std::set<std::string> footprint;
};

struct IsolationViolation {
  int candidate = 0;
  std::string reason;
};

struct SignatureExtraction {
  std::vector<Signature> signatures;
  std::vector<IsolationViolation> violations;
};

/// Single-process program replaying the candidate script over empty objects
/// of the given kind.
ProtocolProgram candidate_program(const CandidateScript& script, ObjectKind kind,
                                  UidAllocator& uids);

/// Solo-runs one process of any program through the executor and records its
/// ordered object steps. Returns a violation instead when the run exceeds
/// `isolation_bound` object-steps or does not decide 1.
std::variant<Signature, IsolationViolation> signature_of(const ProtocolProgram& program, int pid,
                                                         int candidate_index,
                                                         int isolation_bound);

/// Signature extraction over a whole script family; violators are reported
/// and excluded.
SignatureExtraction extract_signatures(std::span<const CandidateScript> family, ObjectKind kind,
                                       int isolation_bound);

struct ConflictPair {
  int p = 0;
  int q = 0;
  std::vector<std::string> shared_objects;
};

/// First pair (by index order) whose step patterns restricted to their shared
/// objects are identical sequences of (op type, object). Footprints outside
/// the shared set are disjoint by construction. nullopt when no pair in the
/// finite family qualifies, which refutes nothing.
std::optional<ConflictPair> select_conflict_pair(std::span<const Signature> signatures);

/// Two-process program: process 0 replays script p, process 1 replays q,
/// over the union of their objects, all initially empty.
ProtocolProgram combined_program(const CandidateScript& p, const CandidateScript& q,
                                 ObjectKind kind, UidAllocator& uids);

/// The alternating schedule: private runs up to each shared operation, then
/// the shared operation performed by both processes back to back; for stacks
/// the two shared removes run in reversed order. Trailing entries cover the
/// two Decide steps.
Schedule lockstep_schedule(const Signature& p, const Signature& q, ObjectKind kind);

struct LockstepCertificate {
  bool double_win = false;
  Schedule schedule;
  std::vector<std::vector<StepRecord>> traces;
  std::string detail;
};

/// Replays the lock-step schedule on the combined program and reports whether
/// both processes decided 1 while observing exactly their solo responses.
LockstepCertificate run_lockstep(const CandidateScript& p, const CandidateScript& q,
                                 const Signature& sig_p, const Signature& sig_q, ObjectKind kind);

/// Deterministic candidate family for pigeonhole experiments: shared-object
/// patterns drawn from a space smaller than the family, plus per-candidate
/// private scratch objects.
std::vector<CandidateScript> generate_candidate_family(int count, int shared_objects,
                                                       int pattern_space, std::uint64_t seed);

}  // namespace csetlab
