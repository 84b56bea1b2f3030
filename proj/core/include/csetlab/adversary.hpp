#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "csetlab/executor.hpp"
#include "csetlab/solo_trace.hpp"

namespace csetlab {

enum class InterleaveCase { Base, RemovalFree, Mute, Barrier, PQR };

std::string interleave_case_name(InterleaveCase c);

struct CaseCounts {
  std::uint64_t base = 0;
  std::uint64_t removal_free = 0;
  std::uint64_t mute = 0;
  std::uint64_t barrier = 0;
  std::uint64_t pqr = 0;

  void bump(InterleaveCase c);
  CaseCounts& operator+=(const CaseCounts& other);
};

/// Raised when the structural recursion cannot place the next step
/// indistinguishably. For a selector that passes validation this signals an
/// implementation or selector bug, never a legitimate outcome.
struct theorem_violation : std::runtime_error {
  explicit theorem_violation(const std::string& what) : std::runtime_error(what) {}
};

struct InterleaveResult {
  Schedule schedule;           // total order over the steps of both traces
  InterleaveCase top_case = InterleaveCase::Base;
  CaseCounts cases;            // accumulated over the whole recursion
};

/// Builds a total interleaving of two solo traces over one shared set
/// (initially empty, same selector) in which neither process can distinguish
/// the run from its solo execution. Structural recursion with case dispatch:
/// empty trace, removal-free trace, mute prefix, largest barrier prefix with
/// trimming and merge-back, and the split around each trace's last-drained
/// item. Throws theorem_violation when stuck, std::invalid_argument on traces
/// that do not replay clean or selectors that differ.
InterleaveResult interleave_single_set(const SoloTrace& e0, const SoloTrace& e1);

struct IndistinguishabilityVerdict {
  bool pass = false;
  std::string detail;
};

/// Replays the interleaving on one shared set from empty; passes iff every
/// remove of each process returns the identical item or null as in its solo
/// trace. Throws std::invalid_argument on a schedule that does not interleave
/// exactly the steps of both traces.
IndistinguishabilityVerdict verify_indistinguishable(const Schedule& schedule,
                                                     const SoloTrace& e0, const SoloTrace& e1);

}  // namespace csetlab
