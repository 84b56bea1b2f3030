#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "csetlab/consistent_set.hpp"

namespace csetlab {

// A serial execution against one consistent set starting empty: ordered
// insert/remove steps with the responses solo replay produces.
struct SoloInsert {
  Item item;
};
struct SoloRemove {
  std::optional<Item> response;
};
using SoloOp = std::variant<SoloInsert, SoloRemove>;

struct SoloTrace {
  Selector selector;
  std::vector<SoloOp> steps;

  std::size_t size() const { return steps.size(); }
  bool has_remove() const;
};

/// Builds traces whose remove responses are computed by replay, so they are
/// valid from empty by construction.
class TraceBuilder {
 public:
  explicit TraceBuilder(Selector selector);
  TraceBuilder& insert(const Item& item);
  TraceBuilder& remove();
  const SoloTrace& trace() const { return trace_; }
  SoloTrace take() { return std::move(trace_); }

 private:
  SoloTrace trace_;
  ConsistentSet state_;
};

/// True iff replaying every step from an empty set reproduces the recorded
/// responses.
bool replays_clean(const SoloTrace& trace, std::string* why = nullptr);

/// State of the set after executing the first `len` steps in isolation.
ConsistentSet replay_prefix(const SoloTrace& trace, std::size_t len);

/// A prefix is mute when the set is empty after it runs in isolation.
bool is_mute_prefix(const SoloTrace& trace, std::size_t len);

/// The item a hypothetical remove would return right after the len-prefix
/// (nullopt when the set is empty there).
std::optional<Item> removal_candidate_after(const SoloTrace& trace, std::size_t len);

/// The last item drained when all items both inserted and removed during the
/// trace are inserted in order into an empty set and then removed one by one.
/// nullopt when the trace has no such item.
std::optional<Item> drain_last(const SoloTrace& trace);

/// Positions len in [1, t] where the selector, shown the pair (candidate at
/// len, drain_last of the other trace), would pick the other trace's item.
struct BarrierAnalysis {
  std::vector<std::optional<Item>> candidate_at;  // index len in [0, t]
  std::optional<Item> other_drain_last;
  std::vector<std::size_t> barriers;              // ascending
};

BarrierAnalysis find_barriers(const SoloTrace& trace, const SoloTrace& other);

struct TrimmedRemove {
  std::size_t original_index = 0;
  Item response;
};

struct TrimResult {
  SoloTrace trace;
  std::vector<TrimmedRemove> registry;
};

/// Drops exactly those remove steps whose response item was inserted at a
/// step index < boundary; everything else (including the prefix) stays.
TrimResult trim(const SoloTrace& trace, std::size_t boundary);

/// The construction form: keeps only the steps at index >= boundary, minus
/// the removes whose response was inserted before the boundary. The result
/// replays clean from an empty set with unchanged responses (for a selector
/// that passes validation).
TrimResult trim_after_prefix(const SoloTrace& trace, std::size_t boundary);

struct InvarianceVerdict {
  bool pass = false;
  std::string detail;
};

/// Replays the trace and the trace with insert(s) and the remove returning s
/// deleted; passes iff every other remove returns the identical item or null
/// in both. Throws contract_error unless s is inserted and later removed.
InvarianceVerdict removal_invariance_check(const SoloTrace& trace, const Item& s);

struct TraceGenConfig {
  int max_len = 8;
  bool forbid_mute_prefix = false;  // keep the set nonempty after every prefix
  int payload_range = 6;            // payloads drawn from [0, payload_range)
  double insert_bias = 0.6;
};

SoloTrace random_trace(const Selector& selector, UidAllocator& uids, std::mt19937_64& rng,
                       const TraceGenConfig& config = {});

}  // namespace csetlab
