#pragma once

#include <cstdint>
#include <string>

namespace csetlab {

inline constexpr std::int32_t kInitInserter = -1;

enum class ItemTag : std::uint8_t { Initial, Marker, Value };

/// An element stored in a consistent set.
///
/// Identity is the uid: payloads and tags are carried data and may collide,
/// uids never repeat within one object in one execution. Marker items live in
/// a prefix namespace disjoint from Initial items by construction (different
/// tag), so a protocol marker can never be confused with a pre-loaded item.
struct Item {
  ItemTag tag = ItemTag::Value;
  std::int32_t marker_prefix = 0;  // meaningful for Marker items only
  std::int64_t payload = 0;        // process input, marker value, or priority
  std::uint64_t uid = 0;
  std::int32_t inserter = kInitInserter;
};

// Equality and ordering are by uid (identity), deliberately.
inline bool operator==(const Item& a, const Item& b) { return a.uid == b.uid; }
inline bool operator!=(const Item& a, const Item& b) { return a.uid != b.uid; }
inline bool operator<(const Item& a, const Item& b) { return a.uid < b.uid; }

std::string describe(const Item& item);

/// Hands out fresh uids. One allocator per simulated execution.
class UidAllocator {
 public:
  explicit UidAllocator(std::uint64_t first = 1) : next_(first) {}
  std::uint64_t fresh() { return next_++; }
  std::uint64_t peek() const { return next_; }

 private:
  std::uint64_t next_;
};

inline Item initial_item(std::int64_t payload, UidAllocator& uids) {
  return Item{ItemTag::Initial, 0, payload, uids.fresh(), kInitInserter};
}

inline Item value_item(std::int64_t payload, std::int32_t inserter, UidAllocator& uids) {
  return Item{ItemTag::Value, 0, payload, uids.fresh(), inserter};
}

inline Item marker_item(std::int32_t prefix, std::int64_t value, std::int32_t inserter,
                        UidAllocator& uids) {
  return Item{ItemTag::Marker, prefix, value, uids.fresh(), inserter};
}

}  // namespace csetlab
