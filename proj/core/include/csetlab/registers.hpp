#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace csetlab {

/// Named single-writer-per-step read/write registers. A read returns the most
/// recently written value, or nullopt if the cell was never written. Value
/// semantics, same as the object states.
class RegisterBank {
 public:
  RegisterBank() = default;

  std::optional<std::int64_t> read(const std::string& name) const {
    auto it = cells_.find(name);
    if (it == cells_.end()) return std::nullopt;
    return it->second;
  }

  RegisterBank write(const std::string& name, std::int64_t value) const {
    RegisterBank next = *this;
    next.cells_[name] = value;
    return next;
  }

  const std::map<std::string, std::int64_t>& cells() const { return cells_; }

 private:
  std::map<std::string, std::int64_t> cells_;
};

}  // namespace csetlab
