#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace aims {

// Money is held in integer minor units (cents). All transfer arithmetic is
// integer-exact so states can be compared against oracles without tolerance.
using Money = std::int64_t;

// Simulated time in whole milliseconds.
using TimeMs = std::int64_t;

using TxnId = std::int32_t;
using ObjectId = std::int32_t;
using StoreId = std::int32_t;

// Tenants are numbered 0..k-1; kSharedTenant marks objects used by more
// than one tenant's transactions (the shared set D_S).
using TenantId = std::int32_t;
inline constexpr TenantId kSharedTenant = -1;

enum class TxnKind : std::uint8_t { Distribute, Collect, ManyToMany };

std::string to_string(TxnKind k);
bool txn_kind_from_string(const std::string& s, TxnKind& out);

// ---------------------------------------------------------------------------
// Error hierarchy. Each named error condition in the public contracts gets
// its own type so callers and tests can discriminate.

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct MalformedInput : Error {
  MalformedInput(std::size_t line, std::string field, const std::string& what)
      : Error("malformed input at line " + std::to_string(line) + ", field '" + field + "': " + what),
        line(line),
        field(std::move(field)) {}
  std::size_t line;
  std::string field;
};

struct InvalidSpec : Error {
  using Error::Error;
};

struct InfeasibleObjectAssignment : Error {
  using Error::Error;
};

struct UnassignedObject : Error {
  explicit UnassignedObject(ObjectId o)
      : Error("object " + std::to_string(o) + " is not assigned to any store"), object(o) {}
  ObjectId object;
};

struct UnknownStore : Error {
  explicit UnknownStore(const std::string& name) : Error("unknown store '" + name + "'") {}
};

struct NoFeasiblePlan : Error {
  using Error::Error;
};

struct InstanceTooLarge : Error {
  using Error::Error;
};

struct InvalidPlan : Error {
  using Error::Error;
};

struct EventQueueOverflow : Error {
  using Error::Error;
};

struct IncompleteTrace : Error {
  using Error::Error;
};

struct MissingVersion : Error {
  using Error::Error;
};

struct UnknownTransaction : Error {
  explicit UnknownTransaction(TxnId t)
      : Error("transaction " + std::to_string(t) + " has no committed log records"), txn(t) {}
  TxnId txn;
};

struct ConfigError : Error {
  explicit ConfigError(std::vector<std::string> issues_)
      : Error(join(issues_)), issues(std::move(issues_)) {}
  std::vector<std::string> issues;

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid config:";
    for (const auto& e : v) {
      s += "\n  " + e;
    }
    return s;
  }
};

// Rounds value*num/10000 to the nearest integer, ties to even. Used for
// fraction-of-balance transfer amounts; exact over the full Money range that
// balances can reach here (|value| * 1000 stays well inside int64).
Money round_half_even_div10000(std::int64_t numerator);

}  // namespace aims
