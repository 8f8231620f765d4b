#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aims_bench/workload.hpp"

namespace aims {

// Complete weighted graph over data stores. Stores are indexed 0..k-1 and
// carry display names (M1..Mk by default); delays are symmetric integer ms.
class StoreGraph {
 public:
  StoreGraph() = default;
  StoreGraph(std::vector<std::string> names, std::vector<std::int64_t> capacities);

  std::int32_t store_count() const { return static_cast<std::int32_t>(names_.size()); }
  const std::string& name(StoreId s) const { return names_.at(static_cast<std::size_t>(s)); }
  std::optional<StoreId> find(const std::string& name) const;

  std::int64_t capacity(StoreId s) const { return capacities_.at(static_cast<std::size_t>(s)); }
  void set_capacity(StoreId s, std::int64_t cap) { capacities_.at(static_cast<std::size_t>(s)) = cap; }

  void set_delay(StoreId a, StoreId b, TimeMs delay);
  TimeMs delay(StoreId a, StoreId b) const;  // 0 on the diagonal

  // True when every off-diagonal pair has been assigned a delay.
  bool complete() const;

  bool operator==(const StoreGraph&) const = default;

 private:
  std::size_t pair_index(StoreId a, StoreId b) const;

  std::vector<std::string> names_;
  std::vector<std::int64_t> capacities_;
  std::vector<TimeMs> delays_;      // upper-triangular, -1 = unset
};

// k stores named M1..Mk with pairwise delays uniform over [delay_lo,
// delay_hi] ms and identical capacities.
StoreGraph synthetic_store_graph(std::int32_t k, TimeMs delay_lo, TimeMs delay_hi,
                                 std::int64_t capacity_per_store, std::uint64_t seed);

// Assignment of every object id in [0, num_objects) to exactly one store.
struct PartitionPlan {
  std::vector<StoreId> assignment;  // indexed by object id; -1 = unassigned

  StoreId store_of(ObjectId o) const;  // throws UnassignedObject
  std::int64_t objects_on(StoreId s) const;

  bool operator==(const PartitionPlan&) const = default;
};

PartitionPlan single_store_plan(std::int32_t num_objects);

// The set of stores a transaction touches under a plan (S_t), sorted.
struct Span {
  std::vector<StoreId> stores;

  std::size_t size() const { return stores.size(); }
  bool distributed() const { return stores.size() > 1; }

  bool operator==(const Span&) const = default;
};

Span span(const PartitionPlan& plan, const Transaction& txn);
Span span_of_objects(const PartitionPlan& plan, const std::vector<ObjectId>& objects);

// Max pairwise inter-store delay over the span; 0 when |span| <= 1.
TimeMs communication_cost(const StoreGraph& g, const Span& s);

enum class Aggregate : std::uint8_t { Sum, Max };

// Aggregated communication cost over all transactions (sum by default; the
// max alternative is available for comparison).
std::int64_t plan_objective(const PartitionPlan& plan, const Workload& w, const StoreGraph& g,
                            Aggregate agg = Aggregate::Sum);

struct Violation {
  enum class Kind : std::uint8_t { MultiTenantNotDistributed, CapacityExceeded };
  Kind kind;
  TxnId txn = -1;      // set for MultiTenantNotDistributed
  StoreId store = -1;  // set for CapacityExceeded
  std::string describe(const StoreGraph& g) const;

  bool operator==(const Violation&) const = default;
};

// Empty iff every multi-tenant transaction spans >1 store and every store
// is within capacity. Violations are data, not errors.
std::vector<Violation> validate_plan(const PartitionPlan& plan, const Workload& w,
                                     const StoreGraph& g);

struct SearchOptions {
  Aggregate aggregate = Aggregate::Sum;
};

struct SearchResult {
  PartitionPlan plan;
  std::int64_t objective = 0;
  std::int64_t feasible_candidates = 0;
  std::int64_t winning_trial = -1;
};

// Randomized heuristic: `trials` independent candidates (uniform assignment
// subject to capacity, then one repair move per distribution-violating
// transaction), keeping the feasible candidate with the smallest objective.
// Ties go to the earliest trial. Per-trial seeds are derived from (seed,
// trial), so results do not depend on evaluation order. Throws
// NoFeasiblePlan when no candidate validates.
SearchResult randomized_search(const Workload& w, const StoreGraph& g, std::int64_t trials,
                               std::uint64_t seed, const SearchOptions& opts = {});

// Store-graph text format:  stores k / cap M1 1000 / delay M1 M2 90
void write_store_graph(const StoreGraph& g, std::ostream& out);
StoreGraph read_store_graph(std::istream& in);
void write_store_graph_file(const StoreGraph& g, const std::string& path);
StoreGraph read_store_graph_file(const std::string& path);

// Plan text format: one `object store-name` pair per line.
void write_plan(const PartitionPlan& plan, const StoreGraph& g, std::ostream& out);
PartitionPlan read_plan(std::istream& in, const StoreGraph& g, std::int32_t num_objects);
void write_plan_file(const PartitionPlan& plan, const StoreGraph& g, const std::string& path);
PartitionPlan read_plan_file(const std::string& path, const StoreGraph& g, std::int32_t num_objects);

}  // namespace aims
