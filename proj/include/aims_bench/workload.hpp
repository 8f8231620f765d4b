#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

#include "aims_bench/types.hpp"

namespace aims {

enum class ArrivalMode : std::uint8_t { Fixed, Poisson };

// Parameters of the money-transfer benchmark. All fields take part in the
// text serialization and in workload equality.
struct WorkloadSpec {
  std::int32_t n = 0;                // transactions
  std::int32_t alpha = 2;            // max fan-in/fan-out degree, >= 2
  double beta = 0.0;                 // dependency edge probability in [0,1]
  std::int32_t num_accounts = 0;     // size of the Checking table
  Money initial_balance = 1'000'000; // cents; $10,000 per account
  double arrival_rate = 10.0;        // transactions per second
  std::int32_t m = 0;                // malicious transactions
  std::int32_t num_tenants = 1;

  // Throws InvalidSpec when any invariant fails.
  void validate() const;

  bool operator==(const WorkloadSpec&) const = default;
};

// The paper-table2 benchmark preset: 5000 transactions at 10 tx/s, fan
// degrees up to 10, dependency probability 0.5.
WorkloadSpec table2_spec();

struct Transaction {
  TxnId id = 0;
  TxnKind kind = TxnKind::Distribute;
  std::vector<ObjectId> sources;
  std::vector<ObjectId> destinations;
  // Fraction of the source balance moved, in tenths of a basis point
  // (1/10000). Valid range [100, 1000] i.e. [0.01, 0.1]; one per source.
  std::vector<std::int32_t> fraction_bp;
  TenantId tenant = 0;
  bool is_malicious = false;
  TimeMs arrival_time = 0;

  // sources ∪ destinations; a transfer reads and writes both endpoints.
  std::vector<ObjectId> read_write_set() const;

  bool operator==(const Transaction&) const = default;
};

struct DependencyGraph {
  std::int32_t nodes = 0;
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;  // i < j, sorted

  bool operator==(const DependencyGraph&) const = default;
};

struct Workload {
  WorkloadSpec spec;
  std::vector<Transaction> transactions;  // sorted by (arrival_time, id)
  // account id -> owning tenant, or kSharedTenant for objects used by
  // transactions of two or more tenants (the shared set D_S). Derived
  // deterministically from the transactions; rebuilt on read.
  std::vector<TenantId> tenant_of_object;

  // True when the transaction touches at least one shared object, i.e. it
  // is a member of T'.
  bool is_multi_tenant(const Transaction& t) const;
  std::vector<TxnId> multi_tenant_transactions() const;

  bool operator==(const Workload&) const = default;
};

// Erdős–Rényi G(n, beta): every unordered pair independently with
// probability beta. Edges come out sorted lexicographically.
DependencyGraph build_dependency_graph(std::int32_t n, double beta, std::uint64_t seed);

// Streaming form used by the generator; fn(i, j) per present edge, i < j.
void for_each_dependency_edge(std::int32_t n, double beta, std::uint64_t seed,
                              const std::function<void(std::int32_t, std::int32_t)>& fn);

// Generates the full benchmark workload. Deterministic for a fixed
// (spec, mode, seed). The dependency graph realized by shared accounts uses
// build_dependency_graph(spec.n, spec.beta, derive_seed(seed, 1)).
Workload generate_workload(const WorkloadSpec& spec, std::uint64_t seed,
                           ArrivalMode mode = ArrivalMode::Fixed);

// The sharing graph actually realized by the account assignment: an edge
// wherever two transactions' read/write sets intersect. Superset of the
// generator's nominal edges; equal to it when beta is 0.
DependencyGraph realized_dependency_graph(const Workload& w);

// Recomputes tenant_of_object from the transactions (used by the reader and
// by generate_workload itself).
std::vector<TenantId> derive_object_tenants(const WorkloadSpec& spec,
                                            const std::vector<Transaction>& txns);

// Line-oriented text format:
//   header:  n=.. alpha=.. beta=.. num_accounts=.. initial_balance=..
//            arrival_rate=.. m=.. num_tenants=..
//   per txn: id kind src=a,b dst=c,d frac=0.05,0.07 tenant=T2 mal=0 at=1200
void write_workload(const Workload& w, std::ostream& out);
Workload read_workload(std::istream& in);
void write_workload_file(const Workload& w, const std::string& path);
Workload read_workload_file(const std::string& path);

// Exact decimal text for a fraction in tenths of basis points, e.g.
// 500 -> "0.05", 123 -> "0.0123".
std::string fraction_to_string(std::int32_t bp);

}  // namespace aims
