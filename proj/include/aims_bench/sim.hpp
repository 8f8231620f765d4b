#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "aims_bench/aims.hpp"
#include "aims_bench/partition.hpp"
#include "aims_bench/txn_log.hpp"
#include "aims_bench/workload.hpp"

namespace aims {

struct SimConfig {
  TimeMs delta_ms = 500;       // IDS detection delay
  TimeMs base_commit_ms = 5;   // local commit latency
  ArrivalMode arrival_mode = ArrivalMode::Fixed;  // applied at generation time
  std::int64_t event_cap = 20'000'000;            // safety bound on processed events
};

enum class TraceKind : std::uint8_t {
  Admit,
  Block,
  Commit,
  Defer,
  Abort,
  Respond,
  Affected,
  Recovered,
  Done,
};

std::string to_string(TraceKind k);
bool trace_kind_from_string(const std::string& s, TraceKind& out);

// One event-and-action record. Exported tab-separated as
//   time kind txn detail
struct TraceEvent {
  TimeMs time = 0;
  TraceKind kind = TraceKind::Admit;
  TxnId txn = -1;
  std::string detail;

  bool operator==(const TraceEvent&) const = default;
};

struct SimTrace {
  std::vector<TraceEvent> events;

  bool complete() const;  // ends with a Done event

  bool operator==(const SimTrace&) const = default;
};

void write_trace(const SimTrace& trace, std::ostream& out);
SimTrace read_trace(std::istream& in);
void write_trace_file(const SimTrace& trace, const std::string& path);
SimTrace read_trace_file(const std::string& path);

// The three headline benchmark metrics plus supporting counters.
struct Metrics {
  std::int64_t affected_count = 0;   // sum of redone transactions over episodes
  double avg_recovery_ms = 0.0;      // mean of (COT cleared - detection), 0 if no episodes
  double avg_response_ms = 0.0;      // mean of (commit - arrival) over committed txns
  std::int64_t episodes = 0;
  std::int64_t blocked_count = 0;    // distinct transactions blocked at admission
  std::int64_t plan_objective = 0;   // filled by the caller that planned

  bool operator==(const Metrics&) const = default;
};

// Recomputes the trace-derived metrics (everything except plan_objective).
// Throws IncompleteTrace when the trace lacks its terminating Done event.
Metrics compute_metrics(const SimTrace& trace);

// Summary of one recovery episode, for oracle cross-checks.
struct EpisodeSummary {
  std::int32_t episode = -1;
  TxnId malicious_txn = -1;
  TimeMs commit_time = 0;
  TimeMs detection_time = 0;
  TimeMs started = 0;        // respond + lock acquired
  TimeMs identified = 0;     // affected set fixed, lock released
  TimeMs finished = 0;       // undo/redo applied, COT cleared
  std::vector<TxnId> affected;          // commit order
  std::int64_t log_prefix = 0;          // records() size when the set was fixed
};

struct TxnOutcome {
  enum class Status : std::uint8_t { Committed, Aborted };
  Status status = Status::Committed;
  TimeMs admitted_at = 0;
  TimeMs commit_time = 0;    // valid when committed
  bool was_blocked = false;
  bool distributed = false;
};

struct SimResult {
  SimTrace trace;
  Metrics metrics;
  std::vector<Money> final_balances;     // by object id
  TransactionLog log;
  std::vector<EpisodeSummary> episodes;
  std::map<TxnId, TxnOutcome> outcomes;
  std::vector<TxnId> commit_order;       // original commits, in commit order
};

// Splits the transaction's read/write set by assigned store. The union of
// the sub-transactions reconstructs the set exactly.
std::map<StoreId, std::vector<ObjectId>> route(const Transaction& txn, const PartitionPlan& plan);

// base + communication cost when the transaction spans >1 store, else base.
TimeMs commit_delay(const Transaction& txn, const PartitionPlan& plan, const StoreGraph& g,
                    TimeMs base);

// Deterministic discrete-event execution of the workload against the plan.
// `seed` is reserved for stochastic IDS hooks and is unused by the current
// perfect-detection model.
SimResult run_simulation(const Workload& w, const PartitionPlan& plan, const StoreGraph& g,
                         const SimConfig& cfg, std::uint64_t seed = 0);

}  // namespace aims
