#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "aims_bench/partition.hpp"
#include "aims_bench/sim.hpp"
#include "aims_bench/txn_log.hpp"
#include "aims_bench/workload.hpp"

// Brute-force reference implementations, used by tests, the acceptance
// suite, and the `verify` subcommand. They deliberately share no code with
// the paths they check.
namespace aims::reference {

// Fixpoint closure: seed {t_m}, repeatedly add any transaction whose live
// records read a version written by the current set, return the set minus
// t_m. `log_prefix` limits the view to the first N records (-1 = all);
// `as_of_episode` treats records invalidated by episodes >= that id as still
// live, reconstructing the view an earlier episode saw (-1 = final view).
std::set<TxnId> affected_closure_bruteforce(const TransactionLog& log, TxnId t_m,
                                            std::int64_t log_prefix = -1,
                                            std::int32_t as_of_episode = -1);

// Serial re-execution: applies every transaction in `order` (default: the
// workload's id order) except those in `exclude`, with its own independently
// written transfer arithmetic. Returns final balances by object id.
std::vector<Money> clean_replay(const Workload& w, const std::set<TxnId>& exclude,
                                const std::optional<std::vector<TxnId>>& order = std::nullopt);

struct ExhaustiveResult {
  PartitionPlan plan;
  std::int64_t objective = 0;
  std::int64_t enumerated = 0;
};

// Enumerates every assignment of objects to stores, filters by the
// distribution and capacity constraints, and returns a minimizer of the
// summed communication cost (ties: lexicographically smallest assignment).
// Throws InstanceTooLarge when stores^objects exceeds `bound`, NoFeasiblePlan
// when the exhaustion proves none exists.
ExhaustiveResult exhaustive_partition(const Workload& w, const StoreGraph& g,
                                      std::int64_t bound = 10'000'000);

// Independent evaluation of the summed objective for cross-checking
// plan_objective.
std::int64_t evaluate_plan_cost(const PartitionPlan& plan, const Workload& w,
                                const StoreGraph& g);

struct AuditIssue {
  TimeMs time = 0;
  TxnId txn = -1;
  std::string what;
};

// Replays a trace against the workload and reports every admission that
// overlapped the contemporaneous COT or happened while the recovery lock was
// held, plus malformed episode sequencing.
std::vector<AuditIssue> audit_admission_safety(const SimTrace& trace, const Workload& w);

}  // namespace aims::reference
