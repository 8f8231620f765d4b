#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "aims_bench/txn_log.hpp"
#include "aims_bench/types.hpp"
#include "aims_bench/workload.hpp"

namespace aims {

// Quarantine set of object ids gating admission. Entries are tagged with
// the recovery episode that added them; episodes are serialized, so an
// object belongs to at most one live episode at a time.
class CorruptedObjectsTable {
 public:
  bool contains(ObjectId o) const { return entries_.count(o) != 0; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  // Returns false (and leaves the table unchanged) if the object is already
  // quarantined.
  bool add(ObjectId o, std::int32_t episode);
  bool erase(ObjectId o);
  void clear_episode(std::int32_t episode);

  bool intersects(const std::vector<ObjectId>& objects) const;
  std::vector<ObjectId> sorted_objects() const;
  std::vector<ObjectId> sorted_objects_of(std::int32_t episode) const;

 private:
  std::unordered_map<ObjectId, std::int32_t> entries_;  // object -> episode
};

struct RecoveryLock {
  bool held = false;
  std::int32_t holder = -1;  // episode id

  void acquire(std::int32_t episode);
  void release();
};

struct AttackReport {
  TxnId malicious_txn = -1;
  TimeMs commit_time = 0;     // t_m^c
  TimeMs detection_time = 0;  // t_m^d, >= commit_time

  void validate() const;  // throws Error on a report violating the invariant
};

// Affected transaction ids in original commit order, excluding t_m itself.
struct AffectedSet {
  std::vector<TxnId> txns;

  bool operator==(const AffectedSet&) const = default;
};

struct AdmitDecision {
  enum class Outcome : std::uint8_t { Admit, BlockedByLock, BlockedByCot };
  Outcome outcome = Outcome::Admit;

  bool admitted() const { return outcome == Outcome::Admit; }
};

// Admission Controller: block while the recovery lock is held or while the
// transaction's read/write set intersects the COT.
AdmitDecision admit(const Transaction& txn, const CorruptedObjectsTable& cot,
                    const RecoveryLock& lock);

// Response Subsystem: quarantine every object written in the closed window
// [t_m^c, t_m^d]. Returns the objects newly added, ascending.
std::vector<ObjectId> respond(const AttackReport& report, const TransactionLog& log,
                              CorruptedObjectsTable& cot, std::int32_t episode);

// Full damage analysis for one attacker: the affected set plus the live
// compensation records whose values derive from tainted versions (an undo
// from an earlier episode may have "restored" an object to a value the
// attacker had already corrupted) and the set of objects holding corrupted
// values.
struct TaintAnalysis {
  AffectedSet affected;
  std::vector<std::int64_t> tainted_undo_seqs;  // record seqs, ascending
  std::vector<ObjectId> corrupted_objects;      // ascending
};

TaintAnalysis analyze_taint(const TransactionLog& log, TxnId t_m);

// Recovery Subsystem, identification step: the least set of committed
// transactions that read, directly or transitively, a version written by
// t_m. Single forward pass over live records in commit order.
AffectedSet find_affected(const TransactionLog& log, TxnId t_m);

struct CompensationRecord {
  std::int32_t undone = 0;  // t_m plus affected transactions
  std::int32_t redone = 0;
  std::vector<ObjectId> corrupted_objects;  // ascending
};

// Interface the recovery step uses to touch store state and to re-execute
// affected transactions against repaired balances.
class RecoveryTarget {
 public:
  virtual ~RecoveryTarget() = default;
  virtual Money balance(ObjectId o) const = 0;
  virtual void set_balance(ObjectId o, Money v) = 0;
  virtual StoreId store_of(ObjectId o) const = 0;
};

// Two-phase recovery: invalidate and undo t_m and the affected set, then
// re-execute affected transactions in original commit order. Also shrinks
// the episode's COT entries to exactly the corrupted objects before redo and
// clears them at the end. Compensation writes are appended to the log with
// commit_time = `now`.
CompensationRecord recover(RecoveryTarget& state, TransactionLog& log, const AttackReport& report,
                           const AffectedSet& affected, const Workload& w,
                           CorruptedObjectsTable& cot, std::int32_t episode, TimeMs now);

enum class Verdict : std::uint8_t { Benign, Malicious };

struct VerdictEvent {
  Verdict verdict = Verdict::Benign;
  TimeMs at = 0;
};

// Perfect detection, delayed by delta: the verdict for a transaction fires
// delta ms after its commit request.
VerdictEvent ids_verdict(const Transaction& txn, TimeMs commit_request, TimeMs delta);

// Applies one transfer to balances reachable through `get`/`set`. Amounts
// are fraction_bp/10000 of the source balance at execution time, rounded
// half to even; the summed amount is split evenly over destinations with the
// remainder going to the earliest ones. `out_old`/`out_new` (parallel to
// txn.read_write_set() order sources-then-destinations) report the values
// for logging when non-null.
void apply_transfer(const Transaction& txn,
                    const std::function<Money(ObjectId)>& get,
                    const std::function<void(ObjectId, Money)>& set,
                    std::vector<Money>* out_old = nullptr,
                    std::vector<Money>* out_new = nullptr);

}  // namespace aims
