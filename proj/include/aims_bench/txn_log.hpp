#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "aims_bench/types.hpp"

namespace aims {

enum class LogRecordKind : std::uint8_t { Original, Undo, Redo };

// One versioned write. Records of one commit share a batch id; a transfer
// produces one record per endpoint. Undo records are compensating writes
// issued by recovery and carry no reads.
struct LogRecord {
  std::int64_t seq = 0;     // global append order
  std::int64_t batch = 0;   // commit batch (atomic group of records)
  TxnId txn = -1;
  ObjectId object = -1;
  Money old_value = 0;
  Money new_value = 0;
  std::int64_t version = 0;  // per-object, starts at 0, gapless
  TimeMs commit_time = 0;
  StoreId store = -1;
  LogRecordKind kind = LogRecordKind::Original;
  // Episode that compensated this record, or -1 while it is live. Live
  // records are the ones that still contribute to the current state.
  std::int32_t invalidated_by = -1;
  // For Undo records: the version of this object whose value was restored,
  // or -1 when the restore fell back to the initial balance. Taint analysis
  // follows this link; a compensation inherits the taint of its source.
  std::int64_t restored_from_version = -1;

  bool live() const { return invalidated_by < 0; }
};

// Ordered, versioned record of every committed write, with per-object
// chains for version lookups.
class TransactionLog {
 public:
  explicit TransactionLog(std::int32_t num_objects = 0);

  void reset(std::int32_t num_objects);

  std::int64_t open_batch(TxnId txn, TimeMs commit_time, LogRecordKind kind);
  // Appends to the batch opened last. Returns the new version of the object.
  // `restored_from_version` is only meaningful for Undo records.
  std::int64_t append(ObjectId object, Money old_value, Money new_value, StoreId store,
                      std::int64_t restored_from_version = -1);

  // new_value and version of the most recent live record of `o`.
  bool latest_live_record(ObjectId o, Money& value, std::int64_t& version) const;

  const std::vector<LogRecord>& records() const { return records_; }
  std::vector<LogRecord>& mutable_records() { return records_; }

  std::int64_t next_version(ObjectId o) const;
  // Indices into records() of all writes to `o`, in version order.
  const std::vector<std::int64_t>& chain(ObjectId o) const;
  // Indices into records() of all writes by `txn`, in append order.
  const std::vector<std::int64_t>& by_txn(TxnId txn) const;
  // Index of the first record with commit_time >= t (records are appended in
  // non-decreasing commit-time order).
  std::int64_t first_at_or_after(TimeMs t) const;

  // new_value of the most recent live record of `o`, if any record is live.
  bool latest_live_value(ObjectId o, Money& out) const;

  // Marks every live record of `txn` as compensated by `episode`.
  void invalidate_transaction(TxnId txn, std::int32_t episode);

  // Objects written by any live record of `txn`, ascending, deduplicated.
  std::vector<ObjectId> live_write_set(TxnId txn) const;

  bool has_records_for(TxnId txn) const;

  // Verifies per-object chains: versions gapless from 0 and each record's
  // old_value equal to its predecessor's new_value. Throws MissingVersion on
  // the first breach.
  void audit_chains() const;

 private:
  std::vector<LogRecord> records_;
  std::vector<std::vector<std::int64_t>> chains_;  // object -> record indices
  std::unordered_map<TxnId, std::vector<std::int64_t>> txn_index_;
  std::int64_t next_batch_ = 0;
  std::int64_t current_batch_ = -1;
  TxnId current_txn_ = -1;
  TimeMs current_time_ = 0;
  LogRecordKind current_kind_ = LogRecordKind::Original;
};

}  // namespace aims
