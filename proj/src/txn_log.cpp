#include "aims_bench/txn_log.hpp"

#include <algorithm>

namespace aims {

TransactionLog::TransactionLog(std::int32_t num_objects) {
  reset(num_objects);
}

void TransactionLog::reset(std::int32_t num_objects) {
  records_.clear();
  chains_.assign(static_cast<std::size_t>(num_objects), {});
  txn_index_.clear();
  next_batch_ = 0;
  current_batch_ = -1;
  current_txn_ = -1;
  current_time_ = 0;
  current_kind_ = LogRecordKind::Original;
}

std::int64_t TransactionLog::open_batch(TxnId txn, TimeMs commit_time, LogRecordKind kind) {
  current_batch_ = next_batch_++;
  current_txn_ = txn;
  current_time_ = commit_time;
  current_kind_ = kind;
  return current_batch_;
}

std::int64_t TransactionLog::append(ObjectId object, Money old_value, Money new_value,
                                    StoreId store, std::int64_t restored_from_version) {
  if (current_batch_ < 0) throw Error("append without an open batch");
  LogRecord rec;
  rec.seq = static_cast<std::int64_t>(records_.size());
  rec.batch = current_batch_;
  rec.txn = current_txn_;
  rec.object = object;
  rec.old_value = old_value;
  rec.new_value = new_value;
  rec.version = next_version(object);
  rec.commit_time = current_time_;
  rec.store = store;
  rec.kind = current_kind_;
  rec.restored_from_version = restored_from_version;
  if (!records_.empty() && rec.commit_time < records_.back().commit_time) {
    throw Error("log appends must be in non-decreasing commit-time order");
  }
  chains_[static_cast<std::size_t>(object)].push_back(rec.seq);
  txn_index_[current_txn_].push_back(rec.seq);
  records_.push_back(rec);
  return rec.version;
}

const std::vector<std::int64_t>& TransactionLog::by_txn(TxnId txn) const {
  static const std::vector<std::int64_t> kEmpty;
  const auto it = txn_index_.find(txn);
  return it == txn_index_.end() ? kEmpty : it->second;
}

std::int64_t TransactionLog::first_at_or_after(TimeMs t) const {
  const auto it = std::lower_bound(records_.begin(), records_.end(), t,
                                   [](const LogRecord& r, TimeMs v) { return r.commit_time < v; });
  return it - records_.begin();
}

std::int64_t TransactionLog::next_version(ObjectId o) const {
  return static_cast<std::int64_t>(chains_[static_cast<std::size_t>(o)].size());
}

const std::vector<std::int64_t>& TransactionLog::chain(ObjectId o) const {
  return chains_[static_cast<std::size_t>(o)];
}

bool TransactionLog::latest_live_value(ObjectId o, Money& out) const {
  std::int64_t version = -1;
  return latest_live_record(o, out, version);
}

bool TransactionLog::latest_live_record(ObjectId o, Money& value, std::int64_t& version) const {
  const auto& ch = chains_[static_cast<std::size_t>(o)];
  for (auto it = ch.rbegin(); it != ch.rend(); ++it) {
    const LogRecord& rec = records_[static_cast<std::size_t>(*it)];
    if (rec.live()) {
      value = rec.new_value;
      version = rec.version;
      return true;
    }
  }
  return false;
}

void TransactionLog::invalidate_transaction(TxnId txn, std::int32_t episode) {
  for (std::int64_t idx : by_txn(txn)) {
    auto& rec = records_[static_cast<std::size_t>(idx)];
    if (rec.live()) rec.invalidated_by = episode;
  }
}

std::vector<ObjectId> TransactionLog::live_write_set(TxnId txn) const {
  std::vector<ObjectId> out;
  for (std::int64_t idx : by_txn(txn)) {
    const auto& rec = records_[static_cast<std::size_t>(idx)];
    if (rec.live()) out.push_back(rec.object);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool TransactionLog::has_records_for(TxnId txn) const {
  return !by_txn(txn).empty();
}

void TransactionLog::audit_chains() const {
  for (std::size_t o = 0; o < chains_.size(); ++o) {
    std::int64_t expect_version = 0;
    const LogRecord* prev = nullptr;
    for (std::int64_t idx : chains_[o]) {
      const LogRecord& rec = records_[static_cast<std::size_t>(idx)];
      if (rec.version != expect_version) {
        throw MissingVersion("object " + std::to_string(o) + " has version gap at " +
                             std::to_string(rec.version));
      }
      if (prev != nullptr) {
        if (rec.old_value != prev->new_value) {
          throw MissingVersion("object " + std::to_string(o) + " breaks old/new linkage at version " +
                               std::to_string(rec.version));
        }
        if (rec.commit_time < prev->commit_time) {
          throw MissingVersion("object " + std::to_string(o) + " has non-monotone commit times");
        }
      }
      prev = &rec;
      ++expect_version;
    }
  }
}

}  // namespace aims
