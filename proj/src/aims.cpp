#include "aims_bench/aims.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

namespace aims {

bool CorruptedObjectsTable::add(ObjectId o, std::int32_t episode) {
  return entries_.emplace(o, episode).second;
}

bool CorruptedObjectsTable::erase(ObjectId o) {
  return entries_.erase(o) != 0;
}

void CorruptedObjectsTable::clear_episode(std::int32_t episode) {
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (it->second == episode) {
      it = entries_.erase(it);
    } else {
      ++it;
    }
  }
}

bool CorruptedObjectsTable::intersects(const std::vector<ObjectId>& objects) const {
  return std::any_of(objects.begin(), objects.end(),
                     [this](ObjectId o) { return contains(o); });
}

std::vector<ObjectId> CorruptedObjectsTable::sorted_objects() const {
  std::vector<ObjectId> out;
  out.reserve(entries_.size());
  for (const auto& [o, ep] : entries_) out.push_back(o);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ObjectId> CorruptedObjectsTable::sorted_objects_of(std::int32_t episode) const {
  std::vector<ObjectId> out;
  for (const auto& [o, ep] : entries_) {
    if (ep == episode) out.push_back(o);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void RecoveryLock::acquire(std::int32_t episode) {
  if (held) throw Error("recovery lock already held by episode " + std::to_string(holder));
  held = true;
  holder = episode;
}

void RecoveryLock::release() {
  held = false;
  holder = -1;
}

void AttackReport::validate() const {
  if (detection_time < commit_time) {
    throw Error("attack report has detection before commit");
  }
}

AdmitDecision admit(const Transaction& txn, const CorruptedObjectsTable& cot,
                    const RecoveryLock& lock) {
  if (lock.held) return {AdmitDecision::Outcome::BlockedByLock};
  for (ObjectId o : txn.sources) {
    if (cot.contains(o)) return {AdmitDecision::Outcome::BlockedByCot};
  }
  for (ObjectId o : txn.destinations) {
    if (cot.contains(o)) return {AdmitDecision::Outcome::BlockedByCot};
  }
  return {AdmitDecision::Outcome::Admit};
}

std::vector<ObjectId> respond(const AttackReport& report, const TransactionLog& log,
                              CorruptedObjectsTable& cot, std::int32_t episode) {
  report.validate();
  if (!log.has_records_for(report.malicious_txn)) {
    throw UnknownTransaction(report.malicious_txn);
  }
  std::set<ObjectId> marked;
  const auto& records = log.records();
  for (auto i = static_cast<std::size_t>(log.first_at_or_after(report.commit_time));
       i < records.size() && records[i].commit_time <= report.detection_time; ++i) {
    marked.insert(records[i].object);
  }
  std::vector<ObjectId> added;
  for (ObjectId o : marked) {
    if (cot.add(o, episode)) added.push_back(o);
  }
  return added;
}

TaintAnalysis analyze_taint(const TransactionLog& log, TxnId t_m) {
  // Single forward pass in commit order: a batch whose transaction is
  // tainted taints every version it writes; a batch reading any tainted
  // version taints its transaction; an undo record inherits the taint of
  // the version it restored from. Reads and restore links always reference
  // versions that predate the record, so one pass reaches the fixpoint.
  std::unordered_set<std::int64_t> tainted_versions;
  auto key = [](ObjectId o, std::int64_t version) {
    return (static_cast<std::int64_t>(o) << 32) | version;
  };
  std::unordered_set<TxnId> tainted_txns;
  TaintAnalysis out;
  std::set<ObjectId> corrupted;

  const auto& records = log.records();
  std::size_t i = 0;
  while (i < records.size()) {
    const std::int64_t batch = records[i].batch;
    std::size_t end = i;
    while (end < records.size() && records[end].batch == batch) ++end;

    const LogRecord& head = records[i];
    if (head.kind == LogRecordKind::Undo) {
      // Compensating writes carry no reads, but their value comes from an
      // earlier version; if that version was corrupted by t_m the restore
      // only laundered the damage. Liveness is per record: unlike
      // transaction batches, an undo batch can be partially invalidated by
      // later episodes.
      for (std::size_t r = i; r < end; ++r) {
        const LogRecord& rec = records[r];
        if (rec.live() && rec.restored_from_version >= 0 &&
            tainted_versions.count(key(rec.object, rec.restored_from_version))) {
          tainted_versions.insert(key(rec.object, rec.version));
          out.tainted_undo_seqs.push_back(rec.seq);
          corrupted.insert(rec.object);
        }
      }
      i = end;
      continue;
    }
    if (!head.live()) {
      i = end;
      continue;
    }
    bool taint = head.txn == t_m || tainted_txns.count(head.txn) != 0;
    if (!taint) {
      for (std::size_t r = i; r < end && !taint; ++r) {
        const LogRecord& rec = records[r];
        if (rec.version > 0 && tainted_versions.count(key(rec.object, rec.version - 1))) {
          taint = true;
        }
      }
      if (taint) {
        tainted_txns.insert(head.txn);
        out.affected.txns.push_back(head.txn);
      }
    }
    if (taint) {
      for (std::size_t r = i; r < end; ++r) {
        tainted_versions.insert(key(records[r].object, records[r].version));
        corrupted.insert(records[r].object);
      }
    }
    i = end;
  }
  out.corrupted_objects.assign(corrupted.begin(), corrupted.end());
  return out;
}

AffectedSet find_affected(const TransactionLog& log, TxnId t_m) {
  return analyze_taint(log, t_m).affected;
}

void apply_transfer(const Transaction& txn, const std::function<Money(ObjectId)>& get,
                    const std::function<void(ObjectId, Money)>& set,
                    std::vector<Money>* out_old, std::vector<Money>* out_new) {
  if (out_old) out_old->clear();
  if (out_new) out_new->clear();
  Money total = 0;
  for (std::size_t i = 0; i < txn.sources.size(); ++i) {
    const ObjectId src = txn.sources[i];
    const Money before = get(src);
    const Money amount =
        round_half_even_div10000(before * static_cast<std::int64_t>(txn.fraction_bp[i]));
    const Money after = before - amount;
    set(src, after);
    total += amount;
    if (out_old) out_old->push_back(before);
    if (out_new) out_new->push_back(after);
  }
  // Floored split so the shares sum to the pool exactly, whatever its sign.
  const auto d = static_cast<Money>(txn.destinations.size());
  Money base = total / d;
  if (total % d != 0 && total < 0) --base;
  Money rem = total - base * d;  // in [0, d)
  for (const ObjectId dst : txn.destinations) {
    const Money before = get(dst);
    const Money gain = base + (rem > 0 ? 1 : 0);
    if (rem > 0) --rem;
    const Money after = before + gain;
    set(dst, after);
    if (out_old) out_old->push_back(before);
    if (out_new) out_new->push_back(after);
  }
}

CompensationRecord recover(RecoveryTarget& state, TransactionLog& log, const AttackReport& report,
                           const AffectedSet& affected, const Workload& w,
                           CorruptedObjectsTable& cot, std::int32_t episode, TimeMs now) {
  report.validate();
  CompensationRecord comp;

  // Phase 1: compensate the malicious transaction, the affected set, and
  // any earlier compensation whose value derives from the attacker's
  // writes. Every corrupted object is then restored to the newest value
  // still backed by a live record (the last clean write), falling back to
  // the initial balance when none remains.
  const TaintAnalysis taint = analyze_taint(log, report.malicious_txn);
  log.invalidate_transaction(report.malicious_txn, episode);
  for (TxnId t : affected.txns) log.invalidate_transaction(t, episode);
  for (const std::int64_t seq : taint.tainted_undo_seqs) {
    log.mutable_records()[static_cast<std::size_t>(seq)].invalidated_by = episode;
  }
  comp.undone = 1 + static_cast<std::int32_t>(affected.txns.size());
  comp.corrupted_objects = taint.corrupted_objects;

  // Shrink the episode's quarantine to exactly the corrupted objects. The
  // response pass may have over-marked (clean writes inside the detection
  // window) or missed objects damaged after the detection timestamp.
  const std::set<ObjectId> corrupted(taint.corrupted_objects.begin(),
                                     taint.corrupted_objects.end());
  for (ObjectId o : cot.sorted_objects_of(episode)) {
    if (!corrupted.count(o)) cot.erase(o);
  }
  for (ObjectId o : corrupted) cot.add(o, episode);

  log.open_batch(report.malicious_txn, now, LogRecordKind::Undo);
  for (ObjectId o : taint.corrupted_objects) {
    Money restored = w.spec.initial_balance;
    std::int64_t source_version = -1;
    Money live = 0;
    std::int64_t version = -1;
    if (log.latest_live_record(o, live, version)) {
      restored = live;
      source_version = version;
    }
    const Money current = state.balance(o);
    log.append(o, current, restored, state.store_of(o), source_version);
    state.set_balance(o, restored);
  }

  // Phase 2: re-execute the affected transactions against the repaired
  // state, in their original commit order.
  for (TxnId t : affected.txns) {
    const Transaction& txn = w.transactions[static_cast<std::size_t>(t)];
    log.open_batch(t, now, LogRecordKind::Redo);
    apply_transfer(
        txn, [&](ObjectId o) { return state.balance(o); },
        [&](ObjectId o, Money v) {
          log.append(o, state.balance(o), v, state.store_of(o));
          state.set_balance(o, v);
        });
    ++comp.redone;
  }

  cot.clear_episode(episode);
  return comp;
}

VerdictEvent ids_verdict(const Transaction& txn, TimeMs commit_request, TimeMs delta) {
  if (delta < 0) throw Error("detection delay must be >= 0");
  return {txn.is_malicious ? Verdict::Malicious : Verdict::Benign, commit_request + delta};
}

}  // namespace aims
