#include "aims_bench/oracle.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace aims::reference {

namespace {

// View of one record that the closure below works from. Built afresh so the
// oracle does not lean on TransactionLog's indexes.
struct RecView {
  TxnId txn;
  ObjectId object;
  std::int64_t version;
  std::int64_t batch;
  std::int64_t restored_from;  // undo source version, -1 otherwise
  bool live;
  bool is_undo;  // compensations carry no reads and no transaction identity
};

std::vector<RecView> make_view(const TransactionLog& log, std::int64_t log_prefix,
                               std::int32_t as_of_episode) {
  std::vector<RecView> view;
  const auto& records = log.records();
  const std::size_t limit =
      log_prefix < 0 ? records.size()
                     : std::min(records.size(), static_cast<std::size_t>(log_prefix));
  view.reserve(limit);
  for (std::size_t i = 0; i < limit; ++i) {
    const LogRecord& r = records[i];
    const bool live =
        r.invalidated_by < 0 || (as_of_episode >= 0 && r.invalidated_by >= as_of_episode);
    view.push_back({r.txn, r.object, r.version, r.batch, r.restored_from_version, live,
                    r.kind == LogRecordKind::Undo});
  }
  return view;
}

}  // namespace

std::set<TxnId> affected_closure_bruteforce(const TransactionLog& log, TxnId t_m,
                                            std::int64_t log_prefix, std::int32_t as_of_episode) {
  const std::vector<RecView> view = make_view(log, log_prefix, as_of_episode);

  std::set<TxnId> tainted = {t_m};
  std::set<std::pair<ObjectId, std::int64_t>> tainted_versions;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& r : view) {
      if (!r.live) continue;
      if (r.is_undo) {
        // a restore from a corrupted version re-publishes corrupted data
        if (r.restored_from >= 0 && tainted_versions.count({r.object, r.restored_from}) &&
            tainted_versions.insert({r.object, r.version}).second) {
          changed = true;
        }
        continue;
      }
      if (tainted.count(r.txn)) {
        if (tainted_versions.insert({r.object, r.version}).second) changed = true;
        continue;
      }
      if (r.version > 0 && tainted_versions.count({r.object, r.version - 1})) {
        tainted.insert(r.txn);
        changed = true;
      }
    }
  }
  tainted.erase(t_m);
  return tainted;
}

std::vector<Money> clean_replay(const Workload& w, const std::set<TxnId>& exclude,
                                const std::optional<std::vector<TxnId>>& order) {
  std::vector<Money> balances(static_cast<std::size_t>(w.spec.num_accounts),
                              w.spec.initial_balance);

  auto execute = [&](const Transaction& t) {
    // Transfer semantics rewritten here on purpose: each source loses
    // round-to-even(balance * fraction), the pooled amount is split evenly
    // over destinations with the remainder cents going to the earliest.
    std::int64_t pool = 0;
    for (std::size_t i = 0; i < t.sources.size(); ++i) {
      const auto o = static_cast<std::size_t>(t.sources[i]);
      const std::int64_t product =
          balances[o] * static_cast<std::int64_t>(t.fraction_bp[i]);
      std::int64_t amount = product / 10000;
      const std::int64_t rem = product % 10000;
      if (rem > 5000 || (rem == 5000 && amount % 2 != 0)) ++amount;
      balances[o] -= amount;
      pool += amount;
    }
    const auto nd = static_cast<std::int64_t>(t.destinations.size());
    std::int64_t floor_share = pool / nd;
    if (pool % nd != 0 && pool < 0) --floor_share;
    const std::int64_t extra = pool - floor_share * nd;
    for (std::size_t i = 0; i < t.destinations.size(); ++i) {
      balances[static_cast<std::size_t>(t.destinations[i])] +=
          floor_share + (static_cast<std::int64_t>(i) < extra ? 1 : 0);
    }
  };

  if (order) {
    for (TxnId id : *order) {
      if (exclude.count(id)) continue;
      execute(w.transactions.at(static_cast<std::size_t>(id)));
    }
  } else {
    for (const auto& t : w.transactions) {
      if (exclude.count(t.id)) continue;
      execute(t);
    }
  }
  return balances;
}

std::int64_t evaluate_plan_cost(const PartitionPlan& plan, const Workload& w,
                                const StoreGraph& g) {
  std::int64_t total = 0;
  for (const auto& t : w.transactions) {
    // max pairwise delay over the stores this transaction touches
    std::vector<StoreId> stores;
    for (ObjectId o : t.sources) stores.push_back(plan.assignment.at(static_cast<std::size_t>(o)));
    for (ObjectId o : t.destinations) {
      stores.push_back(plan.assignment.at(static_cast<std::size_t>(o)));
    }
    std::sort(stores.begin(), stores.end());
    stores.erase(std::unique(stores.begin(), stores.end()), stores.end());
    TimeMs worst = 0;
    for (std::size_t a = 0; a < stores.size(); ++a) {
      for (std::size_t b = a + 1; b < stores.size(); ++b) {
        worst = std::max(worst, g.delay(stores[a], stores[b]));
      }
    }
    total += worst;
  }
  return total;
}

ExhaustiveResult exhaustive_partition(const Workload& w, const StoreGraph& g, std::int64_t bound) {
  const std::int64_t k = g.store_count();
  const std::int64_t d = w.spec.num_accounts;
  // assignments = k^d, checked incrementally against the bound
  std::int64_t assignments = 1;
  for (std::int64_t i = 0; i < d; ++i) {
    if (assignments > bound / k) {
      throw InstanceTooLarge("k^objects exceeds the enumeration bound " + std::to_string(bound));
    }
    assignments *= k;
  }

  const std::vector<TxnId> multi_tenant = w.multi_tenant_transactions();

  ExhaustiveResult best;
  bool have_best = false;
  PartitionPlan plan;
  plan.assignment.assign(static_cast<std::size_t>(d), 0);
  std::vector<std::int64_t> load(static_cast<std::size_t>(k), 0);

  for (std::int64_t counter = 0; counter < assignments; ++counter) {
    // decode counter in base k, most significant digit = object 0 so the
    // first feasible minimizer found is the lexicographically smallest
    std::int64_t rest = counter;
    for (std::int64_t o = d - 1; o >= 0; --o) {
      plan.assignment[static_cast<std::size_t>(o)] = static_cast<StoreId>(rest % k);
      rest /= k;
    }
    ++best.enumerated;

    std::fill(load.begin(), load.end(), 0);
    for (const StoreId s : plan.assignment) ++load[static_cast<std::size_t>(s)];
    bool ok = true;
    for (StoreId s = 0; s < k && ok; ++s) {
      ok = load[static_cast<std::size_t>(s)] <= g.capacity(s);
    }
    for (std::size_t i = 0; i < multi_tenant.size() && ok; ++i) {
      const Transaction& t = w.transactions[static_cast<std::size_t>(multi_tenant[i])];
      StoreId first = -1;
      bool multi = false;
      for (ObjectId o : t.sources) {
        const StoreId s = plan.assignment[static_cast<std::size_t>(o)];
        if (first < 0) first = s;
        if (s != first) multi = true;
      }
      for (ObjectId o : t.destinations) {
        const StoreId s = plan.assignment[static_cast<std::size_t>(o)];
        if (first < 0) first = s;
        if (s != first) multi = true;
      }
      ok = multi;
    }
    if (!ok) continue;

    const std::int64_t cost = evaluate_plan_cost(plan, w, g);
    if (!have_best || cost < best.objective) {
      best.plan = plan;
      best.objective = cost;
      have_best = true;
    }
  }
  if (!have_best) {
    throw NoFeasiblePlan("exhaustive search proved no feasible plan exists among " +
                         std::to_string(assignments) + " assignments");
  }
  return best;
}

std::vector<AuditIssue> audit_admission_safety(const SimTrace& trace, const Workload& w) {
  std::vector<AuditIssue> issues;

  auto detail_list = [](const std::string& detail, const std::string& key) {
    std::vector<std::int64_t> out;
    std::istringstream ss(detail);
    std::string tok;
    while (ss >> tok) {
      if (tok.rfind(key + "=", 0) != 0) continue;
      const std::string payload = tok.substr(key.size() + 1);
      if (payload.empty()) return out;
      std::size_t start = 0;
      while (start <= payload.size()) {
        const std::size_t pos = payload.find(',', start);
        const std::string item = payload.substr(start, pos - start);
        out.push_back(std::stoll(item));
        if (pos == std::string::npos) break;
        start = pos + 1;
      }
      return out;
    }
    return out;
  };

  std::set<ObjectId> cot;
  bool lock_held = false;
  std::int64_t open_episode = -1;
  for (const auto& e : trace.events) {
    switch (e.kind) {
      case TraceKind::Respond: {
        if (lock_held) {
          issues.push_back({e.time, e.txn, "episode started while the lock was already held"});
        }
        lock_held = true;
        open_episode = e.txn;
        for (const std::int64_t o : detail_list(e.detail, "objs")) {
          cot.insert(static_cast<ObjectId>(o));
        }
        break;
      }
      case TraceKind::Affected: {
        lock_held = false;
        cot.clear();
        for (const std::int64_t o : detail_list(e.detail, "cot")) {
          cot.insert(static_cast<ObjectId>(o));
        }
        break;
      }
      case TraceKind::Recovered: {
        cot.clear();
        open_episode = -1;
        break;
      }
      case TraceKind::Admit: {
        if (lock_held) {
          issues.push_back({e.time, e.txn, "admitted while the recovery lock was held"});
        }
        const Transaction& t = w.transactions.at(static_cast<std::size_t>(e.txn));
        for (const ObjectId o : t.read_write_set()) {
          if (cot.count(o)) {
            issues.push_back({e.time, e.txn,
                              "admitted while object " + std::to_string(o) + " was quarantined"});
            break;
          }
        }
        break;
      }
      default:
        break;
    }
  }
  if (lock_held || open_episode >= 0) {
    issues.push_back({0, -1, "trace ended with an unfinished episode"});
  }
  return issues;
}

}  // namespace aims::reference
