#pragma once

#include <set>
#include <sstream>
#include <string>

#include "aims_bench/oracle.hpp"
#include "aims_bench/partition.hpp"
#include "aims_bench/sim.hpp"
#include "aims_bench/workload.hpp"

namespace testutil {

inline aims::WorkloadSpec small_spec(std::int32_t n, double beta, std::int32_t m = 0,
                                     std::int32_t alpha = 6, std::int32_t tenants = 3) {
  aims::WorkloadSpec s;
  s.n = n;
  s.alpha = alpha;
  s.beta = beta;
  s.num_accounts = std::max(n * 12, alpha * 2 + 2);
  s.initial_balance = 1'000'000;
  s.arrival_rate = 10.0;
  s.m = m;
  s.num_tenants = tenants;
  return s;
}

// Workload with hand-placed transactions over explicit accounts. Spec fields
// are set loosely; callers fill transactions and then derive tenants.
inline aims::Workload hand_workload(std::int32_t num_accounts, std::int32_t alpha = 8) {
  aims::Workload w;
  w.spec.n = 0;
  w.spec.alpha = alpha;
  w.spec.beta = 0.0;
  w.spec.num_accounts = num_accounts;
  w.spec.initial_balance = 1'000'000;
  w.spec.arrival_rate = 10.0;
  w.spec.num_tenants = 1;
  return w;
}

inline aims::Transaction transfer(aims::TxnId id, std::vector<aims::ObjectId> src,
                                  std::vector<aims::ObjectId> dst, aims::TimeMs at,
                                  bool malicious = false, std::int32_t frac_bp = 500) {
  aims::Transaction t;
  t.id = id;
  if (src.size() == 1) {
    t.kind = aims::TxnKind::Distribute;
  } else if (dst.size() == 1) {
    t.kind = aims::TxnKind::Collect;
  } else {
    t.kind = aims::TxnKind::ManyToMany;
  }
  t.sources = std::move(src);
  t.destinations = std::move(dst);
  t.fraction_bp.assign(t.sources.size(), frac_bp);
  t.tenant = 0;
  t.is_malicious = malicious;
  t.arrival_time = at;
  return t;
}

inline void finish(aims::Workload& w) {
  w.spec.n = static_cast<std::int32_t>(w.transactions.size());
  w.spec.m = 0;
  for (const auto& t : w.transactions) {
    if (t.is_malicious) ++w.spec.m;
  }
  w.tenant_of_object = aims::derive_object_tenants(w.spec, w.transactions);
}

inline aims::StoreGraph one_store(std::int64_t capacity) {
  return aims::StoreGraph({"M1"}, {capacity});
}

inline aims::Money total(const std::vector<aims::Money>& balances) {
  aims::Money sum = 0;
  for (const auto b : balances) sum += b;
  return sum;
}

inline std::string trace_text(const aims::SimTrace& trace) {
  std::ostringstream ss;
  aims::write_trace(trace, ss);
  return ss.str();
}

inline std::set<aims::TxnId> malicious_ids(const aims::Workload& w) {
  std::set<aims::TxnId> out;
  for (const auto& t : w.transactions) {
    if (t.is_malicious) out.insert(t.id);
  }
  return out;
}

}  // namespace testutil
