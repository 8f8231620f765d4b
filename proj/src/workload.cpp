#include "aims_bench/workload.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <set>

#include "aims_bench/rng.hpp"

namespace aims {

namespace {

// Sub-stream tags for deriving independent RNG sequences from one seed.
enum : std::uint64_t {
  kStreamGraph = 1,
  kStreamTypes = 2,
  kStreamFractions = 3,
  kStreamMalicious = 4,
  kStreamArrivals = 5,
};

}  // namespace

void WorkloadSpec::validate() const {
  if (n < 0) throw InvalidSpec("n must be >= 0");
  if (alpha < 2) throw InvalidSpec("alpha must be >= 2");
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidSpec("beta must be in [0, 1]");
  if (m < 0 || m > n) throw InvalidSpec("m must be in [0, n]");
  if (num_accounts < alpha + 1) throw InvalidSpec("num_accounts must be >= alpha + 1");
  if (num_tenants < 1) throw InvalidSpec("num_tenants must be >= 1");
  if (!(arrival_rate > 0.0)) throw InvalidSpec("arrival_rate must be > 0");
  if (initial_balance < 0) throw InvalidSpec("initial_balance must be >= 0");
}

WorkloadSpec table2_spec() {
  WorkloadSpec s;
  s.n = 5000;
  s.alpha = 10;
  s.beta = 0.5;
  s.num_accounts = 50'000;
  s.initial_balance = 1'000'000;
  s.arrival_rate = 10.0;
  s.m = 0;
  s.num_tenants = 10;
  return s;
}

std::vector<ObjectId> Transaction::read_write_set() const {
  std::vector<ObjectId> rw;
  rw.reserve(sources.size() + destinations.size());
  rw.insert(rw.end(), sources.begin(), sources.end());
  rw.insert(rw.end(), destinations.begin(), destinations.end());
  std::sort(rw.begin(), rw.end());
  return rw;
}

bool Workload::is_multi_tenant(const Transaction& t) const {
  for (ObjectId o : t.sources) {
    if (tenant_of_object[static_cast<std::size_t>(o)] == kSharedTenant) return true;
  }
  for (ObjectId o : t.destinations) {
    if (tenant_of_object[static_cast<std::size_t>(o)] == kSharedTenant) return true;
  }
  return false;
}

std::vector<TxnId> Workload::multi_tenant_transactions() const {
  std::vector<TxnId> out;
  for (const auto& t : transactions) {
    if (is_multi_tenant(t)) out.push_back(t.id);
  }
  return out;
}

void for_each_dependency_edge(std::int32_t n, double beta, std::uint64_t seed,
                              const std::function<void(std::int32_t, std::int32_t)>& fn) {
  Rng rng(seed);
  for (std::int32_t i = 0; i < n; ++i) {
    for (std::int32_t j = i + 1; j < n; ++j) {
      if (rng.bernoulli(beta)) fn(i, j);
    }
  }
}

DependencyGraph build_dependency_graph(std::int32_t n, double beta, std::uint64_t seed) {
  DependencyGraph g;
  g.nodes = n;
  for_each_dependency_edge(n, beta, seed,
                           [&](std::int32_t i, std::int32_t j) { g.edges.emplace_back(i, j); });
  return g;
}

namespace {

// Endpoint-slot grouping. Every transaction owns a fixed run of slots
// (sources first, destinations after). Slots that end up in one group get
// the same account id, which is how dependent transactions come to share an
// object. Two slots of the same transaction must never share a group: that
// keeps all endpoints of a transaction distinct.
//
// One slot per transaction is reserved as its "hub" slot. Hub groups contain
// reserved slots only, so any two hub groups are disjoint by construction;
// merging them is the always-feasible fallback for edges that small-group
// unions cannot cover (dense graphs make strictly pairwise sharing
// impossible once per-transaction degrees exceed endpoint counts).
class SlotGrouper {
 public:
  SlotGrouper(const std::vector<std::int32_t>& slot_base, std::int32_t n)
      : slot_base_(slot_base), n_(n) {
    const std::int32_t total = slot_base_[static_cast<std::size_t>(n)];
    parent_.resize(static_cast<std::size_t>(total));
    std::iota(parent_.begin(), parent_.end(), 0);
    size_.assign(static_cast<std::size_t>(total), 1);
    is_hub_.assign(static_cast<std::size_t>(total), false);
    txns_.resize(static_cast<std::size_t>(total));
    for (std::int32_t t = 0; t < n; ++t) {
      for (std::int32_t s = slot_base_[t]; s < slot_base_[t + 1]; ++s) {
        txns_[static_cast<std::size_t>(s)] = {t};
      }
    }
  }

  void mark_hub(std::int32_t slot) { is_hub_[static_cast<std::size_t>(slot)] = true; }

  std::int32_t find(std::int32_t x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      parent_[static_cast<std::size_t>(x)] =
          parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
      x = parent_[static_cast<std::size_t>(x)];
    }
    return x;
  }

  // Covers edge (i, j): afterwards some group holds a slot of each.
  void cover(std::int32_t i, std::int32_t j, std::int32_t hub_i, std::int32_t hub_j) {
    if (find(hub_i) == find(hub_j)) return;  // dense fast path

    collect_roots(i, roots_i_);
    collect_roots(j, roots_j_);
    for (std::int32_t ri : roots_i_) {
      for (std::int32_t rj : roots_j_) {
        if (ri == rj) return;  // already share a group
      }
    }

    // Smallest compatible pair of non-hub groups; singletons win, so fresh
    // shared accounts are preferred while free endpoints last.
    std::int32_t best_i = -1;
    std::int32_t best_j = -1;
    std::size_t best_size = kMaxGroup * 2 + 1;
    for (std::int32_t ri : roots_i_) {
      if (is_hub_[static_cast<std::size_t>(ri)]) continue;
      const auto& ti = txns_[static_cast<std::size_t>(ri)];
      if (ti.size() > kMaxGroup) continue;
      for (std::int32_t rj : roots_j_) {
        if (is_hub_[static_cast<std::size_t>(rj)]) continue;
        const auto& tj = txns_[static_cast<std::size_t>(rj)];
        if (tj.size() > kMaxGroup) continue;
        const std::size_t sz = ti.size() + tj.size();
        if (sz >= best_size) continue;
        if (!disjoint(ti, tj)) continue;
        best_size = sz;
        best_i = ri;
        best_j = rj;
      }
    }
    if (best_i >= 0) {
      unite(best_i, best_j);
    } else {
      unite(find(hub_i), find(hub_j));
    }
  }

  // account id per slot, numbering groups in first-use order.
  std::vector<ObjectId> assign_accounts(std::int32_t& groups_out) {
    const auto total = static_cast<std::int32_t>(parent_.size());
    std::vector<ObjectId> account(static_cast<std::size_t>(total), -1);
    std::vector<ObjectId> of_root(static_cast<std::size_t>(total), -1);
    ObjectId next = 0;
    for (std::int32_t s = 0; s < total; ++s) {
      const std::int32_t r = find(s);
      if (of_root[static_cast<std::size_t>(r)] < 0) {
        of_root[static_cast<std::size_t>(r)] = next++;
      }
      account[static_cast<std::size_t>(s)] = of_root[static_cast<std::size_t>(r)];
    }
    groups_out = next;
    return account;
  }

 private:
  static constexpr std::size_t kMaxGroup = 32;

  void collect_roots(std::int32_t txn, std::vector<std::int32_t>& out) {
    out.clear();
    for (std::int32_t s = slot_base_[txn]; s < slot_base_[txn + 1]; ++s) {
      out.push_back(find(s));
    }
  }

  static bool disjoint(const std::vector<std::int32_t>& a, const std::vector<std::int32_t>& b) {
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    return std::none_of(small.begin(), small.end(), [&](std::int32_t t) {
      return std::binary_search(large.begin(), large.end(), t);
    });
  }

  void unite(std::int32_t ra, std::int32_t rb) {
    if (size_[static_cast<std::size_t>(ra)] < size_[static_cast<std::size_t>(rb)]) std::swap(ra, rb);
    parent_[static_cast<std::size_t>(rb)] = ra;
    size_[static_cast<std::size_t>(ra)] += size_[static_cast<std::size_t>(rb)];
    const bool hub = is_hub_[static_cast<std::size_t>(ra)] || is_hub_[static_cast<std::size_t>(rb)];
    is_hub_[static_cast<std::size_t>(ra)] = hub;
    if (!hub) {
      auto& ta = txns_[static_cast<std::size_t>(ra)];
      auto& tb = txns_[static_cast<std::size_t>(rb)];
      std::vector<std::int32_t> merged;
      merged.reserve(ta.size() + tb.size());
      std::merge(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(merged));
      ta = std::move(merged);
      tb.clear();
      tb.shrink_to_fit();
    }
  }

  const std::vector<std::int32_t>& slot_base_;
  std::int32_t n_;
  std::vector<std::int32_t> parent_;
  std::vector<std::int32_t> size_;
  std::vector<bool> is_hub_;
  std::vector<std::vector<std::int32_t>> txns_;  // per root; unused for hubs
  std::vector<std::int32_t> roots_i_;
  std::vector<std::int32_t> roots_j_;
};

}  // namespace

std::vector<TenantId> derive_object_tenants(const WorkloadSpec& spec,
                                            const std::vector<Transaction>& txns) {
  // -2 = untouched so far
  std::vector<TenantId> tenant(static_cast<std::size_t>(spec.num_accounts), -2);
  auto touch = [&](ObjectId o, TenantId t) {
    auto& cur = tenant[static_cast<std::size_t>(o)];
    if (cur == -2) {
      cur = t;
    } else if (cur != t) {
      cur = kSharedTenant;
    }
  };
  for (const auto& txn : txns) {
    for (ObjectId o : txn.sources) touch(o, txn.tenant);
    for (ObjectId o : txn.destinations) touch(o, txn.tenant);
  }
  for (std::size_t o = 0; o < tenant.size(); ++o) {
    if (tenant[o] == -2) {
      tenant[o] = static_cast<TenantId>(o % static_cast<std::size_t>(spec.num_tenants));
    }
  }
  return tenant;
}

Workload generate_workload(const WorkloadSpec& spec, std::uint64_t seed, ArrivalMode mode) {
  spec.validate();
  const std::int32_t n = spec.n;

  // Kinds and fan degrees fix the endpoint slot layout.
  Rng types(derive_seed(seed, kStreamTypes));
  std::vector<TxnKind> kinds(static_cast<std::size_t>(n));
  std::vector<std::int32_t> n_src(static_cast<std::size_t>(n));
  std::vector<std::int32_t> n_dst(static_cast<std::size_t>(n));
  std::vector<std::int32_t> slot_base(static_cast<std::size_t>(n) + 1, 0);
  for (std::int32_t i = 0; i < n; ++i) {
    switch (types.uniform_int(0, 2)) {
      case 0:
        kinds[i] = TxnKind::Distribute;
        n_src[i] = 1;
        n_dst[i] = static_cast<std::int32_t>(types.uniform_int(2, spec.alpha));
        break;
      case 1:
        kinds[i] = TxnKind::Collect;
        n_src[i] = static_cast<std::int32_t>(types.uniform_int(2, spec.alpha));
        n_dst[i] = 1;
        break;
      default:
        kinds[i] = TxnKind::ManyToMany;
        n_src[i] = static_cast<std::int32_t>(types.uniform_int(2, spec.alpha));
        n_dst[i] = static_cast<std::int32_t>(types.uniform_int(2, spec.alpha));
        break;
    }
    slot_base[i + 1] = slot_base[i] + n_src[i] + n_dst[i];
    if (n_src[i] + n_dst[i] > spec.num_accounts) {
      throw InfeasibleObjectAssignment(
          "transaction " + std::to_string(i) + " needs " + std::to_string(n_src[i] + n_dst[i]) +
          " distinct accounts but only " + std::to_string(spec.num_accounts) + " exist");
    }
  }

  SlotGrouper grouper(slot_base, n);
  // Alternate the hub slot between the source side and the destination side
  // so hub accounts both send and receive.
  std::vector<std::int32_t> hub_slot(static_cast<std::size_t>(n));
  for (std::int32_t i = 0; i < n; ++i) {
    hub_slot[i] = (i % 2 == 0) ? slot_base[i] : slot_base[i + 1] - 1;
    grouper.mark_hub(hub_slot[i]);
  }

  for_each_dependency_edge(n, spec.beta, derive_seed(seed, kStreamGraph),
                           [&](std::int32_t i, std::int32_t j) {
                             grouper.cover(i, j, hub_slot[i], hub_slot[j]);
                           });

  std::int32_t groups = 0;
  const std::vector<ObjectId> slot_account = grouper.assign_accounts(groups);
  if (groups > spec.num_accounts) {
    throw InfeasibleObjectAssignment(
        "object assignment needs " + std::to_string(groups) + " distinct accounts but only " +
        std::to_string(spec.num_accounts) + " exist; raise num_accounts or beta density");
  }

  Workload w;
  w.spec = spec;
  w.transactions.resize(static_cast<std::size_t>(n));

  Rng fracs(derive_seed(seed, kStreamFractions));
  Rng arrivals(derive_seed(seed, kStreamArrivals));
  double poisson_cum_ms = 0.0;
  for (std::int32_t i = 0; i < n; ++i) {
    Transaction& t = w.transactions[static_cast<std::size_t>(i)];
    t.id = i;
    t.kind = kinds[i];
    t.sources.assign(slot_account.begin() + slot_base[i],
                     slot_account.begin() + slot_base[i] + n_src[i]);
    t.destinations.assign(slot_account.begin() + slot_base[i] + n_src[i],
                          slot_account.begin() + slot_base[i + 1]);
    t.fraction_bp.resize(static_cast<std::size_t>(n_src[i]));
    for (auto& f : t.fraction_bp) {
      f = static_cast<std::int32_t>(fracs.uniform_int(100, 1000));
    }
    t.tenant = static_cast<TenantId>(i % spec.num_tenants);
    if (mode == ArrivalMode::Fixed) {
      t.arrival_time = static_cast<TimeMs>(
          std::llround(static_cast<double>(i) * 1000.0 / spec.arrival_rate));
    } else {
      poisson_cum_ms += arrivals.exponential(spec.arrival_rate) * 1000.0;
      t.arrival_time = static_cast<TimeMs>(std::llround(poisson_cum_ms));
    }
  }

  Rng mal(derive_seed(seed, kStreamMalicious));
  std::vector<std::int32_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (std::int32_t k = 0; k < spec.m; ++k) {
    const auto pick = static_cast<std::int32_t>(mal.uniform_int(k, n - 1));
    std::swap(order[k], order[pick]);
    w.transactions[static_cast<std::size_t>(order[k])].is_malicious = true;
  }

  w.tenant_of_object = derive_object_tenants(spec, w.transactions);
  return w;
}

DependencyGraph realized_dependency_graph(const Workload& w) {
  std::vector<std::vector<TxnId>> users(static_cast<std::size_t>(w.spec.num_accounts));
  for (const auto& t : w.transactions) {
    for (ObjectId o : t.sources) users[static_cast<std::size_t>(o)].push_back(t.id);
    for (ObjectId o : t.destinations) users[static_cast<std::size_t>(o)].push_back(t.id);
  }
  std::set<std::pair<std::int32_t, std::int32_t>> edges;
  for (auto& u : users) {
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    for (std::size_t a = 0; a < u.size(); ++a) {
      for (std::size_t b = a + 1; b < u.size(); ++b) {
        edges.emplace(u[a], u[b]);
      }
    }
  }
  DependencyGraph g;
  g.nodes = w.spec.n;
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

}  // namespace aims
