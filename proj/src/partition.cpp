#include "aims_bench/partition.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "aims_bench/rng.hpp"

namespace aims {

StoreGraph::StoreGraph(std::vector<std::string> names, std::vector<std::int64_t> capacities)
    : names_(std::move(names)), capacities_(std::move(capacities)) {
  if (names_.size() != capacities_.size()) {
    throw Error("store names and capacities differ in length");
  }
  const std::size_t k = names_.size();
  delays_.assign(k * (k - 1) / 2, -1);
}

std::optional<StoreId> StoreGraph::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<StoreId>(i);
  }
  return std::nullopt;
}

std::size_t StoreGraph::pair_index(StoreId a, StoreId b) const {
  if (a > b) std::swap(a, b);
  const auto n = static_cast<std::int64_t>(names_.size());
  if (a < 0 || b >= n || a == b) throw Error("bad store pair");
  // index of (a, b), a < b, in row-major upper triangle
  const std::int64_t ia = a;
  const std::int64_t ib = b;
  return static_cast<std::size_t>(ia * n - ia * (ia + 1) / 2 + (ib - ia - 1));
}

void StoreGraph::set_delay(StoreId a, StoreId b, TimeMs delay) {
  if (delay < 0) throw Error("delay must be >= 0");
  delays_[pair_index(a, b)] = delay;
}

TimeMs StoreGraph::delay(StoreId a, StoreId b) const {
  if (a == b) return 0;
  const TimeMs d = delays_[pair_index(a, b)];
  if (d < 0) throw Error("delay for (" + name(a) + ", " + name(b) + ") is unset");
  return d;
}

bool StoreGraph::complete() const {
  return std::all_of(delays_.begin(), delays_.end(), [](TimeMs d) { return d >= 0; });
}

StoreGraph synthetic_store_graph(std::int32_t k, TimeMs delay_lo, TimeMs delay_hi,
                                 std::int64_t capacity_per_store, std::uint64_t seed) {
  if (k < 1) throw Error("store count must be >= 1");
  if (delay_lo < 0 || delay_hi < delay_lo) throw Error("bad delay range");
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(k));
  for (std::int32_t i = 1; i <= k; ++i) names.push_back("M" + std::to_string(i));
  StoreGraph g(std::move(names), std::vector<std::int64_t>(static_cast<std::size_t>(k),
                                                           capacity_per_store));
  Rng rng(seed);
  for (StoreId a = 0; a < k; ++a) {
    for (StoreId b = a + 1; b < k; ++b) {
      g.set_delay(a, b, rng.uniform_int(delay_lo, delay_hi));
    }
  }
  return g;
}

StoreId PartitionPlan::store_of(ObjectId o) const {
  if (o < 0 || static_cast<std::size_t>(o) >= assignment.size() ||
      assignment[static_cast<std::size_t>(o)] < 0) {
    throw UnassignedObject(o);
  }
  return assignment[static_cast<std::size_t>(o)];
}

std::int64_t PartitionPlan::objects_on(StoreId s) const {
  return std::count(assignment.begin(), assignment.end(), s);
}

PartitionPlan single_store_plan(std::int32_t num_objects) {
  PartitionPlan p;
  p.assignment.assign(static_cast<std::size_t>(num_objects), 0);
  return p;
}

Span span_of_objects(const PartitionPlan& plan, const std::vector<ObjectId>& objects) {
  Span s;
  for (ObjectId o : objects) {
    const StoreId st = plan.store_of(o);
    if (!std::count(s.stores.begin(), s.stores.end(), st)) s.stores.push_back(st);
  }
  std::sort(s.stores.begin(), s.stores.end());
  return s;
}

Span span(const PartitionPlan& plan, const Transaction& txn) {
  return span_of_objects(plan, txn.read_write_set());
}

TimeMs communication_cost(const StoreGraph& g, const Span& s) {
  for (StoreId st : s.stores) {
    if (st < 0 || st >= g.store_count()) throw UnknownStore("#" + std::to_string(st));
  }
  TimeMs worst = 0;
  for (std::size_t i = 0; i < s.stores.size(); ++i) {
    for (std::size_t j = i + 1; j < s.stores.size(); ++j) {
      worst = std::max(worst, g.delay(s.stores[i], s.stores[j]));
    }
  }
  return worst;
}

std::int64_t plan_objective(const PartitionPlan& plan, const Workload& w, const StoreGraph& g,
                            Aggregate agg) {
  std::int64_t total = 0;
  for (const auto& t : w.transactions) {
    const TimeMs c = communication_cost(g, span(plan, t));
    if (agg == Aggregate::Sum) {
      total += c;
    } else {
      total = std::max<std::int64_t>(total, c);
    }
  }
  return total;
}

std::string Violation::describe(const StoreGraph& g) const {
  if (kind == Kind::MultiTenantNotDistributed) {
    return "multi-tenant transaction " + std::to_string(txn) + " is not distributed";
  }
  return "store " + g.name(store) + " exceeds its capacity";
}

std::vector<Violation> validate_plan(const PartitionPlan& plan, const Workload& w,
                                     const StoreGraph& g) {
  std::vector<Violation> out;
  for (const auto& t : w.transactions) {
    if (!w.is_multi_tenant(t)) continue;
    if (span(plan, t).size() <= 1) {
      out.push_back({Violation::Kind::MultiTenantNotDistributed, t.id, -1});
    }
  }
  std::vector<std::int64_t> load(static_cast<std::size_t>(g.store_count()), 0);
  for (std::size_t o = 0; o < plan.assignment.size(); ++o) {
    const StoreId s = plan.assignment[o];
    if (s < 0) throw UnassignedObject(static_cast<ObjectId>(o));
    ++load[static_cast<std::size_t>(s)];
  }
  for (StoreId s = 0; s < g.store_count(); ++s) {
    if (load[static_cast<std::size_t>(s)] > g.capacity(s)) {
      out.push_back({Violation::Kind::CapacityExceeded, -1, s});
    }
  }
  return out;
}

namespace {

// One candidate: uniform assignment subject to remaining capacity, then one
// repair move per transaction violating the distribution constraint.
bool make_candidate(const Workload& w, const StoreGraph& g, const std::vector<TxnId>& multi_tenant,
                    Rng& rng, PartitionPlan& out) {
  const std::int32_t k = g.store_count();
  const auto num_objects = static_cast<std::int32_t>(w.spec.num_accounts);
  out.assignment.assign(static_cast<std::size_t>(num_objects), -1);

  std::vector<std::int64_t> spare(static_cast<std::size_t>(k));
  std::vector<StoreId> open;  // stores with spare capacity
  for (StoreId s = 0; s < k; ++s) {
    spare[static_cast<std::size_t>(s)] = g.capacity(s);
    if (spare[static_cast<std::size_t>(s)] > 0) open.push_back(s);
  }
  for (ObjectId o = 0; o < num_objects; ++o) {
    if (open.empty()) return false;  // total capacity < |D|
    const std::size_t pick = rng.below(open.size());
    const StoreId s = open[pick];
    out.assignment[static_cast<std::size_t>(o)] = s;
    if (--spare[static_cast<std::size_t>(s)] == 0) {
      open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
    }
  }

  // Repair pass: move the first object of each offending multi-tenant
  // transaction to the nearest other store with spare capacity.
  for (TxnId id : multi_tenant) {
    const Transaction& t = w.transactions[static_cast<std::size_t>(id)];
    const std::vector<ObjectId> rw = t.read_write_set();
    const Span sp = span_of_objects(out, rw);
    if (sp.size() != 1) continue;
    const StoreId from = sp.stores[0];
    StoreId best = -1;
    TimeMs best_delay = 0;
    for (StoreId s = 0; s < k; ++s) {
      if (s == from || spare[static_cast<std::size_t>(s)] <= 0) continue;
      const TimeMs d = g.delay(from, s);
      if (best < 0 || d < best_delay) {
        best = s;
        best_delay = d;
      }
    }
    if (best < 0) return false;
    const ObjectId moved = rw.front();
    out.assignment[static_cast<std::size_t>(moved)] = best;
    --spare[static_cast<std::size_t>(best)];
    ++spare[static_cast<std::size_t>(from)];
  }
  return true;
}

}  // namespace

SearchResult randomized_search(const Workload& w, const StoreGraph& g, std::int64_t trials,
                               std::uint64_t seed, const SearchOptions& opts) {
  if (trials < 1) throw Error("trials must be >= 1");
  if (!g.complete()) throw Error("store graph is missing delays");
  const std::vector<TxnId> multi_tenant = [&] {
    std::vector<TxnId> ids;
    for (const auto& t : w.transactions) {
      if (w.is_multi_tenant(t)) ids.push_back(t.id);
    }
    return ids;
  }();

  SearchResult best;
  bool have_best = false;
  PartitionPlan candidate;
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(trial) + 0x517cc1b727220a95ULL));
    if (!make_candidate(w, g, multi_tenant, rng, candidate)) continue;
    if (!validate_plan(candidate, w, g).empty()) continue;
    const std::int64_t obj = plan_objective(candidate, w, g, opts.aggregate);
    if (!have_best || obj < best.objective) {
      best.plan = candidate;
      best.objective = obj;
      best.winning_trial = trial;
      have_best = true;
    }
    ++best.feasible_candidates;
  }
  if (!have_best) {
    throw NoFeasiblePlan("no feasible plan found in " + std::to_string(trials) +
                         " trials (not a proof of infeasibility)");
  }
  return best;
}

// --- text formats -----------------------------------------------------------

void write_store_graph(const StoreGraph& g, std::ostream& out) {
  out << "stores " << g.store_count() << "\n";
  for (StoreId s = 0; s < g.store_count(); ++s) {
    out << "cap " << g.name(s) << ' ' << g.capacity(s) << "\n";
  }
  for (StoreId a = 0; a < g.store_count(); ++a) {
    for (StoreId b = a + 1; b < g.store_count(); ++b) {
      out << "delay " << g.name(a) << ' ' << g.name(b) << ' ' << g.delay(a, b) << "\n";
    }
  }
}

StoreGraph read_store_graph(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::int32_t k = -1;
  std::vector<std::string> names;
  std::vector<std::int64_t> caps;
  std::optional<StoreGraph> g;
  auto graph = [&]() -> StoreGraph& {
    if (!g) {
      g.emplace(names, caps);
    }
    return *g;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "stores") {
      if (k >= 0) throw MalformedInput(lineno, "stores", "duplicate stores line");
      if (!(ls >> k) || k < 1) throw MalformedInput(lineno, "stores", "bad store count");
      names.reserve(static_cast<std::size_t>(k));
      for (std::int32_t i = 1; i <= k; ++i) names.push_back("M" + std::to_string(i));
      caps.assign(static_cast<std::size_t>(k), 0);
    } else if (word == "cap") {
      if (k < 0) throw MalformedInput(lineno, "cap", "stores line must come first");
      if (g) throw MalformedInput(lineno, "cap", "cap lines must precede delay lines");
      std::string name;
      std::int64_t cap = 0;
      if (!(ls >> name >> cap) || cap < 0) throw MalformedInput(lineno, "cap", "bad capacity line");
      const auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) throw MalformedInput(lineno, "cap", "unknown store " + name);
      caps[static_cast<std::size_t>(it - names.begin())] = cap;
    } else if (word == "delay") {
      if (k < 0) throw MalformedInput(lineno, "delay", "stores line must come first");
      std::string na, nb;
      TimeMs d = 0;
      if (!(ls >> na >> nb >> d) || d < 0) throw MalformedInput(lineno, "delay", "bad delay line");
      const auto a = graph().find(na);
      const auto b = graph().find(nb);
      if (!a || !b) throw MalformedInput(lineno, "delay", "unknown store in " + na + "/" + nb);
      graph().set_delay(*a, *b, d);
    } else {
      throw MalformedInput(lineno, word, "unknown directive");
    }
  }
  if (k < 0) throw MalformedInput(lineno, "stores", "missing stores line");
  StoreGraph& result = graph();
  if (k > 1 && !result.complete()) {
    throw MalformedInput(lineno, "delay", "delay missing for at least one store pair");
  }
  return result;
}

void write_store_graph_file(const StoreGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_store_graph(g, out);
}

StoreGraph read_store_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return read_store_graph(in);
}

void write_plan(const PartitionPlan& plan, const StoreGraph& g, std::ostream& out) {
  for (std::size_t o = 0; o < plan.assignment.size(); ++o) {
    out << o << ' ' << g.name(plan.assignment[o]) << "\n";
  }
}

PartitionPlan read_plan(std::istream& in, const StoreGraph& g, std::int32_t num_objects) {
  PartitionPlan plan;
  plan.assignment.assign(static_cast<std::size_t>(num_objects), -1);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::int64_t obj = 0;
    std::string store;
    if (!(ls >> obj >> store) || obj < 0 || obj >= num_objects) {
      throw MalformedInput(lineno, "object", "bad plan line");
    }
    const auto s = g.find(store);
    if (!s) throw MalformedInput(lineno, "store", "unknown store " + store);
    if (plan.assignment[static_cast<std::size_t>(obj)] >= 0) {
      throw MalformedInput(lineno, "object", "object assigned twice (no replication allowed)");
    }
    plan.assignment[static_cast<std::size_t>(obj)] = *s;
  }
  for (std::size_t o = 0; o < plan.assignment.size(); ++o) {
    if (plan.assignment[o] < 0) {
      throw MalformedInput(lineno, "object", "object " + std::to_string(o) + " unassigned");
    }
  }
  return plan;
}

void write_plan_file(const PartitionPlan& plan, const StoreGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_plan(plan, g, out);
}

PartitionPlan read_plan_file(const std::string& path, const StoreGraph& g,
                             std::int32_t num_objects) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return read_plan(in, g, num_objects);
}

}  // namespace aims
