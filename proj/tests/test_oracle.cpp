#include <doctest.h>

#include "aims_bench/oracle.hpp"
#include "helpers.hpp"

using namespace aims;

namespace {

void hand_commit(TransactionLog& log, std::vector<Money>& bal, TxnId id, ObjectId src,
                 ObjectId dst, TimeMs at) {
  // fixed 10% transfer, plain arithmetic (test fixture, not production path)
  const Money amount = bal[static_cast<std::size_t>(src)] / 10;
  log.open_batch(id, at, LogRecordKind::Original);
  log.append(src, bal[static_cast<std::size_t>(src)], bal[static_cast<std::size_t>(src)] - amount,
             0);
  bal[static_cast<std::size_t>(src)] -= amount;
  log.append(dst, bal[static_cast<std::size_t>(dst)], bal[static_cast<std::size_t>(dst)] + amount,
             0);
  bal[static_cast<std::size_t>(dst)] += amount;
}

}  // namespace

TEST_CASE("closure of a read chain") {
  std::vector<Money> bal(6, 1000);
  TransactionLog log(6);
  hand_commit(log, bal, 1, 0, 1, 10);  // t1: 0 -> 1
  hand_commit(log, bal, 2, 1, 2, 20);  // t2 reads 1
  hand_commit(log, bal, 3, 2, 3, 30);  // t3 reads 2
  hand_commit(log, bal, 4, 4, 5, 40);  // t4 independent
  CHECK(reference::affected_closure_bruteforce(log, 1) == std::set<TxnId>{2, 3});
  CHECK(reference::affected_closure_bruteforce(log, 4) == std::set<TxnId>{});
}

TEST_CASE("closure is monotone in the log prefix") {
  std::vector<Money> bal(6, 1000);
  TransactionLog log(6);
  hand_commit(log, bal, 1, 0, 1, 10);
  hand_commit(log, bal, 2, 1, 2, 20);
  hand_commit(log, bal, 3, 2, 3, 30);
  const auto at_two = reference::affected_closure_bruteforce(log, 1, 4);  // first two batches
  const auto at_all = reference::affected_closure_bruteforce(log, 1);
  for (const TxnId t : at_two) CHECK(at_all.count(t));
  CHECK(at_two == std::set<TxnId>{2});
  CHECK(at_all == std::set<TxnId>{2, 3});
}

TEST_CASE("clean replay respects exclusions") {
  const Workload w = generate_workload(testutil::small_spec(30, 0.4, 2), 6);
  // excluding everything leaves the initial state
  std::set<TxnId> all;
  for (const auto& t : w.transactions) all.insert(t.id);
  const auto initial = reference::clean_replay(w, all);
  for (const Money b : initial) CHECK(b == w.spec.initial_balance);

  // conservation holds for any exclusion set
  for (const std::set<TxnId> exclude :
       {std::set<TxnId>{}, std::set<TxnId>{0, 5, 7}, testutil::malicious_ids(w)}) {
    const auto final_state = reference::clean_replay(w, exclude);
    CHECK(testutil::total(final_state) ==
          static_cast<Money>(w.spec.num_accounts) * w.spec.initial_balance);
  }
}

TEST_CASE("clean replay of everything matches the benign simulation") {
  const Workload w = generate_workload(testutil::small_spec(40, 0.3), 13);
  const StoreGraph g = testutil::one_store(w.spec.num_accounts);
  const SimResult r = run_simulation(w, single_store_plan(w.spec.num_accounts), g, SimConfig{});
  CHECK(reference::clean_replay(w, {}) == r.final_balances);
}

TEST_CASE("exhaustive search solves the trivial single-store instance") {
  Workload w = testutil::hand_workload(3);
  w.transactions.push_back(testutil::transfer(0, {0}, {1, 2}, 0));
  testutil::finish(w);
  const StoreGraph g = testutil::one_store(5);
  const auto r = reference::exhaustive_partition(w, g);
  CHECK(r.objective == 0);
  CHECK(r.enumerated == 1);
}

TEST_CASE("exhaustive search splits a shared pair at zero cost") {
  // two tenants share both objects; zero delay means any split is free
  Workload w = testutil::hand_workload(2);
  w.spec.num_tenants = 2;
  w.spec.alpha = 2;
  Transaction t0 = testutil::transfer(0, {0}, {1}, 0);
  t0.kind = TxnKind::Distribute;
  Transaction t1 = testutil::transfer(1, {1}, {0}, 100);
  t1.kind = TxnKind::Distribute;
  t1.tenant = 1;
  w.transactions = {t0, t1};
  testutil::finish(w);
  REQUIRE(w.multi_tenant_transactions().size() == 2);

  StoreGraph g({"M1", "M2"}, {2, 2});
  g.set_delay(0, 1, 0);
  const auto r = reference::exhaustive_partition(w, g);
  CHECK(r.objective == 0);
  CHECK(r.enumerated == 4);
  // the plan actually splits
  CHECK(r.plan.assignment[0] != r.plan.assignment[1]);
}

TEST_CASE("exhaustive optimum bounds the randomized search") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    WorkloadSpec spec = testutil::small_spec(4, 0.7, 0, 2, 2);
    spec.num_accounts = 6;
    Workload w;
    try {
      w = generate_workload(spec, seed);
    } catch (const InfeasibleObjectAssignment&) {
      continue;  // tiny account pool; some seeds cannot fit
    }
    const StoreGraph g = synthetic_store_graph(3, 5, 60, 4, seed);
    const auto optimum = reference::exhaustive_partition(w, g);
    const auto heuristic = randomized_search(w, g, 10'000, seed);
    CHECK(optimum.objective <= heuristic.objective);
  }
}

TEST_CASE("exhaustive search detects oversized instances and proven infeasibility") {
  const Workload big = generate_workload(testutil::small_spec(10, 0.0), 1);
  const StoreGraph g3 = synthetic_store_graph(3, 1, 5, big.spec.num_accounts, 1);
  CHECK_THROWS_AS(reference::exhaustive_partition(big, g3, 1000), InstanceTooLarge);

  Workload w = testutil::hand_workload(3);
  w.transactions.push_back(testutil::transfer(0, {0}, {1, 2}, 0));
  testutil::finish(w);
  StoreGraph tiny({"M1", "M2"}, {1, 1});  // total capacity 2 < 3 objects
  tiny.set_delay(0, 1, 5);
  CHECK_THROWS_AS(reference::exhaustive_partition(w, tiny), NoFeasiblePlan);
}

TEST_CASE("admission audit flags synthetic violations") {
  Workload w = testutil::hand_workload(4);
  w.transactions.push_back(testutil::transfer(0, {0}, {1, 2}, 0));
  testutil::finish(w);

  SimTrace bad;
  bad.events.push_back({10, TraceKind::Respond, 0, "objs=1 det=10"});
  bad.events.push_back({12, TraceKind::Admit, 0, "span=1"});  // lock held + object 1 marked
  bad.events.push_back({15, TraceKind::Affected, 0, "txns= cot=1"});
  bad.events.push_back({16, TraceKind::Admit, 0, "span=1"});  // object 1 quarantined
  bad.events.push_back({20, TraceKind::Recovered, 0, "undone=1 redone=0"});
  bad.events.push_back({20, TraceKind::Done, -1, "events=5"});
  const auto issues = reference::audit_admission_safety(bad, w);
  CHECK(issues.size() == 3);

  SimTrace clean;
  clean.events.push_back({10, TraceKind::Respond, 0, "objs=1 det=10"});
  clean.events.push_back({15, TraceKind::Affected, 0, "txns= cot=1"});
  clean.events.push_back({20, TraceKind::Recovered, 0, "undone=1 redone=0"});
  clean.events.push_back({22, TraceKind::Admit, 0, "span=1"});
  clean.events.push_back({22, TraceKind::Done, -1, "events=4"});
  CHECK(reference::audit_admission_safety(clean, w).empty());
}
