#include <doctest.h>

#include <algorithm>
#include <set>

#include "aims_bench/rng.hpp"
#include "aims_bench/workload.hpp"
#include "helpers.hpp"

using namespace aims;

TEST_CASE("dependency graph degenerate sizes") {
  CHECK(build_dependency_graph(0, 0.5, 1).edges.empty());
  const DependencyGraph g1 = build_dependency_graph(1, 0.9, 1);
  CHECK(g1.nodes == 1);
  CHECK(g1.edges.empty());
}

TEST_CASE("dependency graph probability extremes") {
  CHECK(build_dependency_graph(4, 0.0, 7).edges.empty());
  CHECK(build_dependency_graph(4, 1.0, 7).edges.size() == 6);
}

TEST_CASE("dependency graph edge counts follow binomial(4950, 0.5)") {
  // Exact 99.99% central interval of Binomial(4950, 0.5), quantiles at
  // 5e-5 and 1-5e-5: [2338, 2612].
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto edges = build_dependency_graph(100, 0.5, seed).edges.size();
    CHECK(edges >= 2338);
    CHECK(edges <= 2612);
  }
}

TEST_CASE("dependency graph is deterministic and simple") {
  const DependencyGraph a = build_dependency_graph(50, 0.3, 42);
  const DependencyGraph b = build_dependency_graph(50, 0.3, 42);
  CHECK(a == b);
  std::set<std::pair<std::int32_t, std::int32_t>> seen;
  for (const auto& [i, j] : a.edges) {
    CHECK(i < j);
    CHECK(j < 50);
    CHECK(seen.insert({i, j}).second);  // no multi-edges
  }
}

TEST_CASE("complete graph forces sharing") {
  WorkloadSpec spec = testutil::small_spec(2, 1.0, 0, 2);
  spec.num_accounts = 8;
  const Workload w = generate_workload(spec, 3);
  const auto rw0 = w.transactions[0].read_write_set();
  const auto rw1 = w.transactions[1].read_write_set();
  std::vector<ObjectId> inter;
  std::set_intersection(rw0.begin(), rw0.end(), rw1.begin(), rw1.end(), std::back_inserter(inter));
  CHECK(!inter.empty());
}

TEST_CASE("empty graph forbids sharing") {
  const Workload w = generate_workload(testutil::small_spec(5, 0.0), 11);
  for (std::size_t a = 0; a < w.transactions.size(); ++a) {
    for (std::size_t b = a + 1; b < w.transactions.size(); ++b) {
      const auto rwa = w.transactions[a].read_write_set();
      const auto rwb = w.transactions[b].read_write_set();
      std::vector<ObjectId> inter;
      std::set_intersection(rwa.begin(), rwa.end(), rwb.begin(), rwb.end(),
                            std::back_inserter(inter));
      CHECK(inter.empty());
    }
  }
  CHECK(realized_dependency_graph(w).edges.empty());
}

TEST_CASE("every nominal dependency edge is realized by a shared account") {
  const std::uint64_t seed = 99;
  for (const double beta : {0.05, 0.3, 1.0}) {
    const WorkloadSpec spec = testutil::small_spec(60, beta);
    const Workload w = generate_workload(spec, seed);
    std::vector<std::vector<ObjectId>> rw;
    rw.reserve(w.transactions.size());
    for (const auto& t : w.transactions) rw.push_back(t.read_write_set());
    // The generator documents its nominal graph sub-seed.
    const DependencyGraph g = build_dependency_graph(spec.n, beta, derive_seed(seed, 1));
    for (const auto& [i, j] : g.edges) {
      std::vector<ObjectId> inter;
      std::set_intersection(rw[i].begin(), rw[i].end(), rw[j].begin(), rw[j].end(),
                            std::back_inserter(inter));
      CHECK_MESSAGE(!inter.empty(),
                    "edge (" << i << "," << j << ") at beta=" << beta << " not realized");
    }
  }
}

TEST_CASE("transaction shape invariants hold across a generated workload") {
  const WorkloadSpec spec = testutil::small_spec(200, 0.3, 10);
  const Workload w = generate_workload(spec, 5);
  REQUIRE(w.transactions.size() == 200);
  std::int32_t malicious = 0;
  for (const auto& t : w.transactions) {
    const auto ns = static_cast<std::int32_t>(t.sources.size());
    const auto nd = static_cast<std::int32_t>(t.destinations.size());
    switch (t.kind) {
      case TxnKind::Distribute:
        CHECK(ns == 1);
        CHECK(nd >= 2);
        CHECK(nd <= spec.alpha);
        break;
      case TxnKind::Collect:
        CHECK(nd == 1);
        CHECK(ns >= 2);
        CHECK(ns <= spec.alpha);
        break;
      case TxnKind::ManyToMany:
        CHECK(ns >= 2);
        CHECK(nd >= 2);
        CHECK(ns <= spec.alpha);
        CHECK(nd <= spec.alpha);
        break;
    }
    // endpoints distinct, sources and destinations disjoint
    std::set<ObjectId> all(t.sources.begin(), t.sources.end());
    all.insert(t.destinations.begin(), t.destinations.end());
    CHECK(all.size() == t.sources.size() + t.destinations.size());
    CHECK(t.fraction_bp.size() == t.sources.size());
    for (const auto f : t.fraction_bp) {
      CHECK(f >= 100);
      CHECK(f <= 1000);
    }
    malicious += t.is_malicious ? 1 : 0;
    CHECK(t.tenant == t.id % spec.num_tenants);
  }
  CHECK(malicious == 10);
  CHECK(std::is_sorted(w.transactions.begin(), w.transactions.end(),
                       [](const Transaction& a, const Transaction& b) {
                         return a.arrival_time < b.arrival_time;
                       }));
}

TEST_CASE("table 2 arrivals space transactions 100 ms apart") {
  const WorkloadSpec spec = table2_spec();
  const Workload w = generate_workload(spec, 1);
  CHECK(w.transactions.front().arrival_time == 0);
  CHECK(w.transactions.back().arrival_time == 499'900);
  CHECK(w.transactions[1].arrival_time == 100);
}

TEST_CASE("poisson arrivals are non-decreasing and deterministic") {
  WorkloadSpec spec = testutil::small_spec(100, 0.1);
  const Workload a = generate_workload(spec, 9, ArrivalMode::Poisson);
  const Workload b = generate_workload(spec, 9, ArrivalMode::Poisson);
  CHECK(a == b);
  for (std::size_t i = 1; i < a.transactions.size(); ++i) {
    CHECK(a.transactions[i].arrival_time >= a.transactions[i - 1].arrival_time);
  }
  // seeds differ -> different arrivals
  const Workload c = generate_workload(spec, 10, ArrivalMode::Poisson);
  CHECK(c.transactions.back().arrival_time != a.transactions.back().arrival_time);
}

TEST_CASE("generation is deterministic") {
  const WorkloadSpec spec = testutil::small_spec(80, 0.4, 4);
  CHECK(generate_workload(spec, 77) == generate_workload(spec, 77));
}

TEST_CASE("spec invariants are enforced") {
  WorkloadSpec spec = testutil::small_spec(10, 0.5);
  spec.alpha = 1;
  CHECK_THROWS_AS(spec.validate(), InvalidSpec);
  spec = testutil::small_spec(10, 1.5);
  CHECK_THROWS_AS(spec.validate(), InvalidSpec);
  spec = testutil::small_spec(10, 0.5);
  spec.m = 11;
  CHECK_THROWS_AS(spec.validate(), InvalidSpec);
  spec = testutil::small_spec(10, 0.5);
  spec.num_accounts = spec.alpha;  // needs alpha + 1
  CHECK_THROWS_AS(spec.validate(), InvalidSpec);
}

TEST_CASE("too few accounts for disjoint assignments") {
  WorkloadSpec spec = testutil::small_spec(50, 0.0, 0, 4);
  spec.num_accounts = 5;  // passes alpha + 1 but far below the endpoints needed
  CHECK_THROWS_AS(generate_workload(spec, 1), InfeasibleObjectAssignment);
}

TEST_CASE("shared objects make multi-tenant transactions") {
  WorkloadSpec spec = testutil::small_spec(8, 1.0, 0, 3, 4);
  const Workload w = generate_workload(spec, 2);
  // complete graph: everything shares at least one account across tenants
  CHECK(!w.multi_tenant_transactions().empty());
  bool any_shared = false;
  for (const auto t : w.tenant_of_object) {
    if (t == kSharedTenant) any_shared = true;
  }
  CHECK(any_shared);

  // single tenant: nothing can be shared between tenants
  WorkloadSpec solo = testutil::small_spec(8, 1.0, 0, 3, 1);
  const Workload ws = generate_workload(solo, 2);
  CHECK(ws.multi_tenant_transactions().empty());
}

TEST_CASE("realized graph covers the nominal one") {
  const std::uint64_t seed = 31;
  const WorkloadSpec spec = testutil::small_spec(40, 0.2);
  const Workload w = generate_workload(spec, seed);
  const DependencyGraph nominal = build_dependency_graph(spec.n, spec.beta, derive_seed(seed, 1));
  const DependencyGraph realized = realized_dependency_graph(w);
  std::set<std::pair<std::int32_t, std::int32_t>> realized_set(realized.edges.begin(),
                                                               realized.edges.end());
  for (const auto& e : nominal.edges) {
    CHECK(realized_set.count(e));
  }
}
