#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>

#include "aims_bench/experiment.hpp"
#include "aims_bench/oracle.hpp"
#include "aims_bench/sim.hpp"

namespace py = pybind11;
using namespace aims;

namespace {

ArrivalMode mode_from_string(const std::string& s) {
  if (s == "fixed") return ArrivalMode::Fixed;
  if (s == "poisson") return ArrivalMode::Poisson;
  throw Error("arrival mode must be 'fixed' or 'poisson'");
}

std::string trace_text(const SimResult& r) {
  std::ostringstream ss;
  write_trace(r.trace, ss);
  return ss.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "malicious-transaction benchmark, partition planner, and intrusion-management "
            "simulator";

  py::register_exception<Error>(m, "AimsError");

  py::class_<WorkloadSpec>(m, "WorkloadSpec")
      .def(py::init([](std::int32_t n, std::int32_t alpha, double beta,
                       std::int32_t num_accounts, Money initial_balance, double arrival_rate,
                       std::int32_t m_count, std::int32_t num_tenants) {
             WorkloadSpec s;
             s.n = n;
             s.alpha = alpha;
             s.beta = beta;
             s.num_accounts = num_accounts;
             s.initial_balance = initial_balance;
             s.arrival_rate = arrival_rate;
             s.m = m_count;
             s.num_tenants = num_tenants;
             return s;
           }),
           py::arg("n"), py::arg("alpha"), py::arg("beta"), py::arg("num_accounts"),
           py::arg("initial_balance") = 1'000'000, py::arg("arrival_rate") = 10.0,
           py::arg("m") = 0, py::arg("num_tenants") = 1)
      .def_readwrite("n", &WorkloadSpec::n)
      .def_readwrite("alpha", &WorkloadSpec::alpha)
      .def_readwrite("beta", &WorkloadSpec::beta)
      .def_readwrite("num_accounts", &WorkloadSpec::num_accounts)
      .def_readwrite("initial_balance", &WorkloadSpec::initial_balance)
      .def_readwrite("arrival_rate", &WorkloadSpec::arrival_rate)
      .def_readwrite("m", &WorkloadSpec::m)
      .def_readwrite("num_tenants", &WorkloadSpec::num_tenants)
      .def("validate", &WorkloadSpec::validate);

  m.def("table2_spec", &table2_spec);

  py::class_<Transaction>(m, "Transaction")
      .def_readonly("id", &Transaction::id)
      .def_property_readonly("kind", [](const Transaction& t) { return to_string(t.kind); })
      .def_readonly("sources", &Transaction::sources)
      .def_readonly("destinations", &Transaction::destinations)
      .def_readonly("fraction_bp", &Transaction::fraction_bp)
      .def_readonly("tenant", &Transaction::tenant)
      .def_readonly("is_malicious", &Transaction::is_malicious)
      .def_readonly("arrival_time", &Transaction::arrival_time)
      .def("read_write_set", &Transaction::read_write_set);

  py::class_<Workload>(m, "Workload")
      .def_readonly("spec", &Workload::spec)
      .def_readonly("transactions", &Workload::transactions)
      .def_readonly("tenant_of_object", &Workload::tenant_of_object)
      .def("multi_tenant_transactions", &Workload::multi_tenant_transactions)
      .def("__eq__", [](const Workload& a, const Workload& b) { return a == b; });

  m.def(
      "generate_workload",
      [](const WorkloadSpec& spec, std::uint64_t seed, const std::string& mode) {
        return generate_workload(spec, seed, mode_from_string(mode));
      },
      py::arg("spec"), py::arg("seed"), py::arg("arrival_mode") = "fixed");
  m.def("write_workload_file", &write_workload_file);
  m.def("read_workload_file", &read_workload_file);
  m.def("build_dependency_graph", [](std::int32_t n, double beta, std::uint64_t seed) {
    return build_dependency_graph(n, beta, seed).edges;
  });

  py::class_<StoreGraph>(m, "StoreGraph")
      .def("store_count", &StoreGraph::store_count)
      .def("name", &StoreGraph::name)
      .def("capacity", &StoreGraph::capacity)
      .def("delay", &StoreGraph::delay);
  m.def("synthetic_store_graph", &synthetic_store_graph, py::arg("stores"), py::arg("delay_lo"),
        py::arg("delay_hi"), py::arg("capacity_per_store"), py::arg("seed"));
  m.def("write_store_graph_file", &write_store_graph_file);
  m.def("read_store_graph_file", &read_store_graph_file);

  py::class_<PartitionPlan>(m, "PartitionPlan")
      .def_readonly("assignment", &PartitionPlan::assignment)
      .def("store_of", &PartitionPlan::store_of);
  m.def("single_store_plan", &single_store_plan);
  m.def("write_plan_file", &write_plan_file);
  m.def("read_plan_file", &read_plan_file);

  m.def("span",
        [](const PartitionPlan& plan, const Transaction& txn) { return span(plan, txn).stores; });
  m.def("communication_cost", [](const StoreGraph& g, const std::vector<StoreId>& stores) {
    Span s;
    s.stores = stores;
    std::sort(s.stores.begin(), s.stores.end());
    return communication_cost(g, s);
  });
  m.def(
      "plan_objective",
      [](const PartitionPlan& plan, const Workload& w, const StoreGraph& g,
         const std::string& agg) {
        return plan_objective(plan, w, g, agg == "max" ? Aggregate::Max : Aggregate::Sum);
      },
      py::arg("plan"), py::arg("workload"), py::arg("stores"), py::arg("aggregate") = "sum");
  m.def("validate_plan", [](const PartitionPlan& plan, const Workload& w, const StoreGraph& g) {
    std::vector<std::string> out;
    for (const auto& v : validate_plan(plan, w, g)) out.push_back(v.describe(g));
    return out;
  });

  py::class_<SearchResult>(m, "SearchResult")
      .def_readonly("plan", &SearchResult::plan)
      .def_readonly("objective", &SearchResult::objective)
      .def_readonly("feasible_candidates", &SearchResult::feasible_candidates)
      .def_readonly("winning_trial", &SearchResult::winning_trial);
  m.def(
      "randomized_search",
      [](const Workload& w, const StoreGraph& g, std::int64_t trials, std::uint64_t seed) {
        return randomized_search(w, g, trials, seed);
      },
      py::arg("workload"), py::arg("stores"), py::arg("trials"), py::arg("seed"));

  py::class_<Metrics>(m, "Metrics")
      .def_readonly("affected_count", &Metrics::affected_count)
      .def_readonly("avg_recovery_ms", &Metrics::avg_recovery_ms)
      .def_readonly("avg_response_ms", &Metrics::avg_response_ms)
      .def_readonly("episodes", &Metrics::episodes)
      .def_readonly("blocked_count", &Metrics::blocked_count)
      .def_readonly("plan_objective", &Metrics::plan_objective);

  py::class_<EpisodeSummary>(m, "EpisodeSummary")
      .def_readonly("episode", &EpisodeSummary::episode)
      .def_readonly("malicious_txn", &EpisodeSummary::malicious_txn)
      .def_readonly("detection_time", &EpisodeSummary::detection_time)
      .def_readonly("affected", &EpisodeSummary::affected);

  py::class_<SimResult>(m, "SimResult")
      .def_readonly("metrics", &SimResult::metrics)
      .def_readonly("final_balances", &SimResult::final_balances)
      .def_readonly("episodes", &SimResult::episodes)
      .def_readonly("commit_order", &SimResult::commit_order)
      .def("trace_text", &trace_text);

  m.def(
      "run_simulation",
      [](const Workload& w, const PartitionPlan& plan, const StoreGraph& g, TimeMs delta_ms,
         TimeMs base_commit_ms, std::int64_t event_cap) {
        SimConfig cfg;
        cfg.delta_ms = delta_ms;
        cfg.base_commit_ms = base_commit_ms;
        cfg.event_cap = event_cap;
        return run_simulation(w, plan, g, cfg);
      },
      py::arg("workload"), py::arg("plan"), py::arg("stores"), py::arg("delta_ms") = 500,
      py::arg("base_commit_ms") = 5, py::arg("event_cap") = 20'000'000);

  // brute-force references, exposed for cross-checking from python
  m.def(
      "clean_replay",
      [](const Workload& w, const std::set<TxnId>& exclude,
         const std::optional<std::vector<TxnId>>& order) {
        return reference::clean_replay(w, exclude, order);
      },
      py::arg("workload"), py::arg("exclude"), py::arg("order") = py::none());
  m.def("closure_for_episode", [](const SimResult& r, std::size_t episode_index) {
    const EpisodeSummary& ep = r.episodes.at(episode_index);
    return reference::affected_closure_bruteforce(r.log, ep.malicious_txn, ep.log_prefix,
                                                  ep.episode);
  });
  m.def("audit_admission_safety", [](const SimResult& r, const Workload& w) {
    std::vector<std::string> out;
    for (const auto& issue : reference::audit_admission_safety(r.trace, w)) {
      out.push_back("t=" + std::to_string(issue.time) + " txn=" + std::to_string(issue.txn) +
                    ": " + issue.what);
    }
    return out;
  });
  m.def("exhaustive_partition", [](const Workload& w, const StoreGraph& g) {
    const auto r = reference::exhaustive_partition(w, g);
    return py::make_tuple(r.plan, r.objective, r.enumerated);
  });
}
