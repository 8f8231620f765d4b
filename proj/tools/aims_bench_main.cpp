// aims-bench: generate malicious-transaction workloads, plan partitions,
// simulate the intrusion-management pipeline, and reproduce the benchmark
// experiment matrix.
//
// Exit codes: 0 success, 1 cell/verification failure, 2 config error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "aims_bench/experiment.hpp"
#include "aims_bench/oracle.hpp"
#include "aims_bench/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

aims::ExperimentConfig load_config(const std::string& path) {
  return aims::parse_config_file(path);
}

int cmd_gen(const std::string& config_path, std::uint64_t seed, const std::string& out) {
  const aims::ExperimentConfig cfg = load_config(config_path);
  aims::WorkloadSpec spec = cfg.workload;
  spec.m = cfg.sweep_m.front();
  const aims::Workload w = aims::generate_workload(spec, seed, cfg.arrival_mode);
  aims::write_workload_file(w, out);
  std::cout << "wrote " << w.transactions.size() << " transactions to " << out << "\n";
  return kExitOk;
}

int cmd_plan(const std::string& workload_path, const std::string& stores_path,
             std::int64_t trials, std::uint64_t seed, const std::string& out,
             const std::string& objective) {
  const aims::Workload w = aims::read_workload_file(workload_path);
  const aims::StoreGraph g = aims::read_store_graph_file(stores_path);
  aims::SearchOptions opts;
  opts.aggregate = objective == "max" ? aims::Aggregate::Max : aims::Aggregate::Sum;
  const aims::SearchResult result = aims::randomized_search(w, g, trials, seed, opts);
  aims::write_plan_file(result.plan, g, out);
  std::cout << "objective=" << result.objective << " feasible=" << result.feasible_candidates
            << "/" << trials << " winning_trial=" << result.winning_trial << "\n";
  return kExitOk;
}

int cmd_sim(const std::string& workload_path, const std::string& stores_path,
            const std::string& plan_path, aims::TimeMs delta, aims::TimeMs base,
            const std::string& trace_out) {
  const aims::Workload w = aims::read_workload_file(workload_path);
  const aims::StoreGraph g = aims::read_store_graph_file(stores_path);
  const aims::PartitionPlan plan = aims::read_plan_file(plan_path, g, w.spec.num_accounts);
  aims::SimConfig cfg;
  cfg.delta_ms = delta;
  cfg.base_commit_ms = base;
  const aims::SimResult result = aims::run_simulation(w, plan, g, cfg);
  if (!trace_out.empty()) aims::write_trace_file(result.trace, trace_out);
  const aims::Metrics& m = result.metrics;
  std::cout << "affected=" << m.affected_count << " avg_recovery_ms=" << m.avg_recovery_ms
            << " avg_response_ms=" << m.avg_response_ms << " episodes=" << m.episodes
            << " blocked=" << m.blocked_count << "\n";
  return kExitOk;
}

int cmd_matrix(const std::string& config_path, const std::string& out_dir) {
  const aims::ExperimentConfig cfg = load_config(config_path);
  const std::string dir = out_dir.empty() ? cfg.out_dir : out_dir;
  const std::vector<aims::CsvRow> rows = aims::run_matrix(cfg);
  std::filesystem::create_directories(dir);
  const std::string csv_path = dir + "/results.csv";
  {
    std::ofstream out(csv_path);
    if (!out) throw aims::Error("cannot open '" + csv_path + "' for writing");
    out << aims::rows_to_csv(rows);
  }
  int failed = 0;
  for (const auto& r : rows) {
    if (r.failed) {
      ++failed;
      std::cerr << "cell m=" << r.m << " delta=" << r.delta_ms << " partitions=" << r.partitions
                << " seed=" << r.seed << " failed: " << r.error << "\n";
    }
  }
  std::cout << "wrote " << rows.size() << " rows to " << csv_path << " (" << failed
            << " failed cells)\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

int cmd_verify(const std::string& workload_path, const std::string& stores_path,
               const std::string& plan_path, const std::string& trace_path, aims::TimeMs delta,
               aims::TimeMs base) {
  const aims::Workload w = aims::read_workload_file(workload_path);
  const aims::StoreGraph g = aims::read_store_graph_file(stores_path);
  const aims::PartitionPlan plan = aims::read_plan_file(plan_path, g, w.spec.num_accounts);

  int failures = 0;
  auto check = [&](bool ok, const std::string& what) {
    std::cout << (ok ? "[ok] " : "[MISMATCH] ") << what << "\n";
    if (!ok) ++failures;
  };

  // Plan validity; a single store is the unpartitioned baseline and only
  // needs capacity.
  const auto violations = aims::validate_plan(plan, w, g);
  if (g.store_count() == 1) {
    bool cap_ok = true;
    for (const auto& v : violations) {
      if (v.kind == aims::Violation::Kind::CapacityExceeded) cap_ok = false;
    }
    check(cap_ok, "plan fits capacities (single-store baseline)");
  } else {
    check(violations.empty(), "plan passes validation");
  }

  aims::SimConfig cfg;
  cfg.delta_ms = delta;
  cfg.base_commit_ms = base;
  const aims::SimResult sim = aims::run_simulation(w, plan, g, cfg);

  if (!trace_path.empty()) {
    const aims::SimTrace provided = aims::read_trace_file(trace_path);
    check(provided == sim.trace, "trace matches deterministic re-execution");
  }

  // Log chain integrity.
  bool chains_ok = true;
  try {
    sim.log.audit_chains();
  } catch (const aims::Error&) {
    chains_ok = false;
  }
  check(chains_ok, "log version chains are gapless and linked");

  // Affected sets match the brute-force closure, per episode.
  bool affected_ok = true;
  for (const auto& ep : sim.episodes) {
    const auto oracle_set = aims::reference::affected_closure_bruteforce(
        sim.log, ep.malicious_txn, ep.log_prefix, ep.episode);
    const std::set<aims::TxnId> engine_set(ep.affected.begin(), ep.affected.end());
    if (oracle_set != engine_set) affected_ok = false;
  }
  check(affected_ok, "affected sets equal the brute-force closure (" +
                         std::to_string(sim.episodes.size()) + " episodes)");

  // Final state equals a clean serial replay without the malicious
  // transactions, in commit order.
  std::set<aims::TxnId> exclude;
  for (const auto& t : w.transactions) {
    if (t.is_malicious) exclude.insert(t.id);
  }
  const auto replayed = aims::reference::clean_replay(w, exclude, sim.commit_order);
  check(replayed == sim.final_balances, "final balances equal clean replay");

  // Conservation.
  aims::Money total = 0;
  for (const aims::Money b : sim.final_balances) total += b;
  check(total == static_cast<aims::Money>(w.spec.num_accounts) * w.spec.initial_balance,
        "balances conserve the initial total");

  // Admission safety.
  const auto issues = aims::reference::audit_admission_safety(sim.trace, w);
  check(issues.empty(), "no admission overlaps the COT or the recovery lock");

  // Objective recomputation.
  check(aims::plan_objective(plan, w, g) == aims::reference::evaluate_plan_cost(plan, w, g),
        "plan objective matches the independent evaluation");

  return failures == 0 ? kExitOk : kExitFailure;
}

int cmd_plot(const std::string& csv_path, const std::string& out_dir, const std::string& x) {
  std::ifstream in(csv_path);
  if (!in) throw aims::Error("cannot open '" + csv_path + "' for reading");
  const auto rows = aims::rows_from_csv(in);
  const auto written = aims::emit_plotdata(rows, x, out_dir);
  for (const auto& f : written) std::cout << "wrote " << f << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"malicious-transaction benchmark and intrusion-management simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string workload_path;
  std::string stores_path;
  std::string plan_path;
  std::string trace_path;
  std::string csv_path;
  std::string out_path;
  std::string objective = "sum";
  std::string x_dim = "m";
  std::uint64_t seed = 1;
  std::int64_t trials = 1000;
  aims::TimeMs delta = 500;
  aims::TimeMs base = 5;

  auto* gen = app.add_subcommand("gen", "generate a workload file");
  gen->add_option("--config", config_path, "experiment config file")->required();
  gen->add_option("--seed", seed, "rng seed");
  gen->add_option("--out", out_path, "output workload file")->required();

  auto* plan = app.add_subcommand("plan", "search a partition plan");
  plan->add_option("--workload", workload_path)->required();
  plan->add_option("--stores", stores_path, "store graph file")->required();
  plan->add_option("--trials", trials, "randomized search trials");
  plan->add_option("--seed", seed, "rng seed");
  plan->add_option("--objective", objective)->check(CLI::IsMember({"sum", "max"}));
  plan->add_option("--out", out_path, "output plan file")->required();

  auto* sim = app.add_subcommand("sim", "simulate a workload under a plan");
  sim->add_option("--workload", workload_path)->required();
  sim->add_option("--stores", stores_path)->required();
  sim->add_option("--plan", plan_path)->required();
  sim->add_option("--delta", delta, "IDS detection delay (ms)");
  sim->add_option("--base", base, "local commit latency (ms)");
  sim->add_option("--trace", trace_path, "write the event trace here");

  auto* matrix = app.add_subcommand("matrix", "run the experiment matrix to CSV");
  matrix->add_option("--config", config_path)->required();
  matrix->add_option("--out", out_path, "output directory (overrides config)");

  auto* verify = app.add_subcommand("verify", "oracle cross-checks on a workload/plan/trace");
  verify->add_option("--workload", workload_path)->required();
  verify->add_option("--stores", stores_path)->required();
  verify->add_option("--plan", plan_path)->required();
  verify->add_option("--trace", trace_path, "trace file to compare byte-for-byte");
  verify->add_option("--delta", delta);
  verify->add_option("--base", base);

  auto* plot = app.add_subcommand("plot", "aggregate a results CSV into plot data");
  plot->add_option("--csv", csv_path, "results.csv path")->required();
  plot->add_option("--out", out_path, "output directory")->required();
  plot->add_option("--x", x_dim, "x dimension")->check(CLI::IsMember({"m", "delta_ms"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen(config_path, seed, out_path);
    if (plan->parsed()) return cmd_plan(workload_path, stores_path, trials, seed, out_path,
                                        objective);
    if (sim->parsed()) return cmd_sim(workload_path, stores_path, plan_path, delta, base,
                                      trace_path);
    if (matrix->parsed()) return cmd_matrix(config_path, out_path);
    if (verify->parsed()) {
      return cmd_verify(workload_path, stores_path, plan_path, trace_path, delta, base);
    }
    if (plot->parsed()) return cmd_plot(csv_path, out_path, x_dim);
  } catch (const aims::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}
