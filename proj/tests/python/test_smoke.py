"""End-to-end smoke tests for the python bindings and the CLI."""

import os
import subprocess

import pytest

import aims_bench as ab


def small_spec(n=50, beta=0.3, m=0):
    return ab.WorkloadSpec(n=n, alpha=6, beta=beta, num_accounts=n * 12, m=m, num_tenants=3)


def test_workload_generation_invariants():
    spec = small_spec(m=4)
    w = ab.generate_workload(spec, seed=7)
    assert len(w.transactions) == 50
    assert sum(1 for t in w.transactions if t.is_malicious) == 4
    for t in w.transactions:
        assert set(t.sources).isdisjoint(t.destinations)
        assert len(t.fraction_bp) == len(t.sources)
        assert all(100 <= f <= 1000 for f in t.fraction_bp)
    # determinism
    assert w == ab.generate_workload(spec, seed=7)


def test_workload_file_roundtrip(tmp_path):
    w = ab.generate_workload(small_spec(m=2), seed=3)
    path = str(tmp_path / "workload.txt")
    ab.write_workload_file(w, path)
    assert ab.read_workload_file(path) == w


def test_figure3_cost_anchor():
    graph = ab.synthetic_store_graph(stores=2, delay_lo=90, delay_hi=90,
                                     capacity_per_store=10, seed=1)
    assert ab.communication_cost(graph, [0, 1]) == 90
    assert ab.communication_cost(graph, [0]) == 0


def test_plan_search_and_validation():
    w = ab.generate_workload(small_spec(beta=0.6), seed=5)
    g = ab.synthetic_store_graph(stores=3, delay_lo=10, delay_hi=100,
                                 capacity_per_store=w.spec.num_accounts, seed=5)
    result = ab.randomized_search(w, g, trials=200, seed=5)
    assert ab.validate_plan(result.plan, w, g) == []
    assert result.objective == ab.plan_objective(result.plan, w, g)


def test_simulation_conserves_and_matches_replay():
    spec = small_spec(m=2)
    w = ab.generate_workload(spec, seed=11)
    plan = ab.single_store_plan(spec.num_accounts)
    g = ab.synthetic_store_graph(stores=1, delay_lo=0, delay_hi=0,
                                 capacity_per_store=spec.num_accounts, seed=1)
    r = ab.run_simulation(w, plan, g, delta_ms=600, base_commit_ms=5)
    assert sum(r.final_balances) == spec.num_accounts * spec.initial_balance
    attackers = {t.id for t in w.transactions if t.is_malicious}
    assert list(r.final_balances) == list(ab.clean_replay(w, attackers, r.commit_order))
    assert ab.audit_admission_safety(r, w) == []
    for idx, ep in enumerate(r.episodes):
        assert ab.closure_for_episode(r, idx) == set(ep.affected)


def test_zero_delay_contains_all_attacks():
    spec = small_spec(m=5)
    w = ab.generate_workload(spec, seed=2)
    plan = ab.single_store_plan(spec.num_accounts)
    g = ab.synthetic_store_graph(stores=1, delay_lo=0, delay_hi=0,
                                 capacity_per_store=spec.num_accounts, seed=1)
    r = ab.run_simulation(w, plan, g, delta_ms=0)
    assert r.metrics.affected_count == 0
    assert r.metrics.episodes == 0


def test_exhaustive_bounds_heuristic():
    spec = ab.WorkloadSpec(n=3, alpha=2, beta=1.0, num_accounts=6, num_tenants=2)
    w = ab.generate_workload(spec, seed=5)
    g = ab.synthetic_store_graph(stores=2, delay_lo=5, delay_hi=50,
                                 capacity_per_store=5, seed=4)
    plan, best, enumerated = ab.exhaustive_partition(w, g)
    heur = ab.randomized_search(w, g, trials=5000, seed=4)
    assert enumerated == 2 ** 6
    assert best <= heur.objective


@pytest.fixture(scope="module")
def cli():
    path = os.environ.get("AIMS_BENCH_CLI")
    if not path or not os.path.exists(path):
        pytest.skip("AIMS_BENCH_CLI not set")
    return path


def test_cli_end_to_end(cli, tmp_path):
    config = tmp_path / "exp.cfg"
    config.write_text(
        "[workload]\nn = 60\nalpha = 5\nbeta = 0.4\nnum_accounts = 720\nnum_tenants = 3\n"
        "\n[sweep]\nm = 2\ndelta_ms = 400\npartitions = 2\nseeds = 1\ntrials = 50\n"
    )
    workload = tmp_path / "w.txt"
    stores = tmp_path / "stores.txt"
    plan = tmp_path / "plan.txt"
    trace = tmp_path / "trace.tsv"

    def run(*args):
        return subprocess.run([cli, *args], capture_output=True, text=True)

    assert run("gen", "--config", str(config), "--seed", "9", "--out", str(workload)).returncode == 0

    graph = ab.synthetic_store_graph(stores=2, delay_lo=10, delay_hi=80,
                                     capacity_per_store=720, seed=9)
    ab.write_store_graph_file(graph, str(stores))

    assert run("plan", "--workload", str(workload), "--stores", str(stores),
               "--trials", "100", "--seed", "9", "--out", str(plan)).returncode == 0
    assert run("sim", "--workload", str(workload), "--stores", str(stores),
               "--plan", str(plan), "--delta", "400", "--trace", str(trace)).returncode == 0
    assert run("verify", "--workload", str(workload), "--stores", str(stores),
               "--plan", str(plan), "--trace", str(trace), "--delta", "400").returncode == 0

    outdir = tmp_path / "matrix"
    assert run("matrix", "--config", str(config), "--out", str(outdir)).returncode == 0
    csv = (outdir / "results.csv").read_text()
    assert csv.startswith("m,delta_ms,partitions,seed,affected,")

    assert run("plot", "--csv", str(outdir / "results.csv"),
               "--out", str(tmp_path / "plots"), "--x", "m").returncode == 0
    assert (tmp_path / "plots" / "affected.dat").exists()

    # config errors exit with 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("[sweep]\nm =\n")
    assert run("matrix", "--config", str(bad), "--out", str(outdir)).returncode == 2
