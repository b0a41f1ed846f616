from __future__ import annotations

import csv
import io
import json

import pytest

from robustsched.bench import (
    RESULT_HEADER,
    SuiteConfig,
    default_budget,
    distribution_study,
    gap,
    histogram,
    load_suite,
    results_csv,
    run_benchmark,
    suite_instances,
    trace_csv,
    worker_count,
)
from robustsched.model import GenParams, Instance, InstanceError, generate_instance
from robustsched.search import SearchConfig, run_vns


def test_gap_values():
    assert gap(188, 212) == 11.32
    assert gap(189, 204) == 7.35
    assert gap(50, 50) == 0.0


def test_gap_rounds_half_up():
    # 100 / 800 = 0.125 exactly; half-even would give 0.12
    assert gap(799, 800) == 0.13
    with pytest.raises(InstanceError):
        gap(5, 4)


def test_worker_count_env(monkeypatch):
    monkeypatch.delenv("ROBUSTSCHED_THREADS", raising=False)
    assert worker_count() == 1
    monkeypatch.setenv("ROBUSTSCHED_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("ROBUSTSCHED_THREADS", "x")
    with pytest.raises(InstanceError):
        worker_count()


def test_default_budget_scales_with_time_class():
    assert default_budget(7, 2, "evals") == 5000
    assert default_budget(7, 2, "wallclock") == 100


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_grid_layout():
    suite = SuiteConfig(sizes=[7], algorithms=["EXH", "VNS", "ILS"], budgets={"7": 300})
    grid = suite_instances(suite)
    assert [g.name for g in grid[:3]] == ["A1", "A2", "A3"] and grid[-1].name == "A20"
    assert [g.mu for g in grid] == [2] * 5 + [3] * 5 + [4] * 5 + [6] * 5
    assert len({g.seed for g in grid}) == 20


def test_size7_suite_layout():
    suite = SuiteConfig(sizes=[7], algorithms=["EXH", "VNS", "ILS"], budgets={"7": 300})
    res = run_benchmark(suite, workers=1)
    text = results_csv(res.all_rows())
    assert text.splitlines()[0] == ",".join(RESULT_HEADER)
    rows = _rows(text)
    for algo in ("EXH", "VNS", "ILS"):
        assert sum(r["algo"] == algo and r["instance"] != "MEAN" for r in rows) == 20
    means = [r for r in rows if r["instance"] == "MEAN"]
    assert [int(r["mu"]) for r in means] == [2, 3, 4, 6]
    for r in rows:
        if r["instance"] != "MEAN":
            assert int(r["cost"]) >= int(r["lower_bound"])
            assert r["elapsed"] == ""


def test_single_job_suite():
    suite = SuiteConfig(sizes=[1], mus=[2], instances_per_cell=1, algorithms=["VNS"], budgets={"1": 10})
    res = run_benchmark(suite, workers=1)
    row = res.rows[0]
    inst = suite_instances(suite)[0].instance
    assert row.cost == row.lower_bound == inst.p_hi[0]
    assert row.cells()[RESULT_HEADER.index("gap_pct")] == "0.00"


def test_rerun_byte_identical():
    suite = SuiteConfig(sizes=[7], mus=[2, 6], instances_per_cell=2, algorithms=["VNS", "ILS"], budgets={"7": 200})
    a = results_csv(run_benchmark(suite, workers=1).all_rows())
    b = results_csv(run_benchmark(suite, workers=2).all_rows())
    assert a == b


def test_failures_become_rows():
    suite = SuiteConfig(sizes=[10], mus=[2], instances_per_cell=1, algorithms=["EXH", "VNS"], budgets={"10": 100})
    res = run_benchmark(suite, workers=1)
    exh = res.rows[0]
    assert isinstance(exh.cost, str) and exh.cost.startswith("error:")
    assert res.errors and res.rows[1].cost >= res.rows[1].lower_bound


def test_load_suite(tmp_path):
    path = tmp_path / "s.cfg"
    path.write_text(json.dumps({"sizes": [7], "mus": [2], "instances_per_cell": 1, "algorithms": ["vns"]}))
    suite = load_suite(path)
    assert suite.algorithms == ["VNS"] and suite.budget_for(7, 2) == 5000
    path.write_text(json.dumps({"sizes": [7], "algorithms": ["SA"]}))
    with pytest.raises(InstanceError):
        load_suite(path)
    path.write_text("{")
    with pytest.raises(InstanceError):
        load_suite(path)


def test_budget_lookup_order():
    suite = SuiteConfig(sizes=[7], budgets={"7": 100, "7:6": 250})
    assert suite.budget_for(7, 2) == 100 and suite.budget_for(7, 6) == 250


def test_trace_csv():
    inst = generate_instance(GenParams(6, 2, 0))
    out = run_vns(inst, SearchConfig(max_evals=200, seed=1))
    lines = trace_csv(out).splitlines()
    assert lines[0] == "step,best_value"
    assert int(lines[-1].split(",")[1]) == out.value


def test_distribution_study():
    inst = generate_instance(GenParams(7, 3, 0))
    cfg = SearchConfig(max_evals=200, seed=10)
    res = distribution_study(inst, "vns", 6, cfg, bins=4)
    assert [s for s, _ in res.values] == list(range(10, 16))
    assert sum(c for _, _, c in res.bins) == 6
    assert res.values_csv().splitlines()[0] == "seed,final_value"
    assert len(res.values_csv().splitlines()) == 7
    assert res == distribution_study(inst, "VNS", 6, cfg, bins=4, workers=2)


def test_distribution_equal_seeds_zero_variance():
    inst = generate_instance(GenParams(5, 2, 0))
    a = distribution_study(inst, "ILS", 2, SearchConfig(max_evals=100, seed=0))
    b = distribution_study(inst, "ILS", 2, SearchConfig(max_evals=100, seed=0))
    assert a.values == b.values
    deg = Instance.from_bounds([(0, 0)] * 4, [(3, 3), (1, 1), (2, 2), (5, 5)])
    d = distribution_study(deg, "VNS", 5, SearchConfig(max_evals=50))
    assert d.variance == 0 and {v for _, v in d.values} == {1 + 3 + 6 + 11}
    with pytest.raises(InstanceError):
        distribution_study(deg, "VNS", 1, SearchConfig(max_evals=50))


def test_histogram():
    assert histogram([3, 3, 3]) == ((3.0, 3.0, 3),)
    h = histogram([0, 1, 2, 3, 4, 5, 6, 7, 8, 10], bins=5)
    assert len(h) == 5 and sum(c for *_, c in h) == 10
    assert h[0][0] == 0 and h[-1][1] == 10
