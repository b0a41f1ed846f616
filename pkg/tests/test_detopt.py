from __future__ import annotations

import re

import numpy as np
import pytest
from hypothesis import given

import oracles
from robustsched.detopt import (
    Rule,
    big_m,
    build_dsmsp_bigM,
    build_set_partitioning,
    dispatch_heuristic,
    exhaustive_optimal,
    export_dsmsp_bigM,
    minimal_horizon,
    permutation_table,
    solve_optimal,
    solve_set_partitioning_exhaustive,
    srpt_completions,
    srpt_relaxation,
)
from robustsched.evaluate import evaluate_sequence
from robustsched.model import InstanceError, Scenario, SizeError
from strategies import scenarios

SMALL = Scenario((0, 1), (4, 1))

FIXED_PAIR_MATRIX = [
    [1, 1, 1, 0],
    [0, 0, 0, 1],
    [1, 0, 0, 0],
    [1, 1, 0, 0],
    [0, 1, 1, 1],
    [0, 0, 1, 1],
]


def test_opt_examples(fixed_pair_scenario):
    r = solve_optimal(fixed_pair_scenario)
    assert r.sequence.order == (0, 1) and r.value == 4 and r.proven_optimal
    r = solve_optimal(SMALL)
    assert r.sequence.order == (1, 0) and r.value == 7
    assert exhaustive_optimal(fixed_pair_scenario).value == 4
    one = Scenario((6,), (3,))
    assert solve_optimal(one).value == exhaustive_optimal(one).value == 3


@given(scenarios(max_n=7))
def test_opt_matches_permutation_oracle(sc):
    _, best = oracles.best_sequence(sc.release, sc.processing)
    res = solve_optimal(sc)
    assert res.value == best
    assert evaluate_sequence(res.sequence, sc).total_flow == best
    ex = exhaustive_optimal(sc)
    assert ex.value == best
    assert ex.sequence.order == oracles.best_sequence(sc.release, sc.processing)[0]


@given(scenarios(max_n=7))
def test_zero_release_matches_spt(sc):
    z = Scenario((0,) * sc.n, sc.processing)
    spt = sorted(range(z.n), key=lambda j: (z.processing[j], j))
    assert solve_optimal(z).value == oracles.flow(spt, z.release, z.processing)
    assert srpt_relaxation(z) == oracles.flow(spt, z.release, z.processing)
    for rule in Rule:
        assert dispatch_heuristic(z, rule).order == tuple(spt)


def test_srpt_example():
    comp = srpt_completions(range(2), SMALL.release, SMALL.processing)
    assert comp == {0: 5, 1: 2}
    assert srpt_relaxation(SMALL) == 6 <= 7
    assert srpt_relaxation(Scenario((4,), (3,))) == 3


def test_srpt_available_from():
    # machine busy until 10: both jobs start late
    assert srpt_relaxation(Scenario((0, 0), (2, 3)), available_from=10) == 12 + 15


def test_dispatch_examples():
    assert dispatch_heuristic(SMALL, Rule.EST).order == (0, 1)
    assert evaluate_sequence([0, 1], SMALL).total_flow == 8
    assert dispatch_heuristic(SMALL, "ect").order == (1, 0)
    assert dispatch_heuristic(SMALL, "PHILLIPS").order == (1, 0)
    one = Scenario((2,), (5,))
    assert all(dispatch_heuristic(one, r).order == (0,) for r in Rule)


@given(scenarios(max_n=7))
def test_bounds_sandwich(sc):
    opt = solve_optimal(sc).value
    assert srpt_relaxation(sc) <= opt
    for rule in Rule:
        assert evaluate_sequence(dispatch_heuristic(sc, rule), sc).total_flow >= opt
    # Phillips: total completion within twice the preemptive total completion
    pre = srpt_completions(range(sc.n), sc.release, sc.processing)
    ph = evaluate_sequence(dispatch_heuristic(sc, Rule.PHILLIPS), sc)
    assert ph.total_completion <= 2 * sum(pre.values())


def test_caps():
    big = Scenario(tuple(range(11)), (1,) * 11)
    with pytest.raises(SizeError):
        exhaustive_optimal(big)
    with pytest.raises(SizeError):
        solve_optimal(Scenario((0,) * 21, (1,) * 21))


def test_node_limit_reports_unproven():
    sc = Scenario((0, 3, 5, 6, 9, 9, 12, 14), (7, 2, 6, 1, 8, 3, 2, 5))
    res = solve_optimal(sc, node_limit=1)
    assert not res.proven_optimal
    assert res.value >= solve_optimal(sc).value


def test_permutation_table_lexicographic():
    t = permutation_table(3)
    assert t.tolist() == [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]


def test_fixed_pair_matrix(fixed_pair_scenario):
    model = build_set_partitioning(fixed_pair_scenario, horizon=4)
    assert model.matrix.tolist() == FIXED_PAIR_MATRIX
    assert [(c.job, c.start, c.delay) for c in model.columns] == [(0, 1, 0), (0, 2, 1), (0, 3, 2), (1, 3, 0)]
    value, cols = solve_set_partitioning_exhaustive(model)
    assert value == 4 and [(c.job, c.start) for c in cols] == [(0, 1), (1, 3)]


def test_setpart_single_job():
    model = build_set_partitioning(Scenario((1,), (2,)), horizon=3)
    assert [c.start for c in model.columns] == [1, 2]


def test_setpart_horizon_checks(fixed_pair_scenario):
    assert minimal_horizon(fixed_pair_scenario) == 4
    with pytest.raises(InstanceError, match="minimal feasible horizon is 4"):
        build_set_partitioning(fixed_pair_scenario, horizon=3)
    default = build_set_partitioning(fixed_pair_scenario)
    assert default.horizon == 3 + 4


@given(scenarios(max_n=3, max_r=4))
def test_setpart_optimum_matches(sc):
    model = build_set_partitioning(sc, horizon=minimal_horizon(sc) + 2)
    if len(model.columns) > 20:
        return
    value, cols = solve_set_partitioning_exhaustive(model)
    assert value == solve_optimal(sc).value
    assert np.all(model.A.sum(axis=1) >= 1)


def test_setpart_lp_text(fixed_pair_scenario):
    text = build_set_partitioning(fixed_pair_scenario, horizon=4).to_lp()
    assert "assign_0:" in text and "slot_4:" in text
    assert text.count("tau_") >= 4


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_bigm_counts(n):
    sc = Scenario(tuple(range(n)), tuple(range(1, n + 1)))
    model = build_dsmsp_bigM(sc)
    zs = [b for b in model.binaries if b.startswith("z_")]
    assert len(zs) == n * (n - 1)
    assert sum(r[0].startswith("order_") for r in model.rows) == n * (n - 1)
    assert sum(r[0].startswith("pair_") for r in model.rows) == n * (n - 1) // 2
    text = export_dsmsp_bigM(sc)
    assert len(set(re.findall(r"z_\d+_\d+", text))) == n * (n - 1)


def test_bigm_single_job_objective():
    model = build_dsmsp_bigM(Scenario((4,), (3,)))
    assert model.binaries == []
    assert model.objective == [(1, "s_0")] and model.objective_constant == 3 - 4


def test_bigm_optimum_by_enumeration(fixed_pair_scenario):
    """For each z assignment, the least feasible starts are the non-delay
    schedule; the best objective is the deterministic optimum."""
    model = build_dsmsp_bigM(fixed_pair_scenario)
    assert big_m(fixed_pair_scenario) == 3 + 4
    best = None
    for order in ([0, 1], [1, 0]):
        sched = evaluate_sequence(order, fixed_pair_scenario)
        z = {f"z_{order[0]}_{order[1]}": 1, f"z_{order[1]}_{order[0]}": 0}
        vals = {f"s_{j}": sched.starts[j] for j in range(2)} | z
        for name, terms, op, rhs in model.rows:
            lhs = sum(c * vals[v] for c, v in terms)
            assert lhs >= rhs if op == ">=" else lhs == rhs, name
        obj = sum(c * vals[v] for c, v in model.objective) + model.objective_constant
        best = obj if best is None else min(best, obj)
    assert best == 4


def test_bigm_external_solver(fixed_pair_scenario, tmp_path):
    highspy = pytest.importorskip("highspy")
    path = tmp_path / "m.lp"
    path.write_text(export_dsmsp_bigM(fixed_pair_scenario))
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.readModel(str(path))
    h.run()
    assert round(h.getInfo().objective_function_value) == 4
