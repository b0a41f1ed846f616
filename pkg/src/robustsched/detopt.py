"""Exact and heuristic solvers for total flow time on one machine with a fixed scenario."""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .evaluate import evaluate_sequence, flow_of
from .lpformat import LPModel
from .model import InstanceError, Scenario, Sequence, SizeError

EXACT_CAP = 20
EXHAUSTIVE_CAP = 10


class Rule(str, Enum):
    EST = "EST"
    ECT = "ECT"
    PHILLIPS = "PHILLIPS"


@dataclass(frozen=True)
class OptResult:
    sequence: Sequence
    value: int
    nodes: int
    proven_optimal: bool


# ---------------------------------------------------------------------------
# preemptive relaxation


def srpt_completions(jobs, release, processing, available_from: int = 0) -> dict[int, int]:
    """Completion times of the shortest-remaining-processing-time schedule of ``jobs``.

    The machine is idle before ``available_from``. Ties go to the lower job id.
    """
    arrivals = sorted(jobs, key=lambda j: (max(release[j], available_from), j))
    completions = {}
    ready: list[tuple[int, int]] = []
    t = available_from
    k = 0
    m = len(arrivals)
    while k < m or ready:
        if not ready:
            t = max(t, release[arrivals[k]])
        while k < m and release[arrivals[k]] <= t:
            j = arrivals[k]
            heapq.heappush(ready, (processing[j], j))
            k += 1
        rem, j = heapq.heappop(ready)
        nxt = release[arrivals[k]] if k < m else math.inf
        if t + rem <= nxt:
            t += rem
            completions[j] = t
        else:
            heapq.heappush(ready, (rem - (nxt - t), j))
            t = nxt
    return completions


def _srpt_flow(jobs, release, processing, available_from: int) -> int:
    comp = srpt_completions(jobs, release, processing, available_from)
    return sum(comp[j] - release[j] for j in jobs)


def srpt_relaxation(scenario: Scenario, available_from: int = 0) -> int:
    """Total flow of the optimal preemptive schedule; a lower bound on the
    non-preemptive optimum with the same machine availability."""
    return _srpt_flow(range(scenario.n), scenario.release, scenario.processing, available_from)


# ---------------------------------------------------------------------------
# dispatch rules


def _est(release, processing, n):
    remaining = set(range(n))
    order = []
    t = 0
    while remaining:
        released = [j for j in remaining if release[j] <= t]
        if not released:
            t = min(release[j] for j in remaining)
            released = [j for j in remaining if release[j] <= t]
        j = min(released, key=lambda j: (processing[j], j))
        order.append(j)
        remaining.discard(j)
        t = max(t, release[j]) + processing[j]
    return order


def _ect(release, processing, n):
    remaining = set(range(n))
    order = []
    t = 0
    while remaining:
        j = min(remaining, key=lambda j: (max(t, release[j]) + processing[j], j))
        order.append(j)
        remaining.discard(j)
        t = max(t, release[j]) + processing[j]
    return order


def _phillips(release, processing, n):
    comp = srpt_completions(range(n), release, processing, 0)
    return sorted(range(n), key=lambda j: (comp[j], j))


_RULES = {Rule.EST: _est, Rule.ECT: _ect, Rule.PHILLIPS: _phillips}


def dispatch_heuristic(scenario: Scenario, rule: Rule | str) -> Sequence:
    """Sequence built by a dispatch rule.

    EST: when the machine frees, the shortest released job (idle until the
    next release if none). ECT: the job with the earliest achievable
    completion. PHILLIPS: jobs ordered by their preemptive SRPT completion.
    """
    rule = rule if isinstance(rule, Rule) else Rule(str(rule).upper())
    return Sequence(tuple(_RULES[rule](scenario.release, scenario.processing, scenario.n)))


# ---------------------------------------------------------------------------
# exact solvers


def solve_optimal(scenario: Scenario, cap: int = EXACT_CAP, node_limit: int | None = None) -> OptResult:
    """Minimum total flow by depth-first branch-and-bound.

    Node bound: prefix flow plus the preemptive relaxation of the remaining
    jobs with the machine available from the prefix completion. Children are
    tried in ascending earliest-completion order.
    """
    n = scenario.n
    if n > cap:
        raise SizeError(f"exact solve capped at n <= {cap} (got {n}); use dispatch_heuristic instead")
    release, processing = scenario.release, scenario.processing

    best_order, best_val = None, math.inf
    for rule in Rule:
        order = _RULES[rule](release, processing, n)
        val = flow_of(order, release, processing)
        if val < best_val:
            best_order, best_val = order, val

    nodes = 0
    aborted = False
    prefix: list[int] = []

    def dfs(remaining: list[int], c: int, flow: int) -> None:
        nonlocal best_order, best_val, nodes, aborted
        nodes += 1
        if node_limit is not None and nodes > node_limit:
            aborted = True
            return
        if len(remaining) == 1:
            j = remaining[0]
            total = flow + max(c, release[j]) + processing[j] - release[j]
            if total < best_val:
                best_val, best_order = total, prefix + [j]
            return
        if flow + _srpt_flow(remaining, release, processing, c) >= best_val:
            return
        children = sorted(remaining, key=lambda j: (max(c, release[j]) + processing[j], j))
        for j in children:
            s = max(c, release[j])
            prefix.append(j)
            dfs([i for i in remaining if i != j], s + processing[j], flow + s - release[j] + processing[j])
            prefix.pop()
            if aborted:
                return

    if n > 0:
        dfs(list(range(n)), 0, 0)
    return OptResult(Sequence(tuple(best_order)), int(best_val), nodes, not aborted)


@lru_cache(maxsize=4)
def permutation_table(n: int) -> np.ndarray:
    """All permutations of ``0..n-1`` in lexicographic order, one per row."""
    count = math.factorial(n)
    flat = np.fromiter(itertools.chain.from_iterable(itertools.permutations(range(n))), dtype=np.int8, count=count * n)
    table = flat.reshape(count, n)
    table.setflags(write=False)
    return table


def exhaustive_optimal(scenario: Scenario, cap: int = EXHAUSTIVE_CAP) -> OptResult:
    """Minimum over all ``n!`` sequences; the lexicographically first minimizer wins."""
    n = scenario.n
    if n > cap:
        raise SizeError(f"exhaustive search capped at n <= {cap} (got {n})")
    perms = permutation_table(n)
    rel = np.asarray(scenario.release, dtype=np.int64)[perms]
    proc = np.asarray(scenario.processing, dtype=np.int64)[perms]
    total = np.zeros(perms.shape[0], dtype=np.int64)
    c = rel[:, 0].copy()
    for pos in range(n):
        r = rel[:, pos]
        c = np.maximum(r, c) + proc[:, pos]
        total += c - r
    k = int(np.argmin(total))
    return OptResult(Sequence(tuple(int(j) for j in perms[k])), int(total[k]), int(perms.shape[0]), True)


# ---------------------------------------------------------------------------
# set partitioning formulation


@dataclass(frozen=True)
class Column:
    job: int
    start: int
    delay: int
    duration: int


@dataclass(frozen=True)
class SetPartitioningModel:
    """One column per (job, start slot). Slot ``t`` covers time ``[t, t+1)``."""

    columns: tuple[Column, ...]
    A: np.ndarray  # job x column
    B: np.ndarray  # slot x column
    horizon: int
    first_slot: int

    @property
    def slots(self) -> range:
        return range(self.first_slot, self.horizon + 1)

    @property
    def matrix(self) -> np.ndarray:
        return np.vstack([self.A, self.B])

    def to_lp(self) -> str:
        model = LPModel(name="set partitioning model", sense="minimize")
        total_h = sum({c.job: c.duration for c in self.columns}.values())
        model.comments.append(f"objective omits the constant total processing time {total_h}")
        names = [f"tau_{c.job}_{c.start}" for c in self.columns]
        model.objective = [(c.delay, name) for c, name in zip(self.columns, names)]
        for i in range(self.A.shape[0]):
            terms = [(1, names[l]) for l in np.flatnonzero(self.A[i])]
            model.add_row(f"assign_{i}", terms, "=", 1)
        for row, t in enumerate(self.slots):
            terms = [(1, names[l]) for l in np.flatnonzero(self.B[row])]
            if terms:
                model.add_row(f"slot_{t}", terms, "<=", 1)
        model.binaries = names
        return model.render()


def minimal_horizon(scenario: Scenario) -> int:
    """Last slot used by a minimum-makespan (release-ordered) schedule."""
    order = sorted(range(scenario.n), key=lambda j: (scenario.release[j], j))
    return max(evaluate_sequence(order, scenario).completions) - 1


def build_set_partitioning(scenario: Scenario, horizon: int | None = None) -> SetPartitioningModel:
    H_min = minimal_horizon(scenario)
    if horizon is None:
        horizon = max(scenario.release) + sum(scenario.processing)
    elif horizon < H_min:
        raise InstanceError(f"horizon {horizon} too small; minimal feasible horizon is {H_min}")
    first = 0 if min(scenario.release) == 0 else 1
    cols = []
    for j in range(scenario.n):
        r, p = scenario.release[j], scenario.processing[j]
        for t in range(r, horizon - p + 2):
            cols.append(Column(j, t, t - r, p))
    A = np.zeros((scenario.n, len(cols)), dtype=np.int8)
    B = np.zeros((horizon - first + 1, len(cols)), dtype=np.int8)
    for l, col in enumerate(cols):
        A[col.job, l] = 1
        B[col.start - first : col.start - first + col.duration, l] = 1
    return SetPartitioningModel(tuple(cols), A, B, horizon, first)


def solve_set_partitioning_exhaustive(model: SetPartitioningModel, max_columns: int = 20) -> tuple[int, list[Column]]:
    """Enumerate one column per job; returns (total flow, chosen columns)."""
    if len(model.columns) > max_columns:
        raise SizeError(f"exhaustive column selection capped at {max_columns} columns")
    by_job: dict[int, list[tuple[Column, int]]] = {}
    for l, col in enumerate(model.columns):
        mask = 0
        for row in np.flatnonzero(model.B[:, l]):
            mask |= 1 << int(row)
        by_job.setdefault(col.job, []).append((col, mask))
    best, best_cols = math.inf, []
    for combo in itertools.product(*(by_job[j] for j in sorted(by_job))):
        used = 0
        ok = True
        for _, mask in combo:
            if used & mask:
                ok = False
                break
            used |= mask
        if ok:
            val = sum(c.delay + c.duration for c, _ in combo)
            if val < best:
                best, best_cols = val, [c for c, _ in combo]
    if best_cols == []:
        raise InstanceError("no feasible column selection within the horizon")
    return int(best), best_cols


# ---------------------------------------------------------------------------
# disjunctive big-M formulation


def big_m(scenario: Scenario) -> int:
    return max(scenario.release) + sum(scenario.processing)


def build_dsmsp_bigM(scenario: Scenario) -> LPModel:
    n = scenario.n
    r, p = scenario.release, scenario.processing
    M = big_m(scenario)
    model = LPModel(name="disjunctive big-M model", sense="minimize")
    model.comments.append(f"M = {M}")
    model.objective = [(1, f"s_{i}") for i in range(n)]
    model.objective_constant = sum(p[i] - r[i] for i in range(n))
    for i in range(n):
        model.add_row(f"release_{i}", [(1, f"s_{i}")], ">=", r[i])
    for i in range(n):
        for j in range(n):
            if i != j:
                # s_j + M(1 - z_i_j) >= s_i + p_i
                model.add_row(f"order_{i}_{j}", [(1, f"s_{j}"), (-1, f"s_{i}"), (-M, f"z_{i}_{j}")], ">=", p[i] - M)
    for i in range(n):
        for j in range(i + 1, n):
            model.add_row(f"pair_{i}_{j}", [(1, f"z_{i}_{j}"), (1, f"z_{j}_{i}")], "=", 1)
    for i in range(n):
        model.add_bound(f"s_{i}", 0, None)
    model.binaries = [f"z_{i}_{j}" for i in range(n) for j in range(n) if i != j]
    return model


def export_dsmsp_bigM(scenario: Scenario) -> str:
    return build_dsmsp_bigM(scenario).render()
