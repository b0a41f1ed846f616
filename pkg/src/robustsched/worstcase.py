"""Worst-case total flow of a fixed sequence under interval uncertainty.

Processing times at their upper bounds are always worst. Release times only
need their endpoints: the first job in the sequence at its upper bound, the
last at its lower bound, interior jobs at either. The exact maximum is found
by a forward dynamic program over sequence positions whose states are
``(prefix completion, accumulated flow)`` pairs; a state dominated in both
coordinates can never finish ahead, so it is dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .evaluate import evaluate_sequence
from .lpformat import LPModel
from .model import (
    STREAM_SAMPLING,
    Instance,
    InstanceError,
    Scenario,
    SequenceLike,
    SizeError,
    as_order,
    make_rng,
)

BRUTEFORCE_MAX_N = 12
DEFAULT_K = 10
_CHUNK = 1 << 18


@dataclass(frozen=True)
class WorstCaseResult:
    value: int
    witness: Scenario


def release_choices(order, r_lo, r_hi) -> list[tuple[int, ...]]:
    """Release endpoints worth trying at each sequence position."""
    n = len(order)
    out = []
    for pos, j in enumerate(order):
        if pos == 0:
            out.append((r_hi[j],))
        elif pos == n - 1:
            out.append((r_lo[j],))
        elif r_lo[j] == r_hi[j]:
            out.append((r_lo[j],))
        else:
            out.append((r_lo[j], r_hi[j]))
    return out


def _prune(cand):
    # cand: (c, v, ...) tuples; keep the Pareto front, ascending c / descending v
    cand.sort(key=lambda t: (-t[0], -t[1]))
    kept = []
    best_v = -1
    for t in cand:
        if t[1] > best_v:
            kept.append(t)
            best_v = t[1]
    kept.reverse()
    return kept


def extend_front(front, choices, p):
    """One DP step over ``(c, v)`` states for a job with processing ``p``."""
    cand = []
    for r in choices:
        for c, v in front:
            s = r if r > c else c
            cand.append((s + p, v + s - r + p))
    return _prune(cand)


def worst_value(order, r_lo, r_hi, p_hi) -> int:
    """Worst-case total flow of ``order`` (value only, no witness)."""
    n = len(order)
    if n == 0:
        return 0
    first = order[0]
    front = [(r_hi[first] + p_hi[first], p_hi[first])]
    for pos in range(1, n):
        j = order[pos]
        if pos == n - 1:
            choices = (r_lo[j],)
        elif r_lo[j] == r_hi[j]:
            choices = (r_lo[j],)
        else:
            choices = (r_lo[j], r_hi[j])
        front = extend_front(front, choices, p_hi[j])
    return max(v for _, v in front)


def worst_case_flow(instance: Instance, sequence: SequenceLike) -> WorstCaseResult:
    """Exact worst case of ``sequence`` with a witness scenario.

    Ties between witnesses are resolved deterministically, preferring lower
    release endpoints at earlier positions.
    """
    order = as_order(sequence, instance.n)
    r_lo, r_hi, p_hi = instance.r_lo, instance.r_hi, instance.p_hi
    choices = release_choices(order, r_lo, r_hi)
    # states carry (c, v, choice index, parent index) for backtracking
    layers = []
    front = [(0, 0, -1, -1)]
    for pos, j in enumerate(order):
        p = p_hi[j]
        cand = []
        for ci, r in enumerate(choices[pos]):
            for fi, (c, v, _, _) in enumerate(front):
                s = r if pos == 0 or r > c else c
                cand.append((s + p, v + s - r + p, ci, fi))
        cand.sort(key=lambda t: (-t[0], -t[1], t[2], t[3]))
        kept = []
        best_v = -1
        for t in cand:
            if t[1] > best_v:
                kept.append(t)
                best_v = t[1]
        kept.reverse()
        front = kept
        layers.append(front)
    # smallest completion carries the largest flow
    idx = 0
    value = front[0][1]
    release = [0] * instance.n
    for pos in range(len(order) - 1, -1, -1):
        _, _, ci, fi = layers[pos][idx]
        release[order[pos]] = choices[pos][ci]
        idx = fi
    witness = Scenario(tuple(release), tuple(p_hi))
    return WorstCaseResult(value, witness)


def enumerate_extreme_scenarios(instance: Instance, sequence: SequenceLike) -> Iterator[Scenario]:
    """Yield the ``max(1, 2**(n-2))`` candidate worst-case scenarios of a sequence.

    Interior release choices follow a binary counter over sequence positions,
    position 1 being the least significant bit and 0 meaning the lower bound.
    """
    order = as_order(sequence, instance.n)
    n = len(order)
    r_lo, r_hi, p_hi = instance.r_lo, instance.r_hi, instance.p_hi
    base = list(r_lo)
    base[order[0]] = r_hi[order[0]]
    if n >= 2:
        base[order[-1]] = r_lo[order[-1]]
    interior = order[1:-1] if n >= 2 else ()
    for m in range(1 << len(interior)):
        release = list(base)
        for bit, j in enumerate(interior):
            release[j] = r_hi[j] if (m >> bit) & 1 else r_lo[j]
        yield Scenario(tuple(release), tuple(p_hi))


def batch_flows(order, R: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Total flow of ``order`` for each row of the ``(m, n)`` matrices ``R``, ``P``."""
    total = np.zeros(R.shape[0], dtype=np.int64)
    c = None
    for j in order:
        r = R[:, j]
        s = r if c is None else np.maximum(r, c)
        c = s + P[:, j]
        total += c - r
    return total


def _corner_sweep(order, r_lo, r_hi, p_lo, p_hi) -> tuple[int, int]:
    """Max flow over all 4**n endpoint combinations; returns (value, corner index)."""
    n = len(order)
    r_lo = np.asarray(r_lo, dtype=np.int64)
    p_lo = np.asarray(p_lo, dtype=np.int64)
    rw = np.asarray(r_hi, dtype=np.int64) - r_lo
    pw = np.asarray(p_hi, dtype=np.int64) - p_lo
    total_corners = 1 << (2 * n)
    best_val, best_idx = -1, -1
    for start in range(0, total_corners, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total_corners), dtype=np.int64)
        total = np.zeros(idx.shape[0], dtype=np.int64)
        c = None
        for j in order:
            r = r_lo[j] + ((idx >> (2 * j)) & 1) * rw[j]
            p = p_lo[j] + ((idx >> (2 * j + 1)) & 1) * pw[j]
            s = r if c is None else np.maximum(r, c)
            c = s + p
            total += c - r
        k = int(np.argmax(total))
        if total[k] > best_val:
            best_val, best_idx = int(total[k]), int(idx[k])
    return best_val, best_idx


def sample_scenarios(instance: Instance, count: int, rng: np.random.Generator):
    """``count`` scenarios drawn uniformly from the integer box; returns (R, P)."""
    lo = np.array([instance.r_lo, instance.p_lo], dtype=np.int64)
    hi = np.array([instance.r_hi, instance.p_hi], dtype=np.int64)
    draws = rng.integers(lo, hi, size=(count, 2, instance.n), endpoint=True)
    return draws[:, 0, :], draws[:, 1, :]


def worst_case_bruteforce(
    instance: Instance,
    sequence: SequenceLike,
    interior_samples: int = 0,
    seed: int = 0,
) -> WorstCaseResult:
    """Oracle: max over every release/processing endpoint combination plus random
    interior scenarios. Exponential; limited to ``n <= 12``."""
    order = as_order(sequence, instance.n)
    n = instance.n
    if n > BRUTEFORCE_MAX_N:
        raise SizeError(f"corner sweep needs n <= {BRUTEFORCE_MAX_N}, got {n}")
    value, k = _corner_sweep(order, instance.r_lo, instance.r_hi, instance.p_lo, instance.p_hi)
    release = tuple(j.release.hi if (k >> (2 * i)) & 1 else j.release.lo for i, j in enumerate(instance.jobs))
    processing = tuple(
        j.processing.hi if (k >> (2 * i + 1)) & 1 else j.processing.lo for i, j in enumerate(instance.jobs)
    )
    witness = Scenario(release, processing)
    if interior_samples > 0:
        R, P = sample_scenarios(instance, interior_samples, make_rng(seed, STREAM_SAMPLING))
        flows = batch_flows(order, R, P)
        m = int(np.argmax(flows))
        if flows[m] > value:
            value = int(flows[m])
            witness = Scenario(tuple(R[m]), tuple(P[m]))
    assert evaluate_sequence(order, witness).total_flow == value
    return WorstCaseResult(value, witness)


def awcpp_horizon(instance: Instance) -> int:
    return max(instance.r_hi) + sum(instance.p_hi)


def minimal_bits(instance: Instance) -> int:
    """Smallest K with ``2**K - 1`` covering every slack in the linearized model."""
    return max(1, math.ceil(math.log2(awcpp_horizon(instance) + 1)))


def build_awcpp_model(instance: Instance, sequence: SequenceLike, K: int = DEFAULT_K) -> LPModel:
    """Linearized worst-case model of a sequence.

    Slacks ``s_i - r_i`` and ``s_i - (s_prev + p_prev)`` are binary expansions
    over bits ``k = 0..K-1``; complementarity becomes ``u_i_k + v_i_k' <= 1``.
    """
    order = as_order(sequence, instance.n)
    if K < 1:
        raise InstanceError("K must be >= 1")
    need = minimal_bits(instance)
    if K < need:
        raise InstanceError(
            f"K={K} cannot cover horizon {awcpp_horizon(instance)}; minimal feasible K is {need}"
        )
    p_hi = instance.p_hi
    model = LPModel(name=f"worst-case model for {instance.name}, sequence {','.join(map(str, order))}", sense="maximize")
    model.comments.append(f"K = {K}; bits k = 0..{K - 1}")
    for j in order:
        model.objective += [(1, f"s_{j}"), (-1, f"r_{j}")]
    model.objective_constant = sum(p_hi)
    first = order[0]
    model.add_row(f"start_{first}", [(1, f"s_{first}"), (-1, f"r_{first}")], "=", 0)
    for prev, j in zip(order, order[1:]):
        u = [(-(1 << k), f"u_{j}_{k}") for k in range(K)]
        v = [(-(1 << k), f"v_{j}_{k}") for k in range(K)]
        model.add_row(f"idle_{j}", [(1, f"s_{j}"), (-1, f"r_{j}")] + u, "=", 0)
        model.add_row(f"wait_{j}", [(1, f"s_{j}"), (-1, f"s_{prev}")] + v, "=", p_hi[prev])
    for j in order[1:]:
        for k in range(K):
            for k2 in range(K):
                model.add_row(f"excl_{j}_{k}_{k2}", [(1, f"u_{j}_{k}"), (1, f"v_{j}_{k2}")], "<=", 1)
    for j in order:
        job = instance.jobs[j]
        model.add_bound(f"r_{j}", job.release.lo, job.release.hi)
    for j in order:
        model.add_bound(f"s_{j}", 0, None)
    for j in order[1:]:
        model.binaries += [f"u_{j}_{k}" for k in range(K)]
        model.binaries += [f"v_{j}_{k}" for k in range(K)]
    return model


def export_awcpp_model(instance: Instance, sequence: SequenceLike, K: int = DEFAULT_K) -> str:
    return build_awcpp_model(instance, sequence, K).render()
