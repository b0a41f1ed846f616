"""Metaheuristics over job sequences minimizing worst-case total flow.

Both searches descend with best-improvement adjacent swaps. ILS restarts
from a random sequence when its incumbent stalls; VNS additionally shakes
the incumbent with ``k`` random interchanges, widening ``k`` on failure.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .model import STREAM_SEARCH, Instance, InstanceError, Sequence, SequenceLike, SizeError, as_order, make_rng
from .worstcase import extend_front, worst_value

EXHAUSTIVE_ROBUST_CAP = 9
_MEMO_LIMIT = 2_000_000


@dataclass(frozen=True)
class SearchConfig:
    """Budget in evaluations (``max_evals``) or seconds (``time_limit``); set exactly one.

    ``restart_stall`` uses the budget's unit and defaults to 10% of it.
    """

    max_evals: int | None = None
    time_limit: float | None = None
    restart_stall: float | None = None
    seed: int = 0
    k_max: int | None = None
    perturb: bool = False

    def __post_init__(self):
        if (self.max_evals is None) == (self.time_limit is None):
            raise InstanceError("set exactly one of max_evals or time_limit")
        if self.budget <= 0:
            raise InstanceError("budget must be positive")
        if self.restart_stall is not None and not (0 < self.restart_stall <= self.budget):
            raise InstanceError("restart_stall must lie in (0, budget]")

    @property
    def wallclock(self) -> bool:
        return self.time_limit is not None

    @property
    def budget(self) -> float:
        return self.time_limit if self.wallclock else self.max_evals

    @property
    def stall(self) -> float:
        if self.restart_stall is not None:
            return self.restart_stall
        return 0.1 * self.time_limit if self.wallclock else max(1, self.max_evals // 10)


@dataclass(frozen=True)
class SearchOutcome:
    best: Sequence
    value: int
    trace: tuple[tuple[float, int], ...]  # (evaluation index or seconds, incumbent value)
    evaluations: int
    restarts: int
    initial_value: int | None = None
    seed: int | None = None
    elapsed: float = field(default=0.0, compare=False)


class _Objective:
    """Memoized worst-case evaluator that also keeps the budget clock."""

    def __init__(self, instance: Instance, config: SearchConfig | None = None):
        self.r_lo, self.r_hi, self.p_hi = instance.r_lo, instance.r_hi, instance.p_hi
        self.config = config
        self.cache: dict[tuple[int, ...], int] = {}
        self.evals = 0
        self.t0 = time.perf_counter()

    def __call__(self, order: tuple[int, ...]) -> int:
        self.evals += 1
        v = self.cache.get(order)
        if v is None:
            v = worst_value(order, self.r_lo, self.r_hi, self.p_hi)
            if len(self.cache) >= _MEMO_LIMIT:
                self.cache.clear()
            self.cache[order] = v
        return v

    def elapsed(self) -> float:
        return time.perf_counter() - self.t0

    def clock(self) -> float:
        return self.elapsed() if self.config.wallclock else self.evals

    def exhausted(self) -> bool:
        return self.clock() >= self.config.budget


class _Incumbent:
    def __init__(self, f: _Objective):
        self.f = f
        self.order: tuple[int, ...] | None = None
        self.value = math.inf
        self.trace: list[tuple[float, int]] = []

    def offer(self, order, value) -> None:
        if value < self.value:
            self.order, self.value = tuple(order), value
            step = round(self.f.elapsed(), 6) if self.f.config.wallclock else self.f.evals
            self.trace.append((step, int(value)))


def _descend(f, order) -> tuple[tuple[int, ...], int]:
    cur = list(order)
    cur_val = f(tuple(cur))
    n = len(cur)
    while True:
        best_pos, best_val = -1, cur_val
        for i in range(n - 1):
            cur[i], cur[i + 1] = cur[i + 1], cur[i]
            v = f(tuple(cur))
            cur[i], cur[i + 1] = cur[i + 1], cur[i]
            if v < best_val:
                best_pos, best_val = i, v
        if best_pos < 0:
            return tuple(cur), cur_val
        cur[best_pos], cur[best_pos + 1] = cur[best_pos + 1], cur[best_pos]
        cur_val = best_val


def local_search(instance: Instance, start: SequenceLike) -> Sequence:
    """Best-improvement descent over adjacent swaps to a local optimum.

    Ties between equally improving swaps go to the smallest position.
    """
    order = as_order(start, instance.n)
    best, _ = _descend(_Objective(instance), order)
    return Sequence(best)


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(int(rng), STREAM_SEARCH)


def _shake(order, k: int, rng: np.random.Generator) -> tuple[int, ...]:
    out = list(order)
    n = len(out)
    for _ in range(k):
        a, b = rng.choice(n, size=2, replace=False)
        out[a], out[b] = out[b], out[a]
    return tuple(out)


def shake(sequence: SequenceLike, k: int, rng) -> Sequence:
    """Apply ``k`` random interchanges of two distinct positions."""
    order = as_order(sequence)
    n = len(order)
    if not 1 <= k <= n - 1:
        raise InstanceError(f"k must lie in [1, {n - 1}], got {k}")
    return Sequence(_shake(order, k, _as_rng(rng)))


def _random_order(n: int, rng: np.random.Generator) -> tuple[int, ...]:
    return tuple(int(j) for j in rng.permutation(n))


def _trivial(instance: Instance, config: SearchConfig) -> SearchOutcome:
    v = worst_value((0,), instance.r_lo, instance.r_hi, instance.p_hi)
    return SearchOutcome(Sequence((0,)), v, ((1, v),), 1, 0, v, config.seed)


def _outcome(inc: _Incumbent, f: _Objective, restarts: int, initial: int, seed: int) -> SearchOutcome:
    return SearchOutcome(
        best=Sequence(inc.order),
        value=int(inc.value),
        trace=tuple(inc.trace),
        evaluations=f.evals,
        restarts=restarts,
        initial_value=int(initial),
        seed=seed,
        elapsed=f.elapsed(),
    )


def run_ils(instance: Instance, config: SearchConfig) -> SearchOutcome:
    """Restart-driven local search.

    Each iteration descends from the current solution and accepts strict
    improvements. After ``config.stall`` without improvement the current
    solution is replaced by a random one; the global best is kept.
    With ``config.perturb`` a random double interchange precedes each descent.
    """
    if instance.n == 1:
        return _trivial(instance, config)
    rng = make_rng(config.seed, STREAM_SEARCH)
    f = _Objective(instance, config)
    inc = _Incumbent(f)
    cur = _random_order(instance.n, rng)
    cur_val = f(cur)
    initial = cur_val
    inc.offer(cur, cur_val)
    last = f.clock()
    restarts = 0
    first = True
    while first or not f.exhausted():
        first = False
        start = _shake(cur, min(2, instance.n - 1), rng) if config.perturb else cur
        x, xv = _descend(f, start)
        if xv < cur_val:
            cur, cur_val = x, xv
            last = f.clock()
            inc.offer(cur, cur_val)
        if f.clock() - last >= config.stall and not f.exhausted():
            cur = _random_order(instance.n, rng)
            cur_val = f(cur)
            last = f.clock()
            restarts += 1
    return _outcome(inc, f, restarts, initial, config.seed)


def run_vns(instance: Instance, config: SearchConfig) -> SearchOutcome:
    """Variable neighborhood search with adjacent-swap descent.

    ``k`` starts at 1, resets to 1 on improvement and wraps to 1 after
    ``k_max`` (default ``n - 1``). Initial and restart solutions are descended
    before shaking begins.
    """
    n = instance.n
    if n == 1:
        return _trivial(instance, config)
    k_max = config.k_max if config.k_max is not None else n - 1
    if not 1 <= k_max <= n - 1:
        raise InstanceError(f"k_max must lie in [1, {n - 1}]")
    rng = make_rng(config.seed, STREAM_SEARCH)
    f = _Objective(instance, config)
    inc = _Incumbent(f)
    start = _random_order(n, rng)
    initial = f(start)
    inc.offer(start, initial)
    cur, cur_val = _descend(f, start)
    inc.offer(cur, cur_val)
    last = f.clock()
    restarts = 0
    k = 1
    while not f.exhausted():
        x, xv = _descend(f, _shake(cur, k, rng))
        if xv < cur_val:
            cur, cur_val = x, xv
            k = 1
            last = f.clock()
            inc.offer(cur, cur_val)
        else:
            k = k + 1 if k < k_max else 1
        if f.clock() - last >= config.stall and not f.exhausted():
            cur, cur_val = _descend(f, _random_order(n, rng))
            inc.offer(cur, cur_val)
            k = 1
            last = f.clock()
            restarts += 1
    return _outcome(inc, f, restarts, initial, config.seed)


def exhaustive_robust(instance: Instance, cap: int = EXHAUSTIVE_ROBUST_CAP) -> SearchOutcome:
    """Exact robust optimum over all ``n!`` sequences.

    Depth-first over prefixes in lexicographic order, sharing the worst-case
    DP front of each prefix. A prefix is cut when its largest accumulated
    flow plus the remaining upper processing times already exceeds the
    incumbent, which cannot discard an optimum. Ties keep the
    lexicographically smallest sequence.
    """
    n = instance.n
    if n > cap:
        raise SizeError(f"exhaustive robust search capped at n <= {cap} (got {n})")
    r_lo, r_hi, p_hi = instance.r_lo, instance.r_hi, instance.p_hi
    # incumbent from the upper-processing order; strict cuts keep ties reachable
    seed_order = tuple(sorted(range(n), key=lambda j: (p_hi[j], j)))
    best_val = worst_value(seed_order, r_lo, r_hi, p_hi)
    best_order = seed_order
    leaves = 0
    trace = [(0, best_val)]
    prefix: list[int] = []

    def dfs(remaining: list[int], front, rem_p: int) -> None:
        nonlocal best_val, best_order, leaves
        pos = len(prefix)
        if not remaining:
            leaves += 1
            val = max(v for _, v in front)
            if val < best_val or (val == best_val and tuple(prefix) < best_order):
                if val < best_val:
                    trace.append((leaves, val))
                best_val, best_order = val, tuple(prefix)
            return
        for j in remaining:
            p = p_hi[j]
            if pos == 0:
                nf = [(r_hi[j] + p, p)]
            elif pos == n - 1:
                nf = extend_front(front, (r_lo[j],), p)
            elif r_lo[j] == r_hi[j]:
                nf = extend_front(front, (r_lo[j],), p)
            else:
                nf = extend_front(front, (r_lo[j], r_hi[j]), p)
            rest_p = rem_p - p
            if max(v for _, v in nf) + rest_p > best_val:
                continue
            prefix.append(j)
            dfs([i for i in remaining if i != j], nf, rest_p)
            prefix.pop()

    dfs(list(range(n)), [], sum(p_hi))
    return SearchOutcome(Sequence(best_order), int(best_val), tuple(trace), leaves, 0, None, None)


ALGORITHMS = {"ILS": run_ils, "VNS": run_vns}


def _run_one(args) -> SearchOutcome:
    instance, algo, config = args
    return ALGORITHMS[algo](instance, config)


def multi_start(
    instance: Instance, algo: str, config: SearchConfig, seeds, workers: int = 1
) -> tuple[SearchOutcome, list[SearchOutcome]]:
    """Independent seeded runs; the merged result is the minimum value, ties
    going to the earliest seed in ``seeds``."""
    seeds = list(seeds)
    jobs = [(instance, algo.upper(), replace(config, seed=s)) for s in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_one, jobs))
    else:
        outcomes = [_run_one(j) for j in jobs]
    best = min(range(len(outcomes)), key=lambda i: (outcomes[i].value, i))
    return outcomes[best], outcomes
