"""Experiment harness: instance grids, result rows, gap summaries,
convergence traces and multi-run distributions, all written as CSV."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from pathlib import Path

import numpy as np

from .detopt import EXACT_CAP
from .model import GenParams, Instance, InstanceError, RobustSchedError, generate_instance
from .robustbound import SampleSpec, robust_lower_bound
from .search import ALGORITHMS, EXHAUSTIVE_ROBUST_CAP, SearchConfig, SearchOutcome, exhaustive_robust

log = logging.getLogger(__name__)

RESULT_HEADER = ["instance", "n", "mu", "lower_bound", "algo", "cost", "budget", "elapsed", "gap_pct", "seed"]
THREADS_ENV = "ROBUSTSCHED_THREADS"

# Reference wall-clock limits (seconds) per size and mu.
REFERENCE_TIME_LIMITS = {
    7: {2: 100, 3: 100, 4: 100, 6: 100},
    15: {2: 300, 3: 300, 4: 600, 6: 600},
    20: {2: 600, 3: 600, 4: 900, 6: 900},
    30: {2: 600, 3: 600, 4: 900, 6: 900},
    50: {2: 900, 3: 900, 4: 1200, 6: 1200},
}
# evaluation budget granted per reference second
EVALS_PER_SECOND = 50
SIZE_LETTERS = {7: "A", 15: "B", 20: "C", 30: "D", 50: "E"}


def gap(lower: int, reference: int) -> float:
    """Percentage gap of ``lower`` below ``reference``, rounded half-up to 2 decimals."""
    if reference <= 0:
        raise InstanceError("reference must be positive")
    if lower > reference:
        raise InstanceError(f"lower bound {lower} exceeds reference {reference}")
    pct = Fraction(100 * (reference - lower), reference)
    exact = Decimal(pct.numerator) / Decimal(pct.denominator)
    return float(exact.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def worker_count(default: int = 1) -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        raise InstanceError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def default_budget(n: int, mu: int, mode: str) -> float:
    if n in REFERENCE_TIME_LIMITS:
        seconds = REFERENCE_TIME_LIMITS[n].get(mu, max(REFERENCE_TIME_LIMITS[n].values()))
    else:
        # sizes without a reference limit borrow the nearest one
        nearest = min(REFERENCE_TIME_LIMITS, key=lambda k: abs(k - n))
        seconds = REFERENCE_TIME_LIMITS[nearest].get(mu, max(REFERENCE_TIME_LIMITS[nearest].values()))
    return seconds if mode == "wallclock" else seconds * EVALS_PER_SECOND


@dataclass
class SuiteConfig:
    sizes: list[int]
    mus: list[int] = field(default_factory=lambda: [2, 3, 4, 6])
    instances_per_cell: int = 5
    budgets: dict[str, float] = field(default_factory=dict)  # "n" or "n:mu" -> budget
    seed: int = 1
    algorithms: list[str] = field(default_factory=lambda: ["EXH", "VNS", "ILS"])
    budget_mode: str = "evals"
    restart_stall: float | None = None
    lb_include_all_max: bool = True
    lb_random_extreme_count: int = 32
    lb_seed: int = 0
    lb_processing_at_max: bool = True
    lb_release_ascent: bool = True
    lb_cap: int = EXACT_CAP
    record_elapsed: bool | None = None

    def __post_init__(self):
        if not self.sizes or not self.mus or self.instances_per_cell < 1:
            raise InstanceError("suite grid is empty")
        if self.budget_mode not in ("evals", "wallclock"):
            raise InstanceError("budget_mode must be 'evals' or 'wallclock'")
        self.algorithms = [a.upper() for a in self.algorithms]
        unknown = set(self.algorithms) - set(ALGORITHMS) - {"EXH"}
        if unknown:
            raise InstanceError(f"unknown algorithm(s) {sorted(unknown)}")
        self.budgets = {str(k): v for k, v in self.budgets.items()}

    @property
    def elapsed_recorded(self) -> bool:
        if self.record_elapsed is not None:
            return self.record_elapsed
        return self.budget_mode == "wallclock"

    def budget_for(self, n: int, mu: int) -> float:
        for key in (f"{n}:{mu}", str(n)):
            if key in self.budgets:
                return self.budgets[key]
        return default_budget(n, mu, self.budget_mode)

    def search_config(self, n: int, mu: int, seed: int) -> SearchConfig:
        b = self.budget_for(n, mu)
        if self.budget_mode == "evals":
            return SearchConfig(max_evals=int(b), restart_stall=self.restart_stall, seed=seed)
        return SearchConfig(time_limit=float(b), restart_stall=self.restart_stall, seed=seed)

    @property
    def sample_spec(self) -> SampleSpec:
        return SampleSpec(
            include_all_max=self.lb_include_all_max,
            random_extreme_count=self.lb_random_extreme_count,
            seed=self.lb_seed,
            processing_at_max=self.lb_processing_at_max,
            release_ascent=self.lb_release_ascent,
        )


def load_suite(path) -> SuiteConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    try:
        return SuiteConfig(**raw)
    except TypeError as exc:
        raise InstanceError(f"{path}: {exc}") from None


@dataclass(frozen=True)
class GridInstance:
    name: str
    n: int
    mu: int
    seed: int
    instance: Instance


def suite_instances(suite: SuiteConfig) -> list[GridInstance]:
    """Grid in size-major order; instance seeds are ``suite.seed + running index``."""
    out = []
    idx = 0
    for n in suite.sizes:
        k = 0
        for mu in suite.mus:
            for _ in range(suite.instances_per_cell):
                k += 1
                seed = suite.seed + idx
                idx += 1
                name = f"{SIZE_LETTERS.get(n, f'N{n}-')}{k}"
                out.append(GridInstance(name, n, mu, seed, generate_instance(GenParams(n, mu, seed), name=name)))
    return out


@dataclass(frozen=True)
class ResultRow:
    instance: str
    n: int
    mu: int
    lower_bound: int | None
    algo: str
    cost: int | str | None
    budget: float | None
    elapsed: float | None
    gap_pct: float | None
    seed: int | None

    def cells(self) -> list[str]:
        def num(x):
            if x is None:
                return ""
            if isinstance(x, float):
                return f"{x:g}" if x != int(x) else str(int(x))
            return str(x)

        return [
            self.instance,
            str(self.n),
            str(self.mu),
            num(self.lower_bound),
            self.algo,
            num(self.cost),
            num(self.budget),
            "" if self.elapsed is None else f"{self.elapsed:.3f}",
            "" if self.gap_pct is None else f"{self.gap_pct:.2f}",
            num(self.seed),
        ]


def _lb_task(args):
    gi, spec, cap = args
    if gi.n > cap:
        return None, f"lower bound skipped: n={gi.n} exceeds exact cap {cap}"
    try:
        return robust_lower_bound(gi.instance, spec, cap=cap).value, None
    except RobustSchedError as exc:
        return None, str(exc)


def _algo_task(args):
    gi, algo, config = args
    t0 = time.perf_counter()
    try:
        if algo == "EXH":
            if gi.n > EXHAUSTIVE_ROBUST_CAP:
                raise InstanceError(f"EXH infeasible at n={gi.n} (cap {EXHAUSTIVE_ROBUST_CAP})")
            out = exhaustive_robust(gi.instance)
        else:
            out = ALGORITHMS[algo](gi.instance, config)
    except RobustSchedError as exc:
        return None, str(exc), time.perf_counter() - t0
    return out.value, None, time.perf_counter() - t0


def _pmap(fn, items, workers: int):
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


@dataclass
class BenchResult:
    rows: list[ResultRow]
    means: list[ResultRow]
    errors: list[str]

    def all_rows(self) -> list[ResultRow]:
        return self.rows + self.means

    def mean_gaps(self) -> dict[tuple[int, int], float]:
        return {(r.n, r.mu): r.gap_pct for r in self.means}


def run_benchmark(suite: SuiteConfig, workers: int | None = None) -> BenchResult:
    """Run every requested algorithm on every grid instance.

    Rows come back in canonical order (grid order, then algorithm order), so
    output does not depend on ``workers``. Failures become rows whose cost
    cell reads ``error: ...``; the run continues.
    """
    workers = worker_count() if workers is None else workers
    grid = suite_instances(suite)
    spec = suite.sample_spec
    lbs = _pmap(_lb_task, [(gi, spec, suite.lb_cap) for gi in grid], workers)

    tasks = []
    for gi in grid:
        for algo in suite.algorithms:
            cfg = None if algo == "EXH" else suite.search_config(gi.n, gi.mu, gi.seed)
            tasks.append((gi, algo, cfg))
    results = _pmap(_algo_task, tasks, workers)

    rows, errors = [], []
    lb_of = {(gi.name, gi.n): lb for gi, (lb, _) in zip(grid, lbs)}
    # the optimum is known from EXH, or when some cost meets the lower bound
    optimum = {}
    for (gi, algo, _), (value, err, _) in zip(tasks, results):
        key = (gi.name, gi.n)
        if value is not None and (algo == "EXH" or value == lb_of[key]):
            optimum[key] = value
    for gi, (lb, err) in zip(grid, lbs):
        if err:
            errors.append(f"{gi.name}: {err}")
    for (gi, algo, cfg), (value, err, secs) in zip(tasks, results):
        lb = lb_of[gi.name, gi.n]
        opt = optimum.get((gi.name, gi.n))
        g = gap(lb, opt) if lb is not None and opt is not None else None
        if err:
            errors.append(f"{gi.name} {algo}: {err}")
            cost = f"error: {err}"
        else:
            cost = value
            if lb is not None and value < lb:
                raise AssertionError(f"{gi.name} {algo}: cost {value} below lower bound {lb}")
        rows.append(
            ResultRow(
                instance=gi.name,
                n=gi.n,
                mu=gi.mu,
                lower_bound=lb,
                algo=algo,
                cost=cost,
                budget=None if cfg is None else cfg.budget,
                elapsed=secs if suite.elapsed_recorded else None,
                gap_pct=g,
                seed=None if algo == "EXH" else gi.seed,
            )
        )

    means = []
    for n in suite.sizes:
        for mu in suite.mus:
            gaps = [
                gap(lbs[i][0], optimum[gi.name, gi.n])
                for i, gi in enumerate(grid)
                if gi.n == n and gi.mu == mu and lbs[i][0] is not None and (gi.name, gi.n) in optimum
            ]
            if gaps:
                m = float(Decimal(str(statistics.fmean(gaps))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))
                means.append(ResultRow("MEAN", n, mu, None, "EXH", None, None, None, m, None))
    for e in errors:
        log.warning(e)
    return BenchResult(rows, means, errors)


def results_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_HEADER)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


def write_results(rows, path) -> None:
    Path(path).write_text(results_csv(rows), encoding="utf-8")


def trace_csv(outcome: SearchOutcome) -> str:
    lines = ["step,best_value"]
    lines += [f"{s:g},{v}" if isinstance(s, float) else f"{s},{v}" for s, v in outcome.trace]
    return "\n".join(lines) + "\n"


def write_trace(outcome: SearchOutcome, path) -> None:
    Path(path).write_text(trace_csv(outcome), encoding="utf-8")


@dataclass(frozen=True)
class DistributionResult:
    algo: str
    values: tuple[tuple[int, int], ...]  # (run seed, final value)
    bins: tuple[tuple[float, float, int], ...]
    mean: float
    variance: float

    def values_csv(self) -> str:
        return "seed,final_value\n" + "".join(f"{s},{v}\n" for s, v in self.values)

    def bins_csv(self) -> str:
        return "bin_lo,bin_hi,count\n" + "".join(f"{lo:g},{hi:g},{c}\n" for lo, hi, c in self.bins)


def histogram(values, bins: int = 10) -> tuple[tuple[float, float, int], ...]:
    """Equal-width bins over the observed range; a single bin when all values agree."""
    arr = np.asarray(values, dtype=float)
    lo, hi = float(arr.min()), float(arr.max())
    if lo == hi:
        return ((lo, hi, int(arr.size)),)
    counts, edges = np.histogram(arr, bins=bins, range=(lo, hi))
    return tuple((round(float(edges[i]), 6), round(float(edges[i + 1]), 6), int(counts[i])) for i in range(bins))


def _dist_task(args):
    instance, algo, config = args
    return config.seed, ALGORITHMS[algo](instance, config).value


def distribution_study(
    instance: Instance,
    algo: str,
    runs: int,
    config: SearchConfig,
    bins: int = 10,
    workers: int = 1,
) -> DistributionResult:
    """``runs`` independent runs with seeds ``config.seed + i``."""
    if runs < 2:
        raise InstanceError("distribution study needs at least 2 runs")
    algo = algo.upper()
    if algo not in ALGORITHMS:
        raise InstanceError(f"unknown algorithm {algo!r}")
    tasks = [(instance, algo, SearchConfig(**{**asdict(config), "seed": config.seed + i})) for i in range(runs)]
    values = tuple(_pmap(_dist_task, tasks, workers))
    finals = [v for _, v in values]
    return DistributionResult(
        algo=algo,
        values=values,
        bins=histogram(finals, bins),
        mean=statistics.fmean(finals),
        variance=statistics.pvariance(finals),
    )
