"""Lower bound on the robust optimum.

For any single scenario, every sequence's worst case is at least that
scenario's deterministic optimum, so the largest optimum over any set of
scenarios bounds the robust optimum from below.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .detopt import EXACT_CAP, solve_optimal
from .model import STREAM_SAMPLING, Instance, InstanceError, Scenario, SizeError, make_rng


@dataclass(frozen=True)
class SampleSpec:
    """Which scenarios feed the bound.

    ``processing_at_max`` pins sampled processing times at their upper bounds
    (the deterministic optimum never decreases when a processing time grows,
    so lower ones are dominated). ``release_ascent`` adds the scenario reached
    by coordinate ascent over integer release times, started from the
    all-max scenario; it does not depend on the random sample.
    """

    include_all_max: bool = True
    random_extreme_count: int = 32
    seed: int = 0
    processing_at_max: bool = True
    release_ascent: bool = True
    ascent_passes: int | None = None

    def __post_init__(self):
        if self.random_extreme_count < 0:
            raise InstanceError("random_extreme_count must be >= 0")
        if not (self.include_all_max or self.random_extreme_count or self.release_ascent):
            raise InstanceError("sample spec selects no scenarios")


@dataclass(frozen=True)
class LBResult:
    value: int
    argmax_scenario: Scenario
    per_scenario: tuple[tuple[str, int], ...]  # (digest, optimum), sorted by digest
    spec: SampleSpec


def sample_extreme_scenarios(instance: Instance, spec: SampleSpec) -> list[Scenario]:
    """Distinct scenarios selected by ``spec``, in draw order.

    Random scenarios are drawn one at a time from a single stream, so a larger
    ``random_extreme_count`` extends (never replaces) a smaller one.
    """
    out = []
    seen = set()

    def add(sc):
        key = (sc.release, sc.processing)
        if key not in seen:
            seen.add(key)
            out.append(sc)

    if spec.include_all_max:
        add(Scenario(instance.r_hi, instance.p_hi))
    rng = make_rng(spec.seed, STREAM_SAMPLING)
    r_lo, r_hi, p_lo, p_hi = instance.r_lo, instance.r_hi, instance.p_lo, instance.p_hi
    for _ in range(spec.random_extreme_count):
        # both bit rows are always drawn so release choices do not depend on processing_at_max
        bits = rng.integers(0, 2, size=(2, instance.n))
        release = tuple(r_hi[j] if bits[0, j] else r_lo[j] for j in range(instance.n))
        if spec.processing_at_max:
            processing = tuple(p_hi)
        else:
            processing = tuple(p_hi[j] if bits[1, j] else p_lo[j] for j in range(instance.n))
        add(Scenario(release, processing))
    return out


def release_ascent(instance: Instance, cap: int = EXACT_CAP, max_passes: int | None = None) -> tuple[Scenario, int]:
    """Coordinate ascent of the deterministic optimum over integer release times.

    Starts from the all-max scenario with processing at upper bounds. Each
    pass scans every job's release interval in id order and keeps any strict
    improvement. Returns the final scenario and its optimum.
    """
    release = list(instance.r_hi)
    p_hi = instance.p_hi
    best = solve_optimal(Scenario(tuple(release), p_hi), cap=cap).value
    passes = 0
    improved = True
    while improved and (max_passes is None or passes < max_passes):
        improved = False
        passes += 1
        for j, job in enumerate(instance.jobs):
            for t in range(job.release.lo, job.release.hi + 1):
                if t == release[j]:
                    continue
                trial = list(release)
                trial[j] = t
                v = solve_optimal(Scenario(tuple(trial), p_hi), cap=cap).value
                if v > best:
                    best, release, improved = v, trial, True
    return Scenario(tuple(release), p_hi), best


def _optimum(args) -> int:
    scenario, cap = args
    return solve_optimal(scenario, cap=cap).value


def robust_lower_bound(
    instance: Instance, spec: SampleSpec | None = None, workers: int = 1, cap: int = EXACT_CAP
) -> LBResult:
    """Max of the exact deterministic optimum over the scenarios chosen by ``spec``.

    Scenario solves may run in ``workers`` processes; the result is the same
    as a sequential run.
    """
    spec = spec or SampleSpec()
    if instance.n > cap:
        raise SizeError(
            f"lower bound needs exact solves, capped at n <= {cap} (got {instance.n}); "
            "use a smaller instance or solve the exported models externally"
        )
    scenarios = sample_extreme_scenarios(instance, spec)
    tasks = [(sc, cap) for sc in scenarios]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_optimum, tasks))
    else:
        values = [_optimum(t) for t in tasks]
    pairs = list(zip(scenarios, values))
    if spec.release_ascent:
        sc, v = release_ascent(instance, cap, spec.ascent_passes)
        if all(sc != other for other in scenarios):
            pairs.append((sc, v))
    rows = sorted(((sc.digest(), v, sc) for sc, v in pairs), key=lambda t: t[0])
    best = max(rows, key=lambda t: t[1])  # first max in digest order
    return LBResult(
        value=best[1],
        argmax_scenario=best[2],
        per_scenario=tuple((d, v) for d, v, _ in rows),
        spec=spec,
    )
