"""Instances, scenarios and sequences for robust single-machine scheduling.

All times are integers. Job ids are positional and 0-based.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

import numpy as np

RNG_NAME = "PCG64"
PROTOCOL_MUS = (2, 3, 4, 6)

# SeedSequence spawn keys; one independent stream family per purpose.
STREAM_INSTANCE = 0
STREAM_SEARCH = 1
STREAM_SAMPLING = 2


class RobustSchedError(Exception):
    """Base class for library errors."""


class InstanceError(RobustSchedError, ValueError):
    """Malformed or invalid instance, scenario or sequence."""


class ParseError(InstanceError):
    """Instance text could not be parsed."""


class SizeError(RobustSchedError, ValueError):
    """Problem size exceeds the cap of an exact method."""


def make_rng(seed: int, stream: int, *extra: int) -> np.random.Generator:
    """Seeded generator on an independent stream; portable across platforms."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(stream, *extra))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class Interval:
    lo: int
    hi: int

    @property
    def width(self) -> int:
        return self.hi - self.lo

    def __contains__(self, t: int) -> bool:
        return self.lo <= t <= self.hi


@dataclass(frozen=True)
class Job:
    id: int
    release: Interval
    processing: Interval


@dataclass(frozen=True)
class InstanceMeta:
    mu: int | None = None
    seed: int | None = None
    n: int | None = None
    rng: str | None = None


@dataclass(frozen=True)
class Instance:
    name: str
    jobs: tuple[Job, ...]
    meta: InstanceMeta | None = None

    def __post_init__(self):
        object.__setattr__(self, "jobs", tuple(self.jobs))

    @property
    def n(self) -> int:
        return len(self.jobs)

    @classmethod
    def from_bounds(cls, release, processing, name: str = "instance", meta=None) -> Instance:
        """Build from ``[(r_lo, r_hi), ...]`` and ``[(p_lo, p_hi), ...]``."""
        release = list(release)
        processing = list(processing)
        if len(release) != len(processing):
            raise InstanceError("release and processing bounds differ in length")
        jobs = tuple(
            Job(i, Interval(int(r[0]), int(r[1])), Interval(int(p[0]), int(p[1])))
            for i, (r, p) in enumerate(zip(release, processing))
        )
        return cls(name=name, jobs=jobs, meta=meta)

    # array views used by the numeric kernels
    @property
    def r_lo(self) -> tuple[int, ...]:
        return tuple(j.release.lo for j in self.jobs)

    @property
    def r_hi(self) -> tuple[int, ...]:
        return tuple(j.release.hi for j in self.jobs)

    @property
    def p_lo(self) -> tuple[int, ...]:
        return tuple(j.processing.lo for j in self.jobs)

    @property
    def p_hi(self) -> tuple[int, ...]:
        return tuple(j.processing.hi for j in self.jobs)

    @property
    def zero_release(self) -> bool:
        return all(j.release.lo == 0 and j.release.hi == 0 for j in self.jobs)


@dataclass(frozen=True)
class Scenario:
    """One realization: a release and a processing time per job id."""

    release: tuple[int, ...]
    processing: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "release", tuple(int(x) for x in self.release))
        object.__setattr__(self, "processing", tuple(int(x) for x in self.processing))
        if len(self.release) != len(self.processing):
            raise InstanceError("scenario release and processing lengths differ")

    @property
    def n(self) -> int:
        return len(self.release)

    def contained_in(self, instance: Instance) -> bool:
        if self.n != instance.n:
            return False
        return all(
            r in job.release and p in job.processing
            for r, p, job in zip(self.release, self.processing, instance.jobs)
        )

    def digest(self) -> str:
        import hashlib

        payload = ",".join(map(str, self.release)) + "|" + ",".join(map(str, self.processing))
        return hashlib.sha1(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Sequence:
    """A job order. ``advisory`` marks orders produced outside a rule's exactness domain."""

    order: tuple[int, ...]
    advisory: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(int(i) for i in self.order))

    def __iter__(self) -> Iterator[int]:
        return iter(self.order)

    def __len__(self) -> int:
        return len(self.order)

    def __getitem__(self, k):
        return self.order[k]

    def __str__(self) -> str:
        return ",".join(map(str, self.order))


SequenceLike = Union[Sequence, Iterable[int]]


def as_order(sequence: SequenceLike, n: int | None = None) -> tuple[int, ...]:
    """Normalize to a tuple and check it is a permutation of ``0..n-1``."""
    order = sequence.order if isinstance(sequence, Sequence) else tuple(int(i) for i in sequence)
    m = len(order) if n is None else n
    if len(order) != m:
        raise InstanceError(f"sequence has {len(order)} jobs, expected {m}")
    if sorted(order) != list(range(m)):
        raise InstanceError(f"sequence {list(order)} is not a permutation of 0..{m - 1}")
    return order


@dataclass(frozen=True)
class GenParams:
    n: int
    mu: int
    seed: int = 0

    @property
    def off_protocol(self) -> bool:
        return self.mu not in PROTOCOL_MUS


def release_width(mu: int) -> int:
    return 10 if mu <= 3 else 20


def generate_instance(params: GenParams, name: str | None = None) -> Instance:
    """Random instance: r_lo ~ U{0..5mu}, r_hi = r_lo + 10 (mu<=3) or + 20,
    p_lo ~ U{1..4}, p_hi = p_lo + 6."""
    if params.n < 1:
        raise InstanceError("n must be >= 1")
    if params.mu <= 0:
        raise InstanceError(f"mu must be positive, got {params.mu}")
    if params.seed < 0 or params.seed >= 2**64:
        raise InstanceError("seed must be a 64-bit unsigned integer")
    if params.off_protocol:
        warnings.warn(f"mu={params.mu} is outside the protocol set {PROTOCOL_MUS}", stacklevel=2)
    rng = make_rng(params.seed, STREAM_INSTANCE)
    r_lo = rng.integers(0, 5 * params.mu, size=params.n, endpoint=True)
    p_lo = rng.integers(1, 4, size=params.n, endpoint=True)
    w = release_width(params.mu)
    jobs = tuple(
        Job(i, Interval(int(r), int(r) + w), Interval(int(p), int(p) + 6))
        for i, (r, p) in enumerate(zip(r_lo, p_lo))
    )
    meta = InstanceMeta(mu=params.mu, seed=params.seed, n=params.n, rng=RNG_NAME)
    if name is None:
        name = f"n{params.n}_mu{params.mu}_s{params.seed}"
    return Instance(name=name, jobs=jobs, meta=meta)


LOW = "low"
HIGH = "high"


def _pick(selector, interval: Interval, job_id: int, what: str) -> int:
    if selector == LOW:
        return interval.lo
    if selector == HIGH:
        return interval.hi
    if isinstance(selector, (int, np.integer)) and not isinstance(selector, bool):
        t = int(selector)
        if t not in interval:
            raise InstanceError(
                f"job {job_id}: {what} value {t} outside [{interval.lo}, {interval.hi}]"
            )
        return t
    raise InstanceError(f"job {job_id}: unknown {what} selector {selector!r}")


def _expand(choice, n: int) -> list:
    if isinstance(choice, str) or isinstance(choice, (int, np.integer)):
        return [choice] * n
    choice = list(choice)
    if len(choice) != n:
        raise InstanceError(f"selector list has {len(choice)} entries, expected {n}")
    return choice


def make_scenario(instance: Instance, release_choice=HIGH, processing_choice=HIGH) -> Scenario:
    """Materialize a scenario from per-job selectors.

    A selector is ``LOW``, ``HIGH`` or an integer value inside the job's
    interval; a single selector applies to every job.
    """
    n = instance.n
    rc = _expand(release_choice, n)
    pc = _expand(processing_choice, n)
    release = [_pick(s, j.release, j.id, "release") for s, j in zip(rc, instance.jobs)]
    processing = [_pick(s, j.processing, j.id, "processing") for s, j in zip(pc, instance.jobs)]
    return Scenario(tuple(release), tuple(processing))


def validate_instance(instance: Instance) -> list[str]:
    """Return every invariant violation; an empty list means the instance is ok."""
    problems = []
    if instance.n < 1:
        problems.append("instance has no jobs")
    seen = set()
    for pos, job in enumerate(instance.jobs):
        if job.id in seen:
            problems.append(f"job {job.id}: duplicate id")
        seen.add(job.id)
        if job.id != pos:
            problems.append(f"job {job.id}: id does not match position {pos}")
        for what, iv in (("release", job.release), ("processing", job.processing)):
            if iv.lo > iv.hi:
                problems.append(f"job {job.id}: {what} lo > hi ([{iv.lo}, {iv.hi}])")
            if iv.lo < 0 or iv.hi < 0:
                problems.append(f"job {job.id}: {what} has negative time")
        if job.processing.lo < 1:
            problems.append(f"job {job.id}: processing lo < 1")
    if instance.meta is not None and instance.meta.n is not None and instance.meta.n != instance.n:
        problems.append(f"meta.n = {instance.meta.n} but instance has {instance.n} jobs")
    return problems


def check_instance(instance: Instance) -> Instance:
    problems = validate_instance(instance)
    if problems:
        raise InstanceError("; ".join(problems))
    return instance


def check_scenario(scenario: Scenario, instance: Instance | None = None) -> Scenario:
    if any(p < 1 for p in scenario.processing):
        raise InstanceError("scenario has a processing time < 1")
    if any(r < 0 for r in scenario.release):
        raise InstanceError("scenario has a negative release time")
    if instance is not None and not scenario.contained_in(instance):
        raise InstanceError("scenario is not contained in the instance intervals")
    return scenario


# ---------------------------------------------------------------------------
# Instance file: JSON with a canonical key order, one job per line.

_META_KEYS = ("mu", "seed", "n", "rng")


def serialize_instance(instance: Instance) -> str:
    lines = ["{", f'  "name": {json.dumps(instance.name)},']
    if instance.meta is not None:
        parts = [
            f'"{k}": {json.dumps(getattr(instance.meta, k))}'
            for k in _META_KEYS
            if getattr(instance.meta, k) is not None
        ]
        lines.append('  "meta": {' + ", ".join(parts) + "},")
    lines.append('  "jobs": [')
    for k, job in enumerate(instance.jobs):
        sep = "," if k < instance.n - 1 else ""
        lines.append(
            f'    {{"id": {job.id}, "release": [{job.release.lo}, {job.release.hi}], '
            f'"processing": [{job.processing.lo}, {job.processing.hi}]}}{sep}'
        )
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _int_field(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{where}: expected an integer, got {value!r}")
    return value


def _interval_field(job: dict, key: str, where: str) -> Interval:
    if key not in job:
        raise ParseError(f"{where}: missing field '{key}'")
    value = job[key]
    if not isinstance(value, list) or len(value) != 2:
        raise ParseError(f"{where}: field '{key}' must be a [lo, hi] pair")
    return Interval(_int_field(value[0], f"{where}.{key}[0]"), _int_field(value[1], f"{where}.{key}[1]"))


def parse_instance(text: str) -> Instance:
    """Parse instance text; raises :class:`ParseError` with a location on failure."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    unknown = set(doc) - {"name", "meta", "jobs"}
    if unknown:
        raise ParseError(f"unknown top-level field(s): {sorted(unknown)}")
    name = doc.get("name", "instance")
    if not isinstance(name, str):
        raise ParseError("field 'name' must be a string")
    meta = None
    if "meta" in doc:
        m = doc["meta"]
        if not isinstance(m, dict):
            raise ParseError("field 'meta' must be an object")
        bad = set(m) - set(_META_KEYS)
        if bad:
            raise ParseError(f"meta: unknown field(s) {sorted(bad)}")
        vals = {k: m.get(k) for k in _META_KEYS}
        for k in ("mu", "seed", "n"):
            if vals[k] is not None:
                _int_field(vals[k], f"meta.{k}")
        meta = InstanceMeta(**vals)
    if "jobs" not in doc or not isinstance(doc["jobs"], list):
        raise ParseError("missing 'jobs' list")
    jobs = []
    for pos, raw in enumerate(doc["jobs"]):
        where = f"job {raw.get('id', pos) if isinstance(raw, dict) else pos}"
        if not isinstance(raw, dict):
            raise ParseError(f"{where}: must be an object")
        if "id" not in raw:
            raise ParseError(f"{where}: missing field 'id'")
        jid = _int_field(raw["id"], f"{where}.id")
        jobs.append(Job(jid, _interval_field(raw, "release", where), _interval_field(raw, "processing", where)))
    instance = Instance(name=name, jobs=tuple(jobs), meta=meta)
    problems = validate_instance(instance)
    if problems:
        raise ParseError("; ".join(problems))
    return instance


def read_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def write_instance(instance: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_instance(instance))
