"""Deterministic schedule evaluation and the closed-form sequencing rules."""

from __future__ import annotations

from dataclasses import dataclass

from .model import Instance, InstanceError, Scenario, Sequence, SequenceLike, as_order


@dataclass(frozen=True)
class Schedule:
    sequence: Sequence
    starts: tuple[int, ...]  # indexed by job id
    completions: tuple[int, ...]
    total_flow: int

    @property
    def total_completion(self) -> int:
        return sum(self.completions)


def flow_of(order, release, processing) -> int:
    """Total flow time of ``order``; the hot path behind :func:`evaluate_sequence`."""
    c = None
    total = 0
    for j in order:
        r = release[j]
        s = r if c is None or r > c else c
        c = s + processing[j]
        total += c - r
    return total


def evaluate_sequence(sequence: SequenceLike, scenario: Scenario) -> Schedule:
    """Non-delay schedule of ``sequence``: each job starts at the later of its
    release and its predecessor's completion."""
    order = as_order(sequence, scenario.n)
    starts = [0] * scenario.n
    completions = [0] * scenario.n
    c = None
    total = 0
    for j in order:
        r = scenario.release[j]
        s = r if c is None else max(r, c)
        c = s + scenario.processing[j]
        starts[j] = s
        completions[j] = c
        total += s - r + scenario.processing[j]
    return Schedule(Sequence(order), tuple(starts), tuple(completions), total)


def spt_sequence(scenario: Scenario) -> Sequence:
    """Shortest processing time first, ties by job id.

    Exact for total flow when every release is zero. Otherwise the order is
    returned with ``advisory=True``.
    """
    order = sorted(range(scenario.n), key=lambda j: (scenario.processing[j], j))
    advisory = any(r != 0 for r in scenario.release)
    return Sequence(tuple(order), advisory=advisory)


def robust_sequence_no_release(instance: Instance) -> Sequence:
    """Robust optimum for zero release times: ascending upper processing bound."""
    if not instance.zero_release:
        bad = [j.id for j in instance.jobs if (j.release.lo, j.release.hi) != (0, 0)]
        raise InstanceError(f"release intervals must all be [0, 0]; jobs {bad} are not")
    order = sorted(range(instance.n), key=lambda j: (instance.jobs[j].processing.hi, j))
    return Sequence(tuple(order))
