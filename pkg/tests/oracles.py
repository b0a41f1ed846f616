"""Naive reference implementations, written independently of the package."""

from __future__ import annotations

import itertools


def flow(order, release, processing):
    t = None
    total = 0
    for j in order:
        start = release[j] if t is None else max(t, release[j])
        t = start + processing[j]
        total += t - release[j]
    return total


def best_sequence(release, processing):
    """Lexicographically first minimizer over all permutations."""
    best = None
    for perm in itertools.permutations(range(len(release))):
        v = flow(perm, release, processing)
        if best is None or v < best[1]:
            best = (perm, v)
    return best


def worst_corner(order, r_lo, r_hi, p_lo, p_hi):
    """Max flow over every combination of interval endpoints."""
    n = len(order)
    best = None
    for rs in itertools.product(*[(r_lo[j], r_hi[j]) for j in range(n)]):
        for ps in itertools.product(*[(p_lo[j], p_hi[j]) for j in range(n)]):
            v = flow(order, rs, ps)
            if best is None or v > best:
                best = v
    return best


def robust_optimum(r_lo, r_hi, p_lo, p_hi):
    n = len(r_lo)
    return min(worst_corner(perm, r_lo, r_hi, p_lo, p_hi) for perm in itertools.permutations(range(n)))
