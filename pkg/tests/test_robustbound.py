from __future__ import annotations

import pytest
from hypothesis import given

import oracles
from robustsched.detopt import solve_optimal
from robustsched.model import GenParams, InstanceError, Scenario, SizeError, generate_instance
from robustsched.robustbound import SampleSpec, release_ascent, robust_lower_bound, sample_extreme_scenarios
from robustsched.search import exhaustive_robust
from strategies import instances

ALL_MAX_ONLY = SampleSpec(include_all_max=True, random_extreme_count=0, release_ascent=False)


def test_degenerate_bound_is_exact(fixed_pair):
    res = robust_lower_bound(fixed_pair)
    assert res.value == 4 == exhaustive_robust(fixed_pair).value


def test_all_max_only_on_two_job_example(two_job):
    # all-max scenario r=(2,4), p=(3,2): [0,1] -> 3+3, [1,0] -> 2+7
    res = robust_lower_bound(two_job, ALL_MAX_ONLY)
    assert res.value == 6
    assert res.argmax_scenario == Scenario((2, 4), (3, 2))
    assert res.value <= exhaustive_robust(two_job).value == 10


@given(instances(max_n=5))
def test_bound_below_robust_optimum(inst):
    lb = robust_lower_bound(inst).value
    assert lb <= oracles.robust_optimum(inst.r_lo, inst.r_hi, inst.p_lo, inst.p_hi)


def test_bound_monotone_in_sample_count():
    inst = generate_instance(GenParams(7, 4, 11))
    values = [
        robust_lower_bound(inst, SampleSpec(random_extreme_count=k, release_ascent=False)).value
        for k in (0, 4, 16, 64)
    ]
    assert values == sorted(values)


def test_sample_prefix_property():
    inst = generate_instance(GenParams(8, 3, 5))
    small = sample_extreme_scenarios(inst, SampleSpec(random_extreme_count=5, seed=3))
    big = sample_extreme_scenarios(inst, SampleSpec(random_extreme_count=40, seed=3))
    assert big[: len(small)] == small
    assert len(set(big)) == len(big)


def test_samples_are_extreme():
    inst = generate_instance(GenParams(6, 2, 1))
    for spec in (SampleSpec(), SampleSpec(processing_at_max=False)):
        for sc in sample_extreme_scenarios(inst, spec):
            assert all(r in (j.release.lo, j.release.hi) for r, j in zip(sc.release, inst.jobs))
            assert all(p in (j.processing.lo, j.processing.hi) for p, j in zip(sc.processing, inst.jobs))


def test_release_ascent_not_worse_than_all_max():
    inst = generate_instance(GenParams(7, 6, 2))
    sc, v = release_ascent(inst)
    assert sc.contained_in(inst)
    assert v == solve_optimal(sc).value
    assert v >= solve_optimal(Scenario(inst.r_hi, inst.p_hi)).value


def test_workers_do_not_change_result():
    inst = generate_instance(GenParams(7, 3, 4))
    assert robust_lower_bound(inst, workers=1) == robust_lower_bound(inst, workers=2)


def test_per_scenario_sorted_and_max():
    inst = generate_instance(GenParams(6, 2, 8))
    res = robust_lower_bound(inst)
    digests = [d for d, _ in res.per_scenario]
    assert digests == sorted(digests)
    assert res.value == max(v for _, v in res.per_scenario)


def test_empty_spec_rejected():
    with pytest.raises(InstanceError):
        SampleSpec(include_all_max=False, random_extreme_count=0, release_ascent=False)


def test_size_cap():
    inst = generate_instance(GenParams(9, 2, 0))
    with pytest.raises(SizeError):
        robust_lower_bound(inst, cap=8)
