from dataclasses import replace
from fractions import Fraction

import pytest

from primline.arith import factor_q_power_minus_one, primes_below
from primline.fixtures import FixtureSet
from primline.sieve import (
    LemCVariant,
    PartitionError,
    SievePartition,
    best_partition,
    cubic_pipeline,
    enumerate_partitions,
    exceeds_sqrt_multiple,
    lemC_criterion,
    lemc_data,
    lemma1_bound,
    lemma1_criterion,
    quartic_cutoff,
    quartic_pipeline,
    worst_case_bound,
)


def _partition(q: int, n: int, t: int, r: int) -> SievePartition:
    factorization = factor_q_power_minus_one(q, n)
    for partition in enumerate_partitions(q, n, factorization, t_max=t, r_max=r):
        if partition.t == t and partition.r == r:
            return partition
    raise AssertionError(f"no partition with t={t}, r={r} for q={q}")


def _refined(q: int, r_max: int = 2) -> bool:
    variants = []
    if q % 2:
        variants.append(LemCVariant.K2)
    if q % 6 == 1:
        variants.append(LemCVariant.K6)
    for variant in variants:
        for r in range(r_max + 1):
            data = lemc_data(q, variant, r)
            if data is not None and lemC_criterion(data, variant):
                return True
    return False


def test_partition_fields():
    partition = SievePartition(
        q=7, n=3, core_primes=(2,), sieving_primes=(3,), special_primes=(19,)
    )
    assert (partition.k, partition.t, partition.s, partition.r) == (2, 1, 1, 1)
    assert partition.m == Fraction(1, 2)
    assert partition.delta == Fraction(2, 3)
    assert partition.epsilon == Fraction(1, 19)
    payload = partition.to_json()
    assert payload["m"] == "1/2"
    assert payload["special_primes"] == [19]


def test_partition_conventions_for_empty_parts():
    partition = SievePartition(q=5, n=3, core_primes=(2, 31), sieving_primes=(), special_primes=())
    assert partition.delta == 1
    assert partition.epsilon == 0


def test_partition_validation():
    factorization = factor_q_power_minus_one(7, 3)
    SievePartition(q=7, n=3, core_primes=(2, 3), sieving_primes=(19,), special_primes=()).validate(
        factorization
    )
    with pytest.raises(PartitionError):
        SievePartition(q=7, n=3, core_primes=(2,), sieving_primes=(3,), special_primes=()).validate(
            factorization
        )
    with pytest.raises(PartitionError):
        SievePartition(
            q=7, n=3, core_primes=(2,), sieving_primes=(3, 19), special_primes=(19,)
        ).validate(factorization)


def test_enumeration_order():
    factorization = factor_q_power_minus_one(7, 3)
    shapes = [(p.t, p.r) for p in enumerate_partitions(7, 3, factorization, t_max=2, r_max=6)]
    assert shapes == [(1, 0), (1, 1), (1, 2), (2, 0), (2, 1)]
    first = next(enumerate_partitions(7, 3, factorization, t_max=1, r_max=1))
    assert first.core_primes == (2,)
    last = list(enumerate_partitions(7, 3, factorization, t_max=1, r_max=1))[-1]
    assert last.special_primes == (19,)


def test_exceeds_sqrt_multiple():
    assert exceeds_sqrt_multiple(Fraction(4), Fraction(1), 9)
    assert not exceeds_sqrt_multiple(Fraction(3), Fraction(1), 9)
    assert not exceeds_sqrt_multiple(Fraction(-1), Fraction(1), 9)
    assert exceeds_sqrt_multiple(Fraction(0), Fraction(-1), 9)
    assert exceeds_sqrt_multiple(Fraction(-2), Fraction(-1), 9)
    assert not exceeds_sqrt_multiple(Fraction(-3), Fraction(-1), 9)
    assert not exceeds_sqrt_multiple(Fraction(-4), Fraction(-1), 9)
    assert exceeds_sqrt_multiple(Fraction(141422, 100000), Fraction(1), 2)
    assert not exceeds_sqrt_multiple(Fraction(141421, 100000), Fraction(1), 2)


def test_lemma1_bound_is_none_without_margin():
    partition = SievePartition(
        q=7, n=3, core_primes=(2,), sieving_primes=(3,), special_primes=(19,)
    )
    assert lemma1_bound(partition) is not None
    tight = SievePartition(
        q=3, n=3, core_primes=(2,), sieving_primes=(), special_primes=(3, 5, 7, 11)
    )
    assert lemma1_bound(tight) is None
    assert lemma1_criterion(tight) is False


def test_lemma1_examples():
    assert lemma1_criterion(_partition(809, 3, t=1, r=0))
    assert lemma1_criterion(_partition(1951, 3, t=2, r=2))
    assert lemma1_criterion(_partition(5791, 3, t=2, r=2))


def test_best_partition_examples():
    partition = best_partition(809, 3)
    assert partition is not None
    assert (partition.t, partition.r) == (1, 0)
    assert best_partition(1951, 3) is not None
    assert best_partition(5791, 3) is not None
    large = best_partition(4096, 3)
    assert large is not None
    assert large.t == 1
    assert best_partition(103, 3) is None
    assert best_partition(9811, 3) is None


def test_best_partition_accepts_precomputed_factorization():
    factorization = factor_q_power_minus_one(809, 3)
    assert best_partition(809, 3, factorization=factorization) == best_partition(809, 3)


def test_cubic_list_is_a_fixed_point_of_the_basic_criterion():
    for q in FixtureSet().cubic_146:
        assert best_partition(q, 3, t_max=4, r_max=6) is None, q


def test_passing_partitions_stay_passing_for_larger_q():
    base = _partition(809, 3, t=1, r=0)
    for bigger in (810, 1000, 10**6, 10**12):
        assert lemma1_criterion(replace(base, q=bigger))
    shape = SievePartition(
        q=0, n=4, core_primes=(2, 3), sieving_primes=(5, 7, 11, 13), special_primes=()
    )
    bound = lemma1_bound(shape)
    assert bound is not None
    threshold = int(bound) + 1
    assert not lemma1_criterion(replace(shape, q=int(bound)))
    for q in (threshold, threshold * 2, threshold * 1000):
        assert lemma1_criterion(replace(shape, q=q))


def test_lemc_examples():
    assert _refined(101)
    assert not _refined(103)
    assert not _refined(4951)


def test_lemc_data_sums():
    data = lemc_data(1171, LemCVariant.K2, 0)
    assert data is not None
    total = sum(Fraction(p - 1, p) for p in data.partition.sieving_primes)
    assert data.nu1 + data.nu2 == total
    assert data.partition.core_primes == (2,)


def test_lemc_data_special_primes_divide_tau():
    for q in (101, 1171, 4951):
        tau = q * q + q + 1
        for r in range(3):
            data = lemc_data(q, LemCVariant.K2, r)
            if data is not None:
                assert all(tau % l_j == 0 for l_j in data.partition.special_primes)
                assert data.partition.r == r


def test_lemc_preconditions():
    with pytest.raises(PartitionError):
        lemc_data(128, LemCVariant.K2, 0)
    with pytest.raises(PartitionError):
        lemc_data(5, LemCVariant.K6, 0)
    data = lemc_data(7, LemCVariant.K6, 0)
    assert data is not None
    assert data.partition.core_primes == (2, 3)
    with pytest.raises(PartitionError):
        lemC_criterion(replace(data, partition=replace(data.partition, q=11)), LemCVariant.K6)


def test_cubic_pipeline_matches_fixture():
    fixtures = FixtureSet()
    result = cubic_pipeline(fixtures.cubic_146)
    assert result.survivors == fixtures.cubic_82
    assert result.stages["input"] == 146
    assert result.stages["k6"] == 82
    assert 101 in result.eliminations
    assert 1171 in result.survivors
    assert 4951 in result.survivors


def test_cubic_pipeline_needs_special_primes():
    result = cubic_pipeline(FixtureSet().cubic_146, r_max=0)
    assert len(result.survivors) > 82


def test_quartic_cutoff_covers_largest_exception():
    assert quartic_cutoff(14, 4) >= 102829


def test_worst_case_bound_is_finite_when_feasible():
    for omega in range(1, 15):
        for t in range(1, min(4, omega) + 1):
            bound = worst_case_bound(omega, t)
            if bound is not None:
                assert bound > 0


def _float_cutoff(max_omega: int, t_max: int) -> float:
    primes = [int(p) for p in primes_below(100)]
    cutoff = 0.0
    for omega in range(1, max_omega + 1):
        best = None
        for t in range(1, min(t_max, omega) + 1):
            m = 1.0
            for p in primes[:t]:
                m *= (p - 1) / p
            rest = primes[t:omega]
            delta = 1 - sum(1 / p for p in rest)
            if m * delta <= 0:
                continue
            ratio = (2**t * m * (len(rest) - 1 + 2 * delta) - m * delta) / (m * delta)
            value = 9 * ratio * ratio
            best = value if best is None else min(best, value)
        assert best is not None
        cutoff = max(cutoff, best)
    return cutoff


def test_quartic_cutoff_matches_float_grid():
    exact = quartic_cutoff(14, 4)
    assert abs(exact - _float_cutoff(14, 4)) <= 1


@pytest.mark.slow
def test_quartic_pipeline_reproduces_e4():
    fixtures = FixtureSet()
    result = quartic_pipeline(workers=2)
    assert len(result.survivors) == 1514
    assert result.survivors == fixtures.e4
    assert 2048 not in result.survivors
    assert 9661 in result.survivors
    assert max(result.survivors) == 102829
