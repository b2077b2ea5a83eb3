from functools import lru_cache
from math import sqrt

import numpy as np
import pytest

from primline.arith import factor_q_power_minus_one, factorize, radical
from primline.charsum import (
    CapExceededError,
    Character,
    all_char_sums,
    char_sum,
    character_from_exponent,
    count_N,
    generating_representatives,
    is_efree,
    sample_pairs,
    tu_decomposition,
    verify_cubic_bound,
    verify_katz,
    verify_sieve_inequalities,
)
from primline.field import ZERO, FieldCtx, add, build_field, generates, mul
from primline.sieve import SievePartition, enumerate_partitions


@lru_cache(maxsize=None)
def field(p: int, alpha: int, n: int) -> FieldCtx:
    return build_field(p, alpha, n)


def test_principal_character_sum_is_q():
    ctx = field(5, 1, 3)
    principal = Character(ctx=ctx, d=1, u=0)
    assert principal.is_principal
    assert char_sum(ctx, 1, principal) == pytest.approx(5)


def test_character_is_multiplicative():
    ctx = field(5, 1, 3)
    chi = Character(ctx=ctx, d=31, u=3)
    rng = np.random.default_rng(1)
    for x, y in rng.integers(0, ctx.group_order, size=(10_000, 2)):
        x, y = int(x), int(y)
        assert chi(mul(ctx, x, y)) == pytest.approx(chi(x) * chi(y))
    assert chi(ZERO) == 0


def test_character_orthogonality():
    ctx = field(2, 2, 3)
    logs = np.arange(ctx.group_order)
    for j in range(1, ctx.group_order):
        chi = character_from_exponent(ctx, j)
        assert not chi.is_principal
        assert abs(chi.values(logs).sum()) < 1e-9


def test_character_from_exponent_round_trip():
    ctx = field(3, 1, 3)
    for j in range(ctx.group_order):
        assert character_from_exponent(ctx, j).exponent == j


@pytest.mark.parametrize("q_params", [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2)])
def test_tau_order_characters_are_trivial_on_fq(q_params):
    ctx = field(*q_params, 3)
    units = ctx.fq_logs[1:]
    for u in range(1, ctx.tau):
        chi = Character(ctx=ctx, d=ctx.tau, u=u)
        assert np.allclose(chi.values(units), 1)


def test_fft_sums_match_direct_sums():
    ctx = field(3, 1, 3)
    gamma = 1
    sums = all_char_sums(ctx, gamma)
    for j in range(ctx.group_order):
        chi = character_from_exponent(ctx, j)
        assert sums[j] == pytest.approx(char_sum(ctx, gamma, chi), abs=1e-9)


def test_sum_is_invariant_under_fq_translation():
    ctx = field(5, 1, 3)
    gamma = 1
    shifted = add(ctx, gamma, int(ctx.fq_logs[3]))
    assert np.allclose(all_char_sums(ctx, gamma), all_char_sums(ctx, shifted))


def test_small_field_sums_respect_bounds():
    ctx = field(3, 1, 3)
    for gamma in generating_representatives(ctx):
        assert np.all(np.abs(all_char_sums(ctx, int(gamma))[1:]) <= 2 * sqrt(3) + 1e-9)
    ctx = field(2, 2, 3)
    exponents = np.arange(3, ctx.group_order, 3)
    for gamma in generating_representatives(ctx):
        assert np.all(np.abs(all_char_sums(ctx, int(gamma))[exponents]) <= 3 + 1e-9)


def test_generating_representatives_count():
    ctx = field(3, 1, 3)
    reps = generating_representatives(ctx)
    assert reps.size == ctx.q**2 - 1
    assert all(generates(ctx, int(g)) for g in reps)


@pytest.mark.parametrize("params", [(3, 1, 3), (5, 1, 3), (2, 1, 4)])
def test_verify_katz(params):
    report = verify_katz(field(*params))
    assert report.passed
    assert 0 < report.max_ratio <= 1 + 1e-9
    assert report.check_name == "katz"


@pytest.mark.parametrize("params", [(3, 1), (2, 2), (7, 1)])
def test_verify_cubic_bound(params):
    ctx = field(*params, 3)
    report = verify_cubic_bound(ctx)
    assert report.passed
    assert report.bound == pytest.approx(sqrt(ctx.q) + 1)
    assert report.details["identity_error"] <= 1e-6
    assert report.details["scaling_error"] <= 1e-6


def test_cubic_bound_rejects_quartic():
    with pytest.raises(ValueError):
        verify_cubic_bound(field(2, 1, 4))


def test_exhaustive_checks_are_capped():
    ctx = field(11, 1, 4)
    with pytest.raises(CapExceededError):
        verify_katz(ctx)
    with pytest.raises(CapExceededError):
        verify_katz(field(3, 1, 3), max_order=10)


@pytest.mark.parametrize(
    ("q_params", "t_distinct", "u_size"),
    [((3, 1), 14, 12), ((2, 2), 39, 24), ((5, 1), 84, 40)],
)
def test_tu_decomposition(q_params, t_distinct, u_size):
    ctx = field(*q_params, 3)
    report = tu_decomposition(ctx, 1)
    assert report.passed
    assert report.t_distinct == t_distinct
    assert report.u_size == u_size
    assert report.u1_size == u_size // 2
    assert report.u1_disjoint
    assert report.u_is_union


def test_tu_decomposition_rejects_subfield_gamma():
    ctx = field(3, 1, 3)
    with pytest.raises(ValueError):
        tu_decomposition(ctx, ctx.tau)


def test_is_efree_examples():
    ctx = field(3, 1, 3)
    assert is_efree(ctx, 2, 1)
    assert is_efree(ctx, 2, 26) is False
    assert is_efree(ctx, 1, 26)
    assert is_efree(ctx, 13, 2)
    assert is_efree(ctx, 13, 13) is False
    with pytest.raises(ValueError):
        is_efree(ctx, ZERO, 2)
    with pytest.raises(ValueError):
        is_efree(ctx, 1, 5)


def test_count_N_examples():
    ctx = field(5, 1, 3)
    for beta, gamma in sample_pairs(ctx, 20, seed=3):
        assert count_N(ctx, beta, gamma, 1).value == ctx.q
        brute = 0
        primitive = 0
        for a in ctx.fq_logs:
            value = mul(ctx, beta, add(ctx, gamma, int(a)))
            if value != ZERO and value % 2:
                brute += 1
            if value != ZERO and is_efree(ctx, value, ctx.group_order):
                primitive += 1
        assert count_N(ctx, beta, gamma, 2).value == brute
        assert count_N(ctx, beta, gamma, ctx.group_order).value == primitive


def test_count_N_depends_only_on_radical():
    ctx = field(7, 1, 3)
    for beta, gamma in sample_pairs(ctx, 10, seed=5):
        for e in (2, 9, 18, 38, 171, 342):
            rad = radical(factorize(e))
            assert count_N(ctx, beta, gamma, e).value == count_N(ctx, beta, gamma, rad).value


def test_count_N_rejects_zero_beta():
    ctx = field(5, 1, 3)
    with pytest.raises(ValueError):
        count_N(ctx, ZERO, 1, 2)


@pytest.mark.parametrize(("q", "expected"), [(5, 3), (7, 6)])
def test_sieve_inequalities_hold_for_every_partition(q, expected):
    ctx = field(q, 1, 3)
    partitions = list(enumerate_partitions(q, 3, factor_q_power_minus_one(q, 3), 4, 6))
    assert len(partitions) == expected
    pairs = sample_pairs(ctx, 25, seed=11)
    for partition in partitions:
        for beta, gamma in pairs:
            report = verify_sieve_inequalities(ctx, beta, gamma, partition)
            assert report.passed, (partition, report.relations)
            assert report.counts["one"] == ctx.q


def test_sieve_inequalities_reject_mismatched_partition():
    ctx = field(7, 1, 3)
    wrong_field = SievePartition(
        q=5, n=3, core_primes=(2,), sieving_primes=(31,), special_primes=()
    )
    with pytest.raises(ValueError):
        verify_sieve_inequalities(ctx, 0, 1, wrong_field)
    incomplete = SievePartition(q=7, n=3, core_primes=(2,), sieving_primes=(3,), special_primes=())
    with pytest.raises(ValueError):
        verify_sieve_inequalities(ctx, 0, 1, incomplete)


def test_sample_pairs_is_deterministic():
    ctx = field(5, 1, 3)
    assert sample_pairs(ctx, 8, seed=2) == sample_pairs(ctx, 8, seed=2)
    assert all(generates(ctx, gamma) for _, gamma in sample_pairs(ctx, 8, seed=2))
