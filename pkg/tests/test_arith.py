from fractions import Fraction
from math import prod

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from primline.arith import (
    FactorizationError,
    euler_phi,
    factor_q_power_minus_one,
    factorize,
    is_prime,
    prime_power,
    prime_powers_between,
    primes_below,
    radical,
    theta,
)


def _naive_is_prime(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))


def test_is_prime_examples():
    assert is_prime(1) is False
    assert is_prime(102829) is True
    assert is_prime(9620) is False
    assert is_prime(2**61 - 1) is True
    assert is_prime(2**127 - 1) is True
    assert is_prime((2**61 - 1) * (2**31 - 1)) is False


@given(st.integers(min_value=0, max_value=200_000))
def test_is_prime_matches_trial_division(n):
    assert is_prime(n) == _naive_is_prime(n)


def test_factorize_examples():
    assert factorize(1).factors == ()
    assert factorize(50652).factors == ((2, 2), (3, 3), (7, 1), (67, 1))
    assert factorize(26).factors == ((2, 1), (13, 1))


def test_factorize_large_semiprime():
    p, q = 4294967291, 4294967279
    f = factorize(p * q)
    assert f.factors == ((q, 1), (p, 1))


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=2**64))
def test_factorize_reconstructs(n):
    f = factorize(n)
    assert prod(p**e for p, e in f.factors) == n
    assert all(is_prime(p) for p in f.primes)
    assert list(f.primes) == sorted(set(f.primes))


def test_factorize_reports_exhausted_budget():
    with pytest.raises(FactorizationError):
        factorize(1000003 * 1000033, max_iterations=1, attempts=1)


def test_factorize_rejects_zero():
    with pytest.raises(ValueError):
        factorize(0)


def test_factor_q_power_minus_one_matches_direct():
    assert factor_q_power_minus_one(37, 3) == factorize(37**3 - 1)
    assert factor_q_power_minus_one(102829, 4) == factorize(102829**4 - 1)


def test_radical_theta_phi_examples():
    assert radical(factorize(1)) == 1
    assert radical(factorize(50652)) == 2814
    assert radical(factorize(26)) == 26
    assert theta(factorize(1)) == 1
    assert theta(factorize(6)) == Fraction(1, 3)
    assert theta(factorize(2)) == Fraction(1, 2)
    assert euler_phi(factorize(1)) == 1
    assert euler_phi(factorize(26)) == 12
    assert euler_phi(factorize(1407)) == 792


def test_theta_matches_phi_sieve():
    limit = 20_000
    phi = np.arange(limit + 1, dtype=np.int64)
    for p in primes_below(limit + 1):
        phi[p::p] -= phi[p::p] // p
    for n in range(1, limit + 1, 7):
        f = factorize(n)
        assert theta(f) == Fraction(int(phi[n]), n)
        assert euler_phi(f) == phi[n]


@settings(deadline=None)
@given(st.integers(min_value=1, max_value=10**12))
def test_radical_properties(n):
    r = radical(factorize(n))
    assert n % r == 0
    assert radical(factorize(r)) == r


def test_prime_powers_between_examples():
    assert [pp.q for pp in prime_powers_between(2, 10)] == [2, 3, 4, 5, 7, 8, 9]
    assert [pp.q for pp in prime_powers_between(121, 128)] == [121, 125, 127, 128]
    assert len(prime_powers_between(2, 9620)) == 1238


def test_prime_powers_between_matches_brute_force():
    found = [pp.q for pp in prime_powers_between(2, 5000)]
    expected = [q for q in range(2, 5001) if prime_power(q) is not None]
    assert found == expected
    for pp in prime_powers_between(2, 300):
        assert pp.p**pp.alpha == pp.q
        assert is_prime(pp.p)


def test_prime_powers_between_rejects_bad_range():
    with pytest.raises(ValueError):
        prime_powers_between(1, 5)
    with pytest.raises(ValueError):
        prime_powers_between(10, 5)


def test_prime_power_decomposition():
    assert prime_power(4096) == (2, 12, 4096)
    assert prime_power(1) is None
    assert prime_power(12) is None
