from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass
from fractions import Fraction
from math import prod
from typing import NamedTuple

import gmpy2
import numpy as np

logger = logging.getLogger(__name__)

TRIAL_DIVISION_BOUND = 100_000
RHO_MAX_ITERATIONS = 1_000_000
RHO_ATTEMPTS = 16

# The first thirteen primes form a proven deterministic Miller-Rabin base set below this value.
MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
MR_PROVEN_BOUND = 3_317_044_064_679_887_385_961_981

_INT64_LIMIT = 2**63


class FactorizationError(RuntimeError):
    """Raised when a cofactor resists factoring within the effort budget."""


class PrimePower(NamedTuple):
    p: int
    alpha: int
    q: int


def primes_below(bound: int) -> np.ndarray:
    """Sieve of Eratosthenes returning all primes < bound as int64."""
    if bound <= 2:  # noqa: PLR2004
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(bound, dtype=bool)
    sieve[:2] = False
    for i in range(2, int(bound**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.flatnonzero(sieve).astype(np.int64)


SMALL_PRIMES = primes_below(TRIAL_DIVISION_BOUND)
_SMALL_PRIME_SET = frozenset(int(p) for p in SMALL_PRIMES)


@dataclass(frozen=True)
class Factorization:
    """Complete prime-power decomposition of ``n``."""

    n: int
    factors: tuple[tuple[int, int], ...]

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    @property
    def omega(self) -> int:
        return len(self.factors)

    @classmethod
    def from_counter(cls, n: int, counts: Counter[int]) -> Factorization:
        factors = tuple(sorted((int(p), int(e)) for p, e in counts.items() if e > 0))
        if prod(p**e for p, e in factors) != n:
            raise FactorizationError(f"factors {factors} do not reconstruct {n}")
        return cls(n=n, factors=factors)

    def merge(self, *others: Factorization) -> Factorization:
        counts: Counter[int] = Counter(dict(self.factors))
        n = self.n
        for other in others:
            counts.update(dict(other.factors))
            n *= other.n
        return Factorization.from_counter(n, counts)


def _miller_rabin(n: int, bases: Iterable[int]) -> bool:
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in bases:
        if a % n == 0:
            continue
        x = gmpy2.powmod(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = gmpy2.powmod(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


def is_prime(n: int) -> bool:
    """Deterministic primality for the magnitudes this package handles.

    Below ``MR_PROVEN_BOUND`` the fixed Miller-Rabin base set is a proof; above it the
    test is combined with strong BPSW.
    """
    if n < 2:  # noqa: PLR2004
        return False
    if n < TRIAL_DIVISION_BOUND:
        return n in _SMALL_PRIME_SET
    for p in MR_BASES:
        if n % p == 0:
            return False
    if not _miller_rabin(n, MR_BASES):
        return False
    if n < MR_PROVEN_BOUND:
        return True
    return bool(gmpy2.is_strong_bpsw_prp(n))


def _trial_divide(n: int, counts: Counter[int]) -> int:
    if n < _INT64_LIMIT:
        hits = SMALL_PRIMES[np.asarray(n, dtype=np.int64) % SMALL_PRIMES == 0]
        candidates: Iterable[int] = (int(p) for p in hits)
    else:
        candidates = (int(p) for p in SMALL_PRIMES)
    for p in candidates:
        if p * p > n:
            break
        while n % p == 0:
            n //= p
            counts[p] += 1
    if 1 < n < TRIAL_DIVISION_BOUND**2:
        # no prime below the bound divides n, so it is prime
        counts[n] += 1
        return 1
    return n


def _brent(n: int, c: int, max_iterations: int) -> int | None:
    """One Brent cycle search with f(x) = x^2 + c; returns a proper divisor or None."""
    y, r, q, g = gmpy2.mpz(2), 1, gmpy2.mpz(1), gmpy2.mpz(1)
    x = ys = y
    batch = 128
    spent = 0
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(batch, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = gmpy2.gcd(q, n)
            k += batch
        spent += 2 * r
        r *= 2
        if spent > max_iterations:
            return None
    if g == n:
        while True:
            ys = (ys * ys + c) % n
            g = gmpy2.gcd(abs(x - ys), n)
            if g > 1:
                break
    if g == n:
        return None
    return int(g)


def _split(n: int, max_iterations: int, attempts: int) -> int:
    for c in range(1, attempts + 1):
        d = _brent(n, c, max_iterations)
        if d is not None:
            return d
    raise FactorizationError(
        f"cofactor {n} resisted {attempts} rho polynomials of {max_iterations} iterations"
    )


def factorize(
    n: int,
    *,
    max_iterations: int = RHO_MAX_ITERATIONS,
    attempts: int = RHO_ATTEMPTS,
) -> Factorization:
    if n < 1:
        raise ValueError(f"factorize expects n >= 1, got {n}")
    counts: Counter[int] = Counter()
    rest = _trial_divide(n, counts)
    stack = [rest] if rest > 1 else []
    while stack:
        m = stack.pop()
        if is_prime(m):
            counts[m] += 1
            continue
        root = int(gmpy2.isqrt(m))
        if root * root == m:
            stack.extend((root, root))
            continue
        d = _split(m, max_iterations, attempts)
        logger.debug("rho split %d = %d * %d", m, d, m // d)
        stack.extend((d, m // d))
    return Factorization.from_counter(n, counts)


def factor_q_power_minus_one(q: int, n: int) -> Factorization:
    """Factor q^n - 1 through its cyclotomic pieces so every piece stays small."""
    if n == 3:  # noqa: PLR2004
        parts = [q - 1, q * q + q + 1]
    elif n == 4:  # noqa: PLR2004
        parts = [q - 1, q + 1, q * q + 1]
    else:
        parts = [q**n - 1]
    first, *rest = (factorize(part) for part in parts)
    return first.merge(*rest)


def radical(f: Factorization) -> int:
    return prod(f.primes)


def theta(f: Factorization) -> Fraction:
    """phi(n)/n as an exact rational."""
    return prod((Fraction(p - 1, p) for p in f.primes), start=Fraction(1))


def euler_phi(f: Factorization) -> int:
    return prod((p - 1) * p ** (e - 1) for p, e in f.factors)


def prime_power(q: int) -> PrimePower | None:
    """Decompose q = p^alpha, or None when q is not a prime power."""
    if q < 2:  # noqa: PLR2004
        return None
    f = factorize(q)
    if f.omega != 1:
        return None
    p, alpha = f.factors[0]
    return PrimePower(p, alpha, q)


def prime_powers_between(lo: int, hi: int) -> list[PrimePower]:
    if lo < 2 or hi < lo:  # noqa: PLR2004
        raise ValueError(f"expected 2 <= lo <= hi, got lo={lo}, hi={hi}")
    found: list[PrimePower] = []
    for p in primes_below(hi + 1):
        p_int = int(p)
        q, alpha = p_int, 1
        while q <= hi:
            if q >= lo:
                found.append(PrimePower(p_int, alpha, q))
            q *= p_int
            alpha += 1
    found.sort(key=lambda pp: pp.q)
    return found
