from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, prod, sqrt

import numpy as np
from pydantic import BaseModel, Field

from .field import (
    ZERO,
    Elt,
    FieldCtx,
    add_logs,
    generating_mask,
    generates,
    zero_constant_elements,
)
from .sieve import SievePartition

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9
DEFAULT_MAX_ORDER = 4096


class CapExceededError(RuntimeError):
    """Raised when an exhaustive check is requested on a field above the configured cap."""


@dataclass(frozen=True, eq=False)
class Character:
    """chi(omega^k) = exp(2*pi*i*u*k/d) for a divisor d of q^n - 1 and gcd(u, d) = 1."""

    ctx: FieldCtx
    d: int
    u: int

    @property
    def exponent(self) -> int:
        """j with chi(omega^k) = exp(2*pi*i*j*k/(q^n - 1))."""
        return self.u * (self.ctx.group_order // self.d) % self.ctx.group_order

    @property
    def is_principal(self) -> bool:
        return self.d == 1

    def values(self, logs: np.ndarray) -> np.ndarray:
        logs = np.asarray(logs, dtype=np.int64)
        order = self.ctx.group_order
        phase = np.exp(2j * np.pi * (self.exponent * (logs % order)) / order)
        return np.where(logs < 0, 0, phase)

    def __call__(self, x: Elt) -> complex:
        return complex(self.values(np.array([x]))[0])


def character_from_exponent(ctx: FieldCtx, j: int) -> Character:
    g = gcd(j, ctx.group_order)
    d = ctx.group_order // g
    return Character(ctx=ctx, d=d, u=(j // g) % d if d > 1 else 0)


def translate_logs(ctx: FieldCtx, gamma: Elt) -> np.ndarray:
    """Logs of gamma + a for a over F_q in canonical order."""
    return add_logs(ctx, np.full(ctx.q, gamma, dtype=np.int64), ctx.fq_logs)


def char_sum(ctx: FieldCtx, gamma: Elt, chi: Character) -> complex:
    """S_gamma(chi) = sum over a in F_q of chi(gamma + a)."""
    return complex(chi.values(translate_logs(ctx, gamma)).sum())


def all_char_sums(ctx: FieldCtx, gamma: Elt) -> np.ndarray:
    """S_gamma(chi_j) for every exponent 0 <= j < q^n - 1, via one inverse FFT."""
    logs = translate_logs(ctx, gamma)
    histogram = np.bincount(logs[logs >= 0], minlength=ctx.group_order)
    return np.fft.ifft(histogram) * ctx.group_order


def generating_representatives(ctx: FieldCtx) -> np.ndarray:
    """Generating gamma with zero constant coordinate, one per additive F_q coset."""
    logs = zero_constant_elements(ctx, np.arange(ctx.q ** (ctx.n - 1)))
    return logs[generating_mask(ctx, logs)]


def _check_cap(ctx: FieldCtx, max_order: int) -> None:
    if ctx.order > max_order:
        raise CapExceededError(
            f"exhaustive character checks are capped at order {max_order}, got {ctx.order}"
        )


class BoundReport(BaseModel):
    q: int
    n: int
    check_name: str
    bound: float
    max_ratio: float
    passed: bool
    witnesses: list[dict[str, float | int]] = Field(default_factory=list)
    details: dict[str, float | int] = Field(default_factory=dict)


class TUReport(BaseModel):
    q: int
    n: int = 3
    check_name: str = "tu_decomposition"
    gamma: int
    t0_size: int
    t0_distinct: int
    t0_outside_fq: bool
    t_distinct: int
    u_size: int
    u1_size: int
    u1_disjoint: bool
    u_is_union: bool
    passed: bool


class SieveInequalityReport(BaseModel):
    q: int
    n: int
    check_name: str = "sieve_inequalities"
    beta: int
    gamma: int
    partition: dict[str, object]
    counts: dict[str, int]
    relations: dict[str, bool]
    passed: bool


def verify_katz(ctx: FieldCtx, max_order: int = DEFAULT_MAX_ORDER) -> BoundReport:
    """max |S_gamma(chi)| / ((n-1) sqrt(q)) over coset representatives and non-principal chi."""
    _check_cap(ctx, max_order)
    bound = (ctx.n - 1) * sqrt(ctx.q)
    best, witness = 0.0, (0, 0)
    for gamma in generating_representatives(ctx):
        sums = np.abs(all_char_sums(ctx, int(gamma)))[1:]
        if sums.size == 0:
            continue
        j = int(np.argmax(sums))
        if sums[j] / bound > best:
            best, witness = float(sums[j] / bound), (int(gamma), j + 1)
    return BoundReport(
        q=ctx.q,
        n=ctx.n,
        check_name="katz",
        bound=bound,
        max_ratio=best,
        passed=best <= 1 + TOLERANCE,
        witnesses=[{"gamma": witness[0], "exponent": witness[1], "ratio": best}],
    )


def verify_cubic_bound(
    ctx: FieldCtx,
    *,
    samples: int = 8,
    seed: int = 0,
    max_order: int = DEFAULT_MAX_ORDER,
) -> BoundReport:
    """|S| <= sqrt(q) + 1 for characters of order dividing q^2 + q + 1.

    Also checks |S|^2 = q - 1 - 2 Re S and that scaling by beta keeps |S|.
    """
    if ctx.n != 3:  # noqa: PLR2004
        raise ValueError("the cubic bound only applies to n = 3")
    _check_cap(ctx, max_order)
    bound = sqrt(ctx.q) + 1
    exponents = np.arange(ctx.q - 1, ctx.group_order, ctx.q - 1)
    rng = np.random.default_rng(seed)
    betas = rng.integers(0, ctx.group_order, size=samples)
    best, identity_error, scaling_error = 0.0, 0.0, 0.0
    witness = (0, 0)
    for gamma in generating_representatives(ctx):
        logs = translate_logs(ctx, int(gamma))
        sums = all_char_sums(ctx, int(gamma))[exponents]
        magnitudes = np.abs(sums)
        if magnitudes.size == 0:
            continue
        j = int(np.argmax(magnitudes))
        if magnitudes[j] > best:
            best, witness = float(magnitudes[j]), (int(gamma), int(exponents[j]))
        identity = magnitudes**2 - (ctx.q - 1 - 2 * sums.real)
        identity_error = max(identity_error, float(np.max(np.abs(identity))))
        for beta in betas:
            shifted = (logs[None, :] + int(beta)) % ctx.group_order
            phases = np.exp(2j * np.pi * exponents[:, None] * shifted / ctx.group_order)
            scaled = np.abs(phases.sum(axis=1))
            scaling_error = max(scaling_error, float(np.max(np.abs(scaled - magnitudes))))
    passed = best <= bound + TOLERANCE and identity_error <= 1e-6 and scaling_error <= 1e-6
    return BoundReport(
        q=ctx.q,
        n=ctx.n,
        check_name="cubic_bound",
        bound=bound,
        max_ratio=best / bound,
        passed=passed,
        witnesses=[{"gamma": witness[0], "exponent": witness[1], "abs_sum": best}],
        details={"identity_error": identity_error, "scaling_error": scaling_error},
    )


def tu_decomposition(ctx: FieldCtx, gamma: Elt) -> TUReport:
    if ctx.n != 3:  # noqa: PLR2004
        raise ValueError("the T/U decomposition is defined for n = 3")
    if not generates(ctx, gamma):
        raise ValueError(f"gamma={gamma} does not generate the extension")
    q, order, tau = ctx.q, ctx.group_order, ctx.tau
    shifts = translate_logs(ctx, gamma)
    units = ctx.fq_logs[1:]
    a_idx, b_idx = np.meshgrid(np.arange(q), np.arange(q), indexing="ij")
    ratio = (shifts[a_idx] - shifts[b_idx]) % order
    distinct_pairs = ratio[a_idx != b_idx]
    t0 = (units[:, None] + distinct_pairs[None, :]) % order
    t0_distinct = np.unique(t0)
    t_all = np.union1d(t0_distinct, units % order)

    u = np.setdiff1d(np.arange(order), t_all)
    u1 = np.unique((units[:, None] + shifts[None, :]) % order)
    u_inv = np.unique((-u1) % order)
    u1_disjoint = np.intersect1d(u1, u_inv).size == 0
    u_is_union = np.array_equal(u, np.union1d(u1, u_inv))
    t0_outside = bool(np.all(t0_distinct % tau != 0))
    passed = (
        t0.size == t0_distinct.size == (q - 1) ** 2 * q
        and t0_outside
        and t_all.size == (q - 1) * (q * q - q + 1)
        and u.size == 2 * q * (q - 1)
        and u1.size == q * (q - 1)
        and u1_disjoint
        and u_is_union
    )
    return TUReport(
        q=q,
        gamma=gamma,
        t0_size=int(t0.size),
        t0_distinct=int(t0_distinct.size),
        t0_outside_fq=t0_outside,
        t_distinct=int(t_all.size),
        u_size=int(u.size),
        u1_size=int(u1.size),
        u1_disjoint=u1_disjoint,
        u_is_union=u_is_union,
        passed=passed,
    )


def _primes_of(ctx: FieldCtx, e: int) -> list[int]:
    if ctx.group_order % e:
        raise ValueError(f"e={e} does not divide {ctx.group_order}")
    return [p for p in ctx.factorization.primes if e % p == 0]


def is_efree(ctx: FieldCtx, x: Elt, e: int) -> bool:
    """x is e-free iff no prime of e divides its log, i.e. x is not an l-th power."""
    if x == ZERO:
        raise ValueError("zero is not e-free for any e")
    return all(x % p for p in _primes_of(ctx, e))


@dataclass(frozen=True)
class FreeCount:
    e: int
    value: int


def count_N(ctx: FieldCtx, beta: Elt, gamma: Elt, e: int) -> FreeCount:  # noqa: N802
    """N(e) = #{a in F_q : beta*(gamma + a) is e-free}."""
    if beta == ZERO:
        raise ValueError("beta must be non-zero")
    logs = translate_logs(ctx, gamma)
    values = (logs + beta) % ctx.group_order
    free = logs >= 0
    for p in _primes_of(ctx, e):
        free &= values % p != 0
    return FreeCount(e=e, value=int(np.count_nonzero(free)))


def verify_sieve_inequalities(
    ctx: FieldCtx, beta: Elt, gamma: Elt, partition: SievePartition
) -> SieveInequalityReport:
    """Evaluate the five counting relations behind the sieve criterion for one pair."""
    if (partition.q, partition.n) != (ctx.q, ctx.n):
        raise ValueError(f"partition is for {partition.q}^{partition.n}, field is {ctx.q}^{ctx.n}")
    partition.validate(ctx.factorization)

    def n_of(e: int) -> int:
        return count_N(ctx, beta, gamma, e).value

    k, q, n, t = partition.k, ctx.q, ctx.n, partition.t
    m, delta, eps = partition.m, partition.delta, partition.epsilon
    root = sqrt(q)
    n_full = n_of(ctx.radical)
    n_one = n_of(1)
    n_k = n_of(k)
    n_kp = n_of(k * prod(partition.sieving_primes))
    n_kpi = {p: n_of(k * p) for p in partition.sieving_primes}
    n_lj = {l_j: n_of(l_j) for l_j in partition.special_primes}

    eq1 = Fraction(n_full) >= n_kp + sum(n_lj.values()) - partition.r * n_one
    eq1_identity = n_kp + sum(
        (n_lj[l_j] - (1 - Fraction(1, l_j)) * n_one for l_j in n_lj), start=Fraction(0)
    ) - eps * n_one == n_kp + sum(n_lj.values()) - partition.r * n_one
    eq2 = n_kp >= delta * n_k + sum(
        (n_kpi[p] - (1 - Fraction(1, p)) * n_k for p in n_kpi), start=Fraction(0)
    )
    eq_nk = n_k + TOLERANCE >= float(m) * (q - (n - 1) * (2**t - 1) * root)
    eq_nkpi = all(
        abs(float(n_kpi[p] - (1 - Fraction(1, p)) * n_k))
        <= (1 - 1 / p) * float(m) * (n - 1) * 2**t * root + TOLERANCE
        for p in n_kpi
    )
    eq_nlj = all(
        abs(float(n_lj[l_j] - (1 - Fraction(1, l_j)) * n_one))
        <= (1 - 1 / l_j) * (n - 1) * root + TOLERANCE
        for l_j in n_lj
    )
    relations = {
        "full_vs_special": bool(eq1 and eq1_identity),
        "core_sieving": bool(eq2),
        "core_lower": bool(eq_nk),
        "sieving_deviation": eq_nkpi,
        "special_deviation": eq_nlj,
    }
    return SieveInequalityReport(
        q=q,
        n=n,
        beta=beta,
        gamma=gamma,
        partition=partition.to_json(),
        counts={"full": n_full, "one": n_one, "core": n_k, "core_sieving": n_kp},
        relations=relations,
        passed=all(relations.values()) and n_one == q,
    )


def sample_pairs(ctx: FieldCtx, count: int, seed: int) -> list[tuple[Elt, Elt]]:
    """Deterministic sample of (beta, gamma) with beta non-zero and gamma generating."""
    rng = np.random.default_rng(seed)
    pairs: list[tuple[Elt, Elt]] = []
    while len(pairs) < count:
        beta, gamma = (int(v) for v in rng.integers(0, ctx.group_order, size=2))
        if generates(ctx, gamma):
            pairs.append((beta, gamma))
    return pairs
