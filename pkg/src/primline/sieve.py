from __future__ import annotations

import logging
from collections.abc import Callable, Iterable, Iterator
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from math import prod
from typing import Any

from .arith import (
    FactorizationError,
    Factorization,
    factor_q_power_minus_one,
    prime_powers_between,
    primes_below,
)

logger = logging.getLogger(__name__)

QUARTIC_FIRST_PASS_REFERENCE = 4981


class PartitionError(ValueError):
    """Raised when a sieve partition does not match the primes of q^n - 1."""


class LemCVariant(StrEnum):
    K2 = "k2"
    K6 = "k6"


@dataclass(frozen=True)
class SievePartition:
    """Split of the primes of q^n - 1 into core, sieving and special primes."""

    q: int
    n: int
    core_primes: tuple[int, ...]
    sieving_primes: tuple[int, ...]
    special_primes: tuple[int, ...]

    @property
    def k(self) -> int:
        return prod(self.core_primes)

    @property
    def t(self) -> int:
        return len(self.core_primes)

    @property
    def s(self) -> int:
        return len(self.sieving_primes)

    @property
    def r(self) -> int:
        return len(self.special_primes)

    @property
    def m(self) -> Fraction:
        return prod((Fraction(p - 1, p) for p in self.core_primes), start=Fraction(1))

    @property
    def delta(self) -> Fraction:
        return 1 - sum((Fraction(1, p) for p in self.sieving_primes), start=Fraction(0))

    @property
    def epsilon(self) -> Fraction:
        return sum((Fraction(1, l_j) for l_j in self.special_primes), start=Fraction(0))

    def validate(self, factorization: Factorization) -> None:
        parts = (*self.core_primes, *self.sieving_primes, *self.special_primes)
        if len(set(parts)) != len(parts) or set(parts) != set(factorization.primes):
            raise PartitionError(
                f"partition {parts} does not split the primes {factorization.primes} "
                f"of {self.q}^{self.n} - 1"
            )

    def to_json(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "t": self.t,
            "s": self.s,
            "r": self.r,
            "core_primes": list(self.core_primes),
            "sieving_primes": list(self.sieving_primes),
            "special_primes": list(self.special_primes),
            "m": str(self.m),
            "delta": str(self.delta),
            "epsilon": str(self.epsilon),
        }


@dataclass(frozen=True)
class LemCData:
    partition: SievePartition
    nu1: Fraction
    nu2: Fraction


def exceeds_sqrt_multiple(lhs: Fraction, coeff: Fraction, q: int) -> bool:
    """Exactly decide lhs > coeff * sqrt(q)."""
    if coeff >= 0:
        return lhs > 0 and lhs * lhs > coeff * coeff * q
    if lhs >= 0:
        return True
    return lhs * lhs < coeff * coeff * q


def lemma1_bound(partition: SievePartition) -> Fraction | None:
    """(n-1)^2 * (X / (m*delta - eps))^2, or None when m*delta <= eps."""
    m, delta, eps = partition.m, partition.delta, partition.epsilon
    denominator = m * delta - eps
    if denominator <= 0:
        return None
    numerator = (
        2**partition.t * m * (partition.s - 1 + 2 * delta) - m * delta + partition.r - eps
    )
    ratio = numerator / denominator
    return (partition.n - 1) ** 2 * ratio * ratio


def lemma1_criterion(partition: SievePartition) -> bool:
    bound = lemma1_bound(partition)
    return bound is not None and partition.q > bound


def enumerate_partitions(
    q: int,
    n: int,
    factorization: Factorization,
    t_max: int,
    r_max: int,
) -> Iterator[SievePartition]:
    """Partitions in (t asc, r asc) order: k from the t smallest primes, l from the r largest."""
    primes = factorization.primes
    for t in range(1, min(t_max, len(primes)) + 1):
        core, rest = primes[:t], primes[t:]
        for r in range(min(r_max, len(rest)) + 1):
            cut = len(rest) - r
            yield SievePartition(
                q=q,
                n=n,
                core_primes=core,
                sieving_primes=rest[:cut],
                special_primes=rest[cut:],
            )


def best_partition(
    q: int,
    n: int,
    t_max: int = 4,
    r_max: int = 6,
    *,
    factorization: Factorization | None = None,
) -> SievePartition | None:
    factorization = factorization or factor_q_power_minus_one(q, n)
    for partition in enumerate_partitions(q, n, factorization, t_max, r_max):
        if lemma1_criterion(partition):
            return partition
    return None


def lemc_data(
    q: int,
    variant: LemCVariant,
    r: int,
    factorization: Factorization | None = None,
) -> LemCData | None:
    """Cubic partition for the refined criterion; None when fewer than r primes qualify."""
    if variant is LemCVariant.K2 and q % 2 == 0:
        raise PartitionError(f"variant k2 needs odd q, got {q}")
    if variant is LemCVariant.K6 and q % 6 != 1:
        raise PartitionError(f"variant k6 needs q = 1 mod 6, got {q}")
    factorization = factorization or factor_q_power_minus_one(q, 3)
    core = (2,) if variant is LemCVariant.K2 else (2, 3)
    tau = q * q + q + 1
    rest = [p for p in factorization.primes if p not in core]
    eligible = [p for p in rest if tau % p == 0]
    if len(eligible) < r:
        return None
    special = tuple(eligible[len(eligible) - r :])
    sieving = tuple(p for p in rest if p not in special)
    partition = SievePartition(
        q=q, n=3, core_primes=core, sieving_primes=sieving, special_primes=special
    )
    nu1 = sum((Fraction(p - 1, p) for p in sieving if tau % p), start=Fraction(0))
    nu2 = sum((Fraction(p - 1, p) for p in sieving if tau % p == 0), start=Fraction(0))
    return LemCData(partition=partition, nu1=nu1, nu2=nu2)


def lemC_criterion(data: LemCData, variant: LemCVariant) -> bool:  # noqa: N802
    part = data.partition
    q, m, delta, eps, r = part.q, part.m, part.delta, part.epsilon, part.r
    if variant is LemCVariant.K2:
        if q % 2 == 0:
            raise PartitionError(f"variant k2 needs odd q, got {q}")
        coeff = m * (2 * delta + 4 * data.nu1 + 3 * data.nu2) + r - eps
        constant = m * data.nu2 + r - eps
    else:
        if q % 6 != 1:
            raise PartitionError(f"variant k6 needs q = 1 mod 6, got {q}")
        coeff = m * (5 * delta + 8 * data.nu1 + 6 * data.nu2) + r - eps
        constant = m * (delta + 2 * data.nu2) + r - eps
    tau = q * q + q + 1
    if any(tau % l_j for l_j in part.special_primes):
        raise PartitionError(f"special primes {part.special_primes} must divide {tau}")
    return exceeds_sqrt_multiple(q * (m * delta - eps) - constant, coeff, q)


@dataclass
class PipelineResult:
    survivors: list[int]
    stages: dict[str, int] = field(default_factory=dict)
    eliminations: dict[int, SievePartition] = field(default_factory=dict)


def cubic_pipeline(list146: Iterable[int], r_max: int = 2) -> PipelineResult:
    candidates = sorted(set(list146))
    result = PipelineResult(survivors=[], stages={"input": len(candidates)})
    after_k2: list[int] = []
    for q in candidates:
        data = _eliminate(q, LemCVariant.K2, r_max) if q % 2 else None
        if data is None:
            after_k2.append(q)
        else:
            result.eliminations[q] = data.partition
    result.stages[LemCVariant.K2.value] = len(after_k2)
    for q in after_k2:
        data = _eliminate(q, LemCVariant.K6, r_max) if q % 6 == 1 else None
        if data is None:
            result.survivors.append(q)
        else:
            result.eliminations[q] = data.partition
    result.stages[LemCVariant.K6.value] = len(result.survivors)
    logger.info("cubic refinement stages: %s", result.stages)
    return result


def _eliminate(q: int, variant: LemCVariant, r_max: int) -> LemCData | None:
    factorization = factor_q_power_minus_one(q, 3)
    for r in range(r_max + 1):
        data = lemc_data(q, variant, r, factorization)
        if data is not None and lemC_criterion(data, variant):
            return data
    return None


def worst_case_bound(omega: int, t: int, n: int = 4) -> Fraction | None:
    """Sieve bound with r = 0 for the first omega primes and k built from the first t."""
    primes = [int(p) for p in primes_below(1000)[:omega]]
    partition = SievePartition(
        q=0,
        n=n,
        core_primes=tuple(primes[:t]),
        sieving_primes=tuple(primes[t:]),
        special_primes=(),
    )
    return lemma1_bound(partition)


def quartic_cutoff(max_omega: int = 14, t_max: int = 4) -> int:
    """Smallest B such that every q > B with at most max_omega primes in q^4 - 1 passes.

    Replacing the primes of q^4 - 1 by the first primes lowers delta and theta(k), so the
    worst case for each prime count uses the smallest primes.
    """
    cutoff = 0
    for omega in range(1, max_omega + 1):
        bounds = [
            b
            for t in range(1, min(t_max, omega) + 1)
            if (b := worst_case_bound(omega, t)) is not None
        ]
        if not bounds:
            raise PartitionError(f"no feasible core for {omega} primes with t <= {t_max}")
        best = min(bounds)
        cutoff = max(cutoff, int(best))
    return cutoff


@dataclass(frozen=True)
class QuarticOutcome:
    q: int
    omega: int
    skipped: bool
    first_pass: SievePartition | None
    final: SievePartition | None

    @property
    def survives(self) -> bool:
        return not self.skipped and self.final is None


def _classify_quartic(q: int, max_omega: int, t_max: int, r_max: int) -> QuarticOutcome:
    try:
        factorization = factor_q_power_minus_one(q, 4)
    except FactorizationError as exc:
        raise FactorizationError(f"q={q}: {exc}") from exc
    if factorization.omega > max_omega:
        return QuarticOutcome(q, factorization.omega, True, None, None)
    first = best_partition(q, 4, t_max, 0, factorization=factorization)
    final = first or best_partition(q, 4, t_max, r_max, factorization=factorization)
    return QuarticOutcome(q, factorization.omega, False, first, final)


def _classify_chunk(
    qs: list[int], max_omega: int, t_max: int, r_max: int
) -> list[QuarticOutcome]:
    return [_classify_quartic(q, max_omega, t_max, r_max) for q in qs]


def quartic_pipeline(  # noqa: PLR0913
    *,
    max_omega: int = 14,
    t_max: int = 4,
    r_max: int = 4,
    workers: int = 1,
    chunk_size: int = 2048,
    progress: Callable[[int, int], None] | None = None,
) -> PipelineResult:
    cutoff = quartic_cutoff(max_omega, t_max)
    qs = [pp.q for pp in prime_powers_between(2, cutoff)]
    logger.info("quartic scan: %d prime powers up to %d", len(qs), cutoff)
    chunks = [qs[i : i + chunk_size] for i in range(0, len(qs), chunk_size)]
    outcomes: list[QuarticOutcome] = []

    def _collect(batch: list[QuarticOutcome]) -> None:
        outcomes.extend(batch)
        if progress is not None:
            progress(len(outcomes), len(qs))

    if workers <= 1:
        for chunk in chunks:
            _collect(_classify_chunk(chunk, max_omega, t_max, r_max))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_classify_chunk, chunk, max_omega, t_max, r_max) for chunk in chunks
            ]
            for future in futures:
                _collect(future.result())

    first_pass = [o.q for o in outcomes if not o.skipped and o.first_pass is None]
    result = PipelineResult(
        survivors=sorted(o.q for o in outcomes if o.survives),
        stages={
            "scanned": len(qs),
            "cutoff": cutoff,
            "omega_skipped": sum(o.skipped for o in outcomes),
            "first_pass": len(first_pass),
        },
    )
    for o in outcomes:
        if o.final is not None:
            result.eliminations[o.q] = o.final
    result.stages["final"] = len(result.survivors)
    if len(first_pass) != QUARTIC_FIRST_PASS_REFERENCE:
        logger.info(
            "first pass left %d values (published run reports %d)",
            len(first_pass),
            QUARTIC_FIRST_PASS_REFERENCE,
        )
    return result
