"""Exhaustive deciders for the line and translate problems.

Every decider is expressed as a ``ClassFamily``: an outer index (one multiplier
class per index) crossed with a fixed list of reduced generator classes. A class
is bad when no shift ``a`` of F_q makes the product primitive; the first bad
(outer index, class) pair in ascending order is the witness.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Callable, Iterator
from dataclasses import dataclass, replace
from enum import StrEnum
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, Field

from .charsum import CapExceededError
from .field import (
    ZERO,
    Elt,
    FieldCtx,
    add,
    add_logs,
    fq_coordinates,
    generates,
    generating_mask,
    is_primitive,
    mul,
    to_affine,
    zero_constant_elements,
)

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_SIZE = 65536
DEFAULT_MAX_PAIRS = 1_000_000
PAIR_BATCH = 1 << 20
REORDER_PROBE = 1024


class Problem(StrEnum):
    LINE = "line"
    TRANSLATE = "translate"


class Status(StrEnum):
    MEMBER = "member"
    NONMEMBER = "nonmember"


class Algorithm(StrEnum):
    ALG1 = "alg1"
    ALG2 = "alg2"
    QUARTIC = "quartic"
    TRANSLATE = "translate"
    BRUTE = "brute"


class WitnessError(RuntimeError):
    """Raised when a recorded bad pair does not survive independent re-verification."""


class PairClass(NamedTuple):
    beta: Elt
    gamma_inv_or_gamma: Elt
    reduction_tag: str


class Witness(BaseModel):
    beta: int
    gamma: int
    beta_coeffs: list[int]
    gamma_coeffs: list[int]
    failing_a: list[int]
    reduction_tag: str
    outer_index: int
    class_index: int
    modulus: list[int]


class SearchStats(BaseModel):
    algorithm: Algorithm
    classes_checked: int = 0
    primitivity_tests: int = 0
    outer_indices: int = 0
    chunks: int = 0

    def absorb(self, chunk: ChunkResult) -> None:
        self.classes_checked += chunk.classes_checked
        self.primitivity_tests += chunk.primitivity_tests
        self.outer_indices += chunk.stop - chunk.start
        self.chunks += 1


class Verdict(BaseModel):
    q: int
    n: int
    problem: Problem
    status: Status
    witness: Witness | None = None
    stats: SearchStats
    elapsed_ms: int = Field(default=0, ge=0)

    def canonical(self) -> str:
        """JSON without timing, identical across runs, worker counts and resumes."""
        return self.model_dump_json(exclude={"elapsed_ms"})


@dataclass(frozen=True, eq=False)
class ClassFamily:
    """Outer index range and reduced classes scanned by one algorithm.

    ``offsets[c, j]`` is the log added to the outer log for class ``c`` and the
    j-th value of ``a``. Translate and brute-force families compute their
    offsets per outer index instead.
    """

    algorithm: Algorithm
    outer_limit: int
    class_logs: np.ndarray
    offsets: np.ndarray
    tags: tuple[str, ...]
    skip_primitive: bool = False
    inverted: bool = False

    @property
    def class_count(self) -> int:
        return len(self.tags)


@dataclass(frozen=True)
class ChunkResult:
    start: int
    stop: int
    classes_checked: int
    primitivity_tests: int
    bad: tuple[int, int] | None


def default_algorithm(problem: Problem, n: int) -> Algorithm:
    if problem is Problem.TRANSLATE:
        return Algorithm.TRANSLATE
    return Algorithm.ALG2 if n == 3 else Algorithm.QUARTIC  # noqa: PLR2004


def _require_degree(ctx: FieldCtx, algorithm: Algorithm, *degrees: int) -> None:
    if ctx.n not in degrees:
        raise ValueError(f"{algorithm} needs degree in {degrees}, field has n={ctx.n}")


def _scaled(ctx: FieldCtx, coeff_logs: np.ndarray, power: int) -> np.ndarray:
    """Logs of c * omega^power for an array of F_q logs c."""
    coeff_logs = np.asarray(coeff_logs, dtype=np.int64)
    return np.where(coeff_logs < 0, ZERO, (coeff_logs + power) % ctx.group_order)


def _shift_offsets(ctx: FieldCtx, logs: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """Matrix of log(x + s) for x in logs (rows) and s in shifts (columns)."""
    rows = np.repeat(np.asarray(logs, dtype=np.int64), shifts.size)
    cols = np.tile(np.asarray(shifts, dtype=np.int64), len(logs))
    return add_logs(ctx, rows, cols).reshape(len(logs), shifts.size)


def plan_line_alg1(ctx: FieldCtx) -> ClassFamily:
    """beta = omega^k for k < tau against gamma = c2*w^2 + c1*w, (c2, c1) != (0, 0)."""
    _require_degree(ctx, Algorithm.ALG1, 3)
    units = ctx.fq_logs[1:]
    single_one = _scaled(ctx, units, 1)
    single_two = _scaled(ctx, units, 2)
    mixed = add_logs(ctx, np.repeat(single_two, units.size), np.tile(single_one, units.size))
    class_logs = np.concatenate([single_one, single_two, mixed])
    tags = (
        ("c1*w",) * units.size + ("c2*w^2",) * units.size + ("c2*w^2+c1*w",) * mixed.size
    )
    return ClassFamily(
        algorithm=Algorithm.ALG1,
        outer_limit=ctx.tau,
        class_logs=class_logs,
        offsets=_shift_offsets(ctx, class_logs, ctx.fq_logs),
        tags=tags,
    )


def _inverse_offsets(
    ctx: FieldCtx, inverse_logs: np.ndarray, *, skip_primitive: bool
) -> np.ndarray:
    """log(1 + a * g) for a in F_q* (plus a = 0 first when primitive betas are not skipped)."""
    products = (inverse_logs[:, None] + ctx.fq_logs[None, 1:]) % ctx.group_order
    one = np.zeros(products.size, dtype=np.int64)
    offsets = add_logs(ctx, one, products.ravel()).reshape(products.shape)
    if not skip_primitive:
        offsets = np.hstack([np.zeros((len(inverse_logs), 1), dtype=np.int64), offsets])
    return offsets


def plan_line_alg2(ctx: FieldCtx, *, skip_primitive: bool = True) -> ClassFamily:
    """beta = omega^k for k < R against gamma^-1 in {1/w} and {w + u : u in F_q}."""
    _require_degree(ctx, Algorithm.ALG2, 3)
    translates = add_logs(ctx, np.ones(ctx.q, dtype=np.int64), ctx.fq_logs)
    inverse_logs = np.concatenate([[ctx.group_order - 1], translates]).astype(np.int64)
    return ClassFamily(
        algorithm=Algorithm.ALG2,
        outer_limit=ctx.radical,
        class_logs=inverse_logs,
        offsets=_inverse_offsets(ctx, inverse_logs, skip_primitive=skip_primitive),
        tags=("1/w",) + ("w+u",) * ctx.q,
        skip_primitive=skip_primitive,
        inverted=True,
    )


def plan_line_quartic(ctx: FieldCtx, *, skip_primitive: bool = True) -> ClassFamily:
    """gamma in {w, w^2+uw, w^3+tw^2+uw}, scanned through gamma^-1; non-generators dropped."""
    _require_degree(ctx, Algorithm.QUARTIC, 4)
    fq = ctx.fq_logs
    q = ctx.q
    squares = add_logs(ctx, np.full(q, 2, dtype=np.int64), _scaled(ctx, fq, 1))
    cubic_tail = add_logs(ctx, np.repeat(_scaled(ctx, fq, 2), q), np.tile(_scaled(ctx, fq, 1), q))
    cubes = add_logs(ctx, np.full(q * q, 3, dtype=np.int64), cubic_tail)
    gammas = np.concatenate([[1], squares, cubes]).astype(np.int64)
    tags = np.array(["w"] + ["w^2+uw"] * q + ["w^3+tw^2+uw"] * (q * q))
    keep = generating_mask(ctx, gammas)
    gammas, tags = gammas[keep], tags[keep]
    logger.debug("quartic family for q=%d keeps %d of %d classes", q, keep.sum(), keep.size)
    inverse_logs = (-gammas) % ctx.group_order
    return ClassFamily(
        algorithm=Algorithm.QUARTIC,
        outer_limit=ctx.radical,
        class_logs=inverse_logs,
        offsets=_inverse_offsets(ctx, inverse_logs, skip_primitive=skip_primitive),
        tags=tuple(str(t) for t in tags),
        skip_primitive=skip_primitive,
        inverted=True,
    )


def plan_translate(ctx: FieldCtx) -> ClassFamily:
    """gamma = l_{n-1} w^{n-1} + ... + l_1 w, one outer index per coefficient vector."""
    _require_degree(ctx, Algorithm.TRANSLATE, 3, 4)
    return ClassFamily(
        algorithm=Algorithm.TRANSLATE,
        outer_limit=ctx.q ** (ctx.n - 1),
        class_logs=np.zeros(1, dtype=np.int64),
        offsets=ctx.fq_logs[None, :],
        tags=("zero-constant",),
    )


def brute_pair_count(ctx: FieldCtx) -> int:
    generators = np.count_nonzero(generating_mask(ctx, np.arange(ctx.group_order)))
    return ctx.group_order * int(generators)


def plan_brute(ctx: FieldCtx, *, max_pairs: int = DEFAULT_MAX_PAIRS) -> ClassFamily:
    """Every generator gamma (outer, ascending log) against every nonzero beta."""
    _require_degree(ctx, Algorithm.BRUTE, 3, 4)
    pairs = brute_pair_count(ctx)
    if pairs > max_pairs:
        raise CapExceededError(
            f"brute force over q={ctx.q}, n={ctx.n} needs {pairs} pairs, cap is {max_pairs}"
        )
    logs = np.arange(ctx.group_order, dtype=np.int64)
    gammas = logs[generating_mask(ctx, logs)]
    return ClassFamily(
        algorithm=Algorithm.BRUTE,
        outer_limit=gammas.size,
        class_logs=gammas,
        offsets=_shift_offsets(ctx, gammas, ctx.fq_logs),
        tags=("unreduced",),
    )


def reorder_offsets(ctx: FieldCtx, family: ClassFamily, probe: int = REORDER_PROBE) -> ClassFamily:
    """Per class, try first the shifts that succeed most often on the first outer indices."""
    if family.algorithm in (Algorithm.TRANSLATE, Algorithm.BRUTE):
        return family
    ks = np.arange(min(probe, family.outer_limit), dtype=np.int64)
    hits = np.empty(family.offsets.shape, dtype=np.int64)
    for col in range(family.offsets.shape[1]):
        column = family.offsets[:, col, None]
        hits[:, col] = ctx.prim_mask[(ks[None, :] + column) % ctx.radical].sum(axis=1)
    order = np.argsort(-hits, axis=1, kind="stable")
    return replace(family, offsets=np.take_along_axis(family.offsets, order, axis=1))


def plan(  # noqa: PLR0913
    ctx: FieldCtx,
    problem: Problem,
    algorithm: Algorithm | None = None,
    *,
    skip_primitive: bool = True,
    reorder_a: bool = False,
    max_pairs: int = DEFAULT_MAX_PAIRS,
) -> ClassFamily:
    algorithm = algorithm or default_algorithm(problem, ctx.n)
    if problem is Problem.TRANSLATE and algorithm is not Algorithm.TRANSLATE:
        raise ValueError(f"translate problem has no {algorithm} decider")
    if problem is Problem.LINE and algorithm is Algorithm.TRANSLATE:
        raise ValueError("line problem cannot use the translate decider")
    match algorithm:
        case Algorithm.ALG1:
            family = plan_line_alg1(ctx)
        case Algorithm.ALG2:
            family = plan_line_alg2(ctx, skip_primitive=skip_primitive)
        case Algorithm.QUARTIC:
            family = plan_line_quartic(ctx, skip_primitive=skip_primitive)
        case Algorithm.TRANSLATE:
            family = plan_translate(ctx)
        case Algorithm.BRUTE:
            family = plan_brute(ctx, max_pairs=max_pairs)
        case _:
            raise ValueError(f"unknown algorithm {algorithm}")
    return reorder_offsets(ctx, family) if reorder_a else family


def _filter_offsets(
    ctx: FieldCtx, kk: np.ndarray, cc: np.ndarray, offsets: np.ndarray
) -> tuple[np.ndarray, np.ndarray, int]:
    tested = 0
    for col in range(offsets.shape[1]):
        if kk.size == 0:
            break
        tested += kk.size
        miss = ~ctx.prim_mask[(kk + offsets[cc, col]) % ctx.radical]
        kk, cc = kk[miss], cc[miss]
    return kk, cc, tested


def _scan_offsets(ctx: FieldCtx, family: ClassFamily, start: int, stop: int) -> ChunkResult:
    ks = np.arange(start, stop, dtype=np.int64)
    if family.skip_primitive:
        ks = ks[~ctx.prim_mask[ks % ctx.radical]]
    classes = family.class_count
    step = max(1, PAIR_BATCH // classes)
    tested = 0
    for lo in range(0, ks.size, step):
        batch = ks[lo : lo + step]
        kk = np.repeat(batch, classes)
        cc = np.tile(np.arange(classes, dtype=np.int64), batch.size)
        kk, cc, batch_tested = _filter_offsets(ctx, kk, cc, family.offsets)
        tested += batch_tested
        if kk.size:
            checked = (lo + batch.size) * classes
            return ChunkResult(start, stop, checked, tested, (int(kk[0]), int(cc[0])))
    return ChunkResult(start, stop, ks.size * classes, tested, None)


def _scan_translate(ctx: FieldCtx, family: ClassFamily, start: int, stop: int) -> ChunkResult:
    indices = np.arange(start, stop, dtype=np.int64)
    gammas = zero_constant_elements(ctx, indices)
    keep = generating_mask(ctx, gammas)
    indices, gammas = indices[keep], gammas[keep]
    tested = 0
    for a in family.offsets[0]:
        if indices.size == 0:
            break
        tested += indices.size
        shifted = add_logs(ctx, gammas, np.full(gammas.size, a, dtype=np.int64))
        miss = ~ctx.prim_mask[shifted % ctx.radical]
        indices, gammas = indices[miss], gammas[miss]
    checked = int(keep.sum())
    bad = (int(indices[0]), 0) if indices.size else None
    return ChunkResult(start, stop, checked, tested, bad)


def _scan_brute(ctx: FieldCtx, family: ClassFamily, start: int, stop: int) -> ChunkResult:
    betas = np.arange(ctx.group_order, dtype=np.int64)
    tested = 0
    for position in range(start, stop):
        offsets = family.offsets[position]
        good = np.zeros(betas.size, dtype=bool)
        for offset in offsets:
            good |= ctx.prim_mask[(betas + offset) % ctx.radical]
        tested += betas.size * offsets.size
        if not good.all():
            checked = (position - start + 1) * betas.size
            return ChunkResult(start, stop, checked, tested, (position, int(np.argmin(good))))
    return ChunkResult(start, stop, (stop - start) * betas.size, tested, None)


def scan_chunk(ctx: FieldCtx, family: ClassFamily, start: int, stop: int) -> ChunkResult:
    """Scan outer indices [start, stop) and report the first bad (outer, class) pair."""
    stop = min(stop, family.outer_limit)
    if family.algorithm is Algorithm.TRANSLATE:
        return _scan_translate(ctx, family, start, stop)
    if family.algorithm is Algorithm.BRUTE:
        return _scan_brute(ctx, family, start, stop)
    return _scan_offsets(ctx, family, start, stop)


def chunk_bounds(family: ClassFamily, chunk_size: int, start: int = 0) -> Iterator[tuple[int, int]]:
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")
    for lo in range(start, family.outer_limit, chunk_size):
        yield lo, min(lo + chunk_size, family.outer_limit)


def is_bad_class(ctx: FieldCtx, family: ClassFamily, outer: int, class_index: int) -> bool:
    if family.algorithm is Algorithm.TRANSLATE:
        return scan_chunk(ctx, family, outer, outer + 1).bad is not None
    if family.algorithm is Algorithm.BRUTE:
        row, base = family.offsets[outer], class_index
    else:
        if family.skip_primitive and ctx.prim_mask[outer % ctx.radical]:
            return False
        row, base = family.offsets[class_index], outer
    return not ctx.prim_mask[(base + row) % ctx.radical].any()


def pair_class(ctx: FieldCtx, family: ClassFamily, outer: int, class_index: int) -> PairClass:
    """The (beta, gamma) pair of the original problem behind one scanned class."""
    n_elems = ctx.group_order
    match family.algorithm:
        case Algorithm.TRANSLATE:
            gamma = int(zero_constant_elements(ctx, np.array([outer]))[0])
            return PairClass(0, gamma, family.tags[0])
        case Algorithm.BRUTE:
            return PairClass(class_index, int(family.class_logs[outer]), family.tags[0])
    log = int(family.class_logs[class_index])
    tag = family.tags[class_index]
    if family.inverted:
        return PairClass((outer + log) % n_elems, (-log) % n_elems, tag)
    return PairClass(outer, log, tag)


def witness_for(ctx: FieldCtx, family: ClassFamily, outer: int, class_index: int) -> Witness:
    beta, gamma, tag = pair_class(ctx, family, outer, class_index)
    return Witness(
        beta=beta,
        gamma=gamma,
        beta_coeffs=to_affine(ctx, beta),
        gamma_coeffs=to_affine(ctx, gamma),
        failing_a=[int(a) for a in ctx.fq_logs],
        reduction_tag=tag,
        outer_index=outer,
        class_index=class_index,
        modulus=list(ctx.modulus),
    )


def verify_witness(ctx: FieldCtx, problem: Problem, witness: Witness) -> None:
    """Recheck a bad pair with scalar field arithmetic only."""
    if list(ctx.modulus) != witness.modulus:
        raise WitnessError(
            f"witness was recorded for modulus {witness.modulus}, field uses {list(ctx.modulus)}"
        )
    if witness.beta == ZERO:
        raise WitnessError("beta is zero")
    if problem is Problem.TRANSLATE and witness.beta != 0:
        raise WitnessError("translate witnesses must have beta = 1")
    if (
        to_affine(ctx, witness.beta) != witness.beta_coeffs
        or to_affine(ctx, witness.gamma) != witness.gamma_coeffs
    ):
        raise WitnessError("recorded coordinates do not match the logs")
    if not generates(ctx, witness.gamma):
        raise WitnessError(f"gamma=w^{witness.gamma} does not generate the extension")
    if sorted(witness.failing_a) != sorted(int(a) for a in ctx.fq_logs):
        raise WitnessError("failing values do not cover F_q")
    for a in witness.failing_a:
        value = mul(ctx, witness.beta, add(ctx, witness.gamma, a))
        if is_primitive(ctx, value):
            raise WitnessError(f"a=w^{a} makes beta*(gamma+a) primitive")


def decide(  # noqa: PLR0913
    ctx: FieldCtx,
    problem: Problem,
    family: ClassFamily,
    *,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    start: int = 0,
    stats: SearchStats | None = None,
    on_chunk: Callable[[ChunkResult, SearchStats], None] | None = None,
) -> Verdict:
    """Sequential scan from ``start``; ``stats`` carries counts from a resumed run."""
    began = time.perf_counter()
    stats = stats.model_copy() if stats else SearchStats(algorithm=family.algorithm)
    witness = None
    for lo, hi in chunk_bounds(family, chunk_size, start):
        result = scan_chunk(ctx, family, lo, hi)
        stats.absorb(result)
        if on_chunk is not None:
            on_chunk(result, stats)
        if result.bad is not None:
            witness = witness_for(ctx, family, *result.bad)
            break
    return build_verdict(ctx, problem, stats, witness, began)


def build_verdict(
    ctx: FieldCtx, problem: Problem, stats: SearchStats, witness: Witness | None, began: float
) -> Verdict:
    status = Status.MEMBER if witness is None else Status.NONMEMBER
    elapsed_ms = int((time.perf_counter() - began) * 1000)
    logger.info(
        "q=%d n=%d %s: %s after %d classes", ctx.q, ctx.n, problem, status, stats.classes_checked
    )
    return Verdict(
        q=ctx.q,
        n=ctx.n,
        problem=problem,
        status=status,
        witness=witness,
        stats=stats,
        elapsed_ms=elapsed_ms,
    )


def check_line_alg1(
    ctx: FieldCtx, *, chunk_size: int = DEFAULT_CHUNK_SIZE, reorder_a: bool = False
) -> Verdict:
    family = plan(ctx, Problem.LINE, Algorithm.ALG1, reorder_a=reorder_a)
    return decide(ctx, Problem.LINE, family, chunk_size=chunk_size)


def check_line_alg2(
    ctx: FieldCtx,
    *,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    skip_primitive: bool = True,
    reorder_a: bool = False,
) -> Verdict:
    family = plan(
        ctx, Problem.LINE, Algorithm.ALG2, skip_primitive=skip_primitive, reorder_a=reorder_a
    )
    return decide(ctx, Problem.LINE, family, chunk_size=chunk_size)


def check_line_quartic(
    ctx: FieldCtx,
    *,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    skip_primitive: bool = True,
    reorder_a: bool = False,
) -> Verdict:
    family = plan(
        ctx, Problem.LINE, Algorithm.QUARTIC, skip_primitive=skip_primitive, reorder_a=reorder_a
    )
    return decide(ctx, Problem.LINE, family, chunk_size=chunk_size)


def check_translate(
    ctx: FieldCtx, n: int | None = None, *, chunk_size: int = DEFAULT_CHUNK_SIZE
) -> Verdict:
    if n is not None and n != ctx.n:
        raise ValueError(f"field has degree {ctx.n}, asked for {n}")
    family = plan(ctx, Problem.TRANSLATE, Algorithm.TRANSLATE)
    return decide(ctx, Problem.TRANSLATE, family, chunk_size=chunk_size)


def brute_force_line(ctx: FieldCtx, *, max_pairs: int = DEFAULT_MAX_PAIRS) -> Verdict:
    family = plan(ctx, Problem.LINE, Algorithm.BRUTE, max_pairs=max_pairs)
    return decide(ctx, Problem.LINE, family, chunk_size=max(1, family.outer_limit))


def find_bad_pair(ctx: FieldCtx, n: int, problem: Problem) -> Witness | None:
    if n != ctx.n:
        raise ValueError(f"field has degree {ctx.n}, asked for {n}")
    family = plan(ctx, problem)
    return decide(ctx, problem, family).witness


def iter_bad_pairs(
    ctx: FieldCtx, *, max_pairs: int = DEFAULT_MAX_PAIRS
) -> Iterator[tuple[Elt, Elt]]:
    """Every unreduced bad (beta, gamma), gamma-major in ascending logs."""
    family = plan_brute(ctx, max_pairs=max_pairs)
    betas = np.arange(ctx.group_order, dtype=np.int64)
    for position, gamma in enumerate(family.class_logs):
        good = np.zeros(betas.size, dtype=bool)
        for offset in family.offsets[position]:
            good |= ctx.prim_mask[(betas + offset) % ctx.radical]
        for beta in betas[~good]:
            yield int(beta), int(gamma)


def reduce_pair(ctx: FieldCtx, beta: Elt, gamma: Elt) -> tuple[int, int]:
    """(outer index, class index) of the cubic first-algorithm class holding (beta, gamma).

    gamma loses its constant coordinate; beta = w^k * lam with k < tau and lam in
    F_q*, and lam moves onto gamma.
    """
    _require_degree(ctx, Algorithm.ALG1, 3)
    if beta == ZERO or not generates(ctx, gamma):
        raise ValueError("reduce_pair needs nonzero beta and a generating gamma")
    k, j = beta % ctx.tau, beta // ctx.tau
    lam = j * ctx.tau
    c2, c1, _ = fq_coordinates(ctx, gamma)
    units = ctx.q - 1
    if c2 == ZERO:
        return k, ((c1 + lam) % ctx.group_order) // ctx.tau
    if c1 == ZERO:
        return k, units + ((c2 + lam) % ctx.group_order) // ctx.tau
    j2 = ((c2 + lam) % ctx.group_order) // ctx.tau
    j1 = ((c1 + lam) % ctx.group_order) // ctx.tau
    return k, 2 * units + j2 * units + j1
