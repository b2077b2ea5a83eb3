from __future__ import annotations

import itertools
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np

from .arith import Factorization, factor_q_power_minus_one, is_prime, radical

if TYPE_CHECKING:
    from .cache import FieldCache

logger = logging.getLogger(__name__)

# A field element is its discrete log with respect to omega, or ZERO.
Elt = int
ZERO: Elt = -1

DEFAULT_MEM_BUDGET = 2**28 * 8
COORDINATE_TABLE_LIMIT = 2**22
_EXP_CHUNK = 1 << 16


class FieldError(RuntimeError):
    """Raised when a field cannot be constructed or an operation is undefined."""


class MemoryBudgetError(FieldError):
    """Raised when the exp/log tables of a field would not fit the memory budget."""


def table_bytes(q: int, n: int) -> int:
    """Bytes held by the exp table, log table and primitivity mask of F_{q^n}."""
    order = q**n
    return order * 4 + order * 4 + order


@dataclass(frozen=True, eq=False)
class FieldCtx:
    """F_{q^n} built as F_p[x]/(modulus) with omega = x primitive.

    Elements are packed as integers sum(c_i * p**i) over the polynomial coefficients.
    """

    p: int
    alpha: int
    n: int
    modulus: tuple[int, ...]
    factorization: Factorization
    exp_table: np.ndarray
    log_table: np.ndarray
    prim_mask: np.ndarray

    @property
    def q(self) -> int:
        return int(self.p**self.alpha)

    @property
    def degree(self) -> int:
        return self.alpha * self.n

    @property
    def order(self) -> int:
        return int(self.p**self.degree)

    @property
    def group_order(self) -> int:
        return self.order - 1

    @property
    def tau(self) -> int:
        return self.group_order // (self.q - 1)

    @property
    def radical(self) -> int:
        return radical(self.factorization)

    @cached_property
    def fq_logs(self) -> np.ndarray:
        """Logs of F_q in canonical order: ZERO, then omega^(k*tau) for ascending k."""
        logs = np.arange(-1, self.q - 1, dtype=np.int64)
        logs[1:] *= self.tau
        return logs

    @cached_property
    def coordinate_table(self) -> np.ndarray:
        """Row v holds the F_q-coordinates (as F_q indices) of the packed element v."""
        if self.order > COORDINATE_TABLE_LIMIT:
            raise FieldError(f"coordinate table for order {self.order} is too large")
        grid = np.indices((self.q,) * self.n).reshape(self.n, -1)
        packed = np.zeros(grid.shape[1], dtype=np.int64)
        for row, power in zip(grid, range(self.n - 1, -1, -1), strict=True):
            logs = self.fq_logs[row]
            term = np.where(logs < 0, -1, (logs + power) % self.group_order)
            packed = add_packed(self, packed, packed_of(self, term))
        table = np.empty((self.order, self.n), dtype=np.int64)
        table[packed] = grid.T
        return table


def packed_of(ctx: FieldCtx, logs: np.ndarray) -> np.ndarray:
    """Packed values of an array of logs; ZERO maps to 0."""
    logs = np.asarray(logs, dtype=np.int64)
    safe = np.where(logs < 0, 0, logs)
    return np.where(logs < 0, 0, ctx.exp_table[safe].astype(np.int64))


def logs_of(ctx: FieldCtx, packed: np.ndarray) -> np.ndarray:
    return ctx.log_table[np.asarray(packed, dtype=np.int64)].astype(np.int64)


def add_packed(ctx: FieldCtx, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Coefficient-wise addition of packed elements."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if ctx.p == 2:  # noqa: PLR2004
        return np.bitwise_xor(a, b)
    result = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
    weight = 1
    for _ in range(ctx.degree):
        digit = (a // weight % ctx.p + b // weight % ctx.p) % ctx.p
        result += digit * weight
        weight *= ctx.p
    return result


def add(ctx: FieldCtx, x: Elt, y: Elt) -> Elt:
    if x == ZERO:
        return y
    if y == ZERO:
        return x
    total = add_packed(ctx, np.int64(ctx.exp_table[x]), np.int64(ctx.exp_table[y]))
    return int(ctx.log_table[int(total)])


def add_logs(ctx: FieldCtx, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorised add over arrays of logs."""
    return logs_of(ctx, add_packed(ctx, packed_of(ctx, x), packed_of(ctx, y)))


def mul(ctx: FieldCtx, x: Elt, y: Elt) -> Elt:
    if x == ZERO or y == ZERO:
        return ZERO
    return (x + y) % ctx.group_order


def inv(ctx: FieldCtx, x: Elt) -> Elt:
    if x == ZERO:
        raise FieldError("zero has no inverse")
    return (-x) % ctx.group_order


def from_affine(ctx: FieldCtx, coeffs: Sequence[int]) -> Elt:
    """Element with F_p coordinates in the basis {omega^(d-1), ..., omega, 1}."""
    if len(coeffs) != ctx.degree:
        raise FieldError(f"expected {ctx.degree} coordinates, got {len(coeffs)}")
    packed = 0
    for c in coeffs:
        packed = packed * ctx.p + c % ctx.p
    return int(ctx.log_table[packed])


def to_affine(ctx: FieldCtx, x: Elt) -> list[int]:
    packed = 0 if x == ZERO else int(ctx.exp_table[x])
    coeffs = []
    for _ in range(ctx.degree):
        packed, c = divmod(packed, ctx.p)
        coeffs.append(c)
    return coeffs[::-1]


def fq_coordinates(ctx: FieldCtx, x: Elt) -> tuple[Elt, ...]:
    """Coordinates of x over F_q in the basis {omega^(n-1), ..., omega, 1}."""
    packed = 0 if x == ZERO else int(ctx.exp_table[x])
    return tuple(int(ctx.fq_logs[i]) for i in ctx.coordinate_table[packed])


def is_primitive(ctx: FieldCtx, x: Elt) -> bool:
    return x != ZERO and bool(ctx.prim_mask[x % ctx.radical])


def subfield_strides(ctx: FieldCtx) -> list[int]:
    """Log strides of the maximal proper subfields F_{q^d} containing F_q."""
    n = ctx.n
    return [
        ctx.group_order // (ctx.q**d - 1)
        for d in range(1, n)
        if n % d == 0 and is_prime(n // d)
    ]


def generates(ctx: FieldCtx, gamma: Elt) -> bool:
    if gamma == ZERO:
        return False
    return all(gamma % stride for stride in subfield_strides(ctx))


def generating_mask(ctx: FieldCtx, logs: np.ndarray) -> np.ndarray:
    logs = np.asarray(logs, dtype=np.int64)
    mask = logs >= 0
    for stride in subfield_strides(ctx):
        mask &= logs % stride != 0
    return mask


def zero_constant_elements(ctx: FieldCtx, indices: np.ndarray) -> np.ndarray:
    """Logs of sum_{i=1}^{n-1} lambda_i omega^i, lambda read as base-q digits of each index.

    The most significant digit is the coefficient of omega^(n-1).
    """
    indices = np.asarray(indices, dtype=np.int64)
    packed = np.zeros(indices.shape, dtype=np.int64)
    rest = indices.copy()
    for power in range(1, ctx.n):
        digit = rest % ctx.q
        rest //= ctx.q
        logs = ctx.fq_logs[digit]
        term = np.where(logs < 0, -1, (logs + power) % ctx.group_order)
        packed = add_packed(ctx, packed, packed_of(ctx, term))
    return logs_of(ctx, packed)


def _poly_mulmod(a: list[int], b: list[int], modulus: Sequence[int], p: int) -> list[int]:
    d = len(modulus) - 1
    prod = [0] * (2 * d - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    for top in range(len(prod) - 1, d - 1, -1):
        coef = prod[top]
        if coef:
            for j in range(d):
                prod[top - d + j] = (prod[top - d + j] - coef * modulus[j]) % p
            prod[top] = 0
    return prod[:d]


def _poly_powmod(exponent: int, modulus: Sequence[int], p: int) -> list[int]:
    """x**exponent reduced by the monic modulus (low-first coefficients)."""
    d = len(modulus) - 1
    result = [1] + [0] * (d - 1)
    base = _poly_mulmod([0, 1] if d > 1 else [(-modulus[0]) % p], [1], modulus, p)
    while exponent:
        if exponent & 1:
            result = _poly_mulmod(result, base, modulus, p)
        base = _poly_mulmod(base, base, modulus, p)
        exponent >>= 1
    return result


def root_is_primitive(modulus: Sequence[int], p: int, factorization: Factorization) -> bool:
    """Whether x has order exactly p^d - 1 modulo the monic modulus.

    An element of that order exists only when the quotient ring is a field, so this
    also certifies irreducibility.
    """
    d = len(modulus) - 1
    one = [1] + [0] * (d - 1)
    group_order = factorization.n
    if _poly_powmod(group_order, modulus, p) != one:
        return False
    return all(_poly_powmod(group_order // r, modulus, p) != one for r in factorization.primes)


def find_primitive_modulus(p: int, degree: int, factorization: Factorization) -> tuple[int, ...]:
    """First primitive monic polynomial in lexicographic order of (c_{d-1}, ..., c_0)."""
    for high_first in itertools.product(range(p), repeat=degree):
        if high_first[-1] == 0:
            continue
        modulus = (*high_first[::-1], 1)
        if root_is_primitive(modulus, p, factorization):
            return modulus
    raise FieldError(f"no primitive polynomial of degree {degree} over F_{p}")


def _companion(modulus: Sequence[int], p: int) -> np.ndarray:
    """Matrix of multiplication by x acting on row vectors of low-first coefficients."""
    d = len(modulus) - 1
    matrix = np.zeros((d, d), dtype=np.int64)
    for i in range(d - 1):
        matrix[i, i + 1] = 1
    matrix[d - 1, :] = [(-c) % p for c in modulus[:d]]
    return matrix


def _matpow(matrix: np.ndarray, exponent: int, p: int) -> np.ndarray:
    result = np.eye(matrix.shape[0], dtype=np.int64)
    base = matrix.copy()
    while exponent:
        if exponent & 1:
            result = result @ base % p
        base = base @ base % p
        exponent >>= 1
    return result


def build_exp_table(modulus: Sequence[int], p: int) -> np.ndarray:
    """Packed values of x^k for 0 <= k < p^d - 1, built in matrix-power blocks."""
    d = len(modulus) - 1
    group_order = p**d - 1
    companion = _companion(modulus, p)
    weights = p ** np.arange(d, dtype=np.int64)
    block = min(group_order, _EXP_CHUNK)

    rows = np.zeros((1, d), dtype=np.int64)
    rows[0, 0] = 1
    step = companion.copy()
    while rows.shape[0] < block:
        rows = np.vstack([rows, rows @ step % p])
        step = step @ step % p
    rows = rows[:block]

    table = np.empty(group_order, dtype=np.int32)
    shift = np.eye(d, dtype=np.int64)
    block_step = _matpow(companion, block, p)
    for start in range(0, group_order, block):
        stop = min(start + block, group_order)
        coeffs = rows[: stop - start] @ shift % p
        table[start:stop] = coeffs @ weights
        shift = shift @ block_step % p
    return table


def steps_by_root(modulus: Sequence[int], p: int, exp_table: np.ndarray) -> bool:
    """Whether exp_table[k + 1] == x * exp_table[k] for every k, wrapping at the end."""
    d = len(modulus) - 1
    companion = _companion(modulus, p)
    weights = p ** np.arange(d, dtype=np.int64)
    following = np.roll(exp_table, -1)
    for start in range(0, exp_table.size, _EXP_CHUNK):
        stop = min(start + _EXP_CHUNK, exp_table.size)
        packed = exp_table[start:stop].astype(np.int64)
        coeffs = packed[:, None] // weights % p
        if not np.array_equal((coeffs @ companion % p) @ weights, following[start:stop]):
            return False
    return True


def build_tables(
    modulus: Sequence[int], p: int, exp_table: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    d = len(modulus) - 1
    order = p**d
    if exp_table is None:
        exp_table = build_exp_table(modulus, p)
    log_table = np.full(order, -1, dtype=np.int32)
    log_table[exp_table] = np.arange(order - 1, dtype=np.int32)
    if np.count_nonzero(log_table < 0) != 1 or log_table[0] != -1:
        raise FieldError(f"exp table for modulus {tuple(modulus)} is not a permutation")
    return exp_table, log_table


def primitive_mask(factorization: Factorization) -> np.ndarray:
    """mask[k] is True iff gcd(k, R) == 1 for 0 <= k < R."""
    size = radical(factorization)
    mask = np.ones(size, dtype=bool)
    for r in factorization.primes:
        mask[::r] = False
    return mask


def build_field(
    p: int,
    alpha: int,
    n: int,
    *,
    mem_budget: int = DEFAULT_MEM_BUDGET,
    cache: FieldCache | None = None,
) -> FieldCtx:
    if not is_prime(p) or alpha < 1 or n < 1:
        raise FieldError(f"invalid field parameters p={p}, alpha={alpha}, n={n}")
    q = p**alpha
    needed = table_bytes(q, n)
    if needed > mem_budget:
        raise MemoryBudgetError(
            f"F_{{{q}^{n}}} needs {needed} bytes of tables, budget is {mem_budget}"
        )
    if cache is not None:
        cached = cache.load(p, alpha, n)
        if cached is not None:
            return cached

    factorization = factor_q_power_minus_one(q, n)
    modulus = find_primitive_modulus(p, alpha * n, factorization)
    exp_table, log_table = build_tables(modulus, p)
    ctx = FieldCtx(
        p=p,
        alpha=alpha,
        n=n,
        modulus=modulus,
        factorization=factorization,
        exp_table=exp_table,
        log_table=log_table,
        prim_mask=primitive_mask(factorization),
    )
    logger.info("built F_{%d^%d} with modulus %s", q, n, modulus)
    if cache is not None:
        cache.save(ctx)
    return ctx
