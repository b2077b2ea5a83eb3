from __future__ import annotations

import logging
from contextlib import suppress
from pathlib import Path

import numpy as np

from .arith import factor_q_power_minus_one
from .field import (
    FieldCtx,
    FieldError,
    build_tables,
    primitive_mask,
    root_is_primitive,
    steps_by_root,
)

logger = logging.getLogger(__name__)


class CacheError(RuntimeError):
    """Raised when a cached field table fails its integrity check."""


class FieldCache:
    """Stores (modulus, exp_table) per (p, alpha, n) as compressed numpy archives."""

    def __init__(self, directory: Path) -> None:
        self.directory = directory

    def path_for(self, p: int, alpha: int, n: int) -> Path:
        return self.directory / f"field-{p}-{alpha}-{n}.npz"

    def load(self, p: int, alpha: int, n: int) -> FieldCtx | None:
        path = self.path_for(p, alpha, n)
        if not path.exists():
            return None
        with np.load(path) as archive:
            header = [int(v) for v in archive["header"]]
            modulus = tuple(int(c) for c in archive["modulus"])
            exp_table = archive["exp_table"].astype(np.int32)
        q = p**alpha
        if header != [p, alpha, n, q**n]:
            raise CacheError(f"{path}: header {header} does not describe F_{{{q}^{n}}}")
        factorization = factor_q_power_minus_one(q, n)
        if not root_is_primitive(modulus, p, factorization):
            raise CacheError(f"{path}: cached modulus {modulus} does not give a primitive root")
        omega = p if len(modulus) > 2 else (-modulus[0]) % p  # noqa: PLR2004
        if exp_table.shape != (q**n - 1,) or int(exp_table[0]) != 1:
            raise CacheError(f"{path}: exp table has the wrong shape or does not start at 1")
        if exp_table.size > 1 and int(exp_table[1]) != omega:
            raise CacheError(f"{path}: exp table does not step by omega")
        if not steps_by_root(modulus, p, exp_table):
            raise CacheError(f"{path}: exp table breaks exp[k + 1] = x * exp[k]")
        try:
            exp_table, log_table = build_tables(modulus, p, exp_table)
        except FieldError as exc:
            raise CacheError(f"{path}: {exc}") from exc
        logger.info("loaded F_{%d^%d} from %s", q, n, path)
        return FieldCtx(
            p=p,
            alpha=alpha,
            n=n,
            modulus=modulus,
            factorization=factorization,
            exp_table=exp_table,
            log_table=log_table,
            prim_mask=primitive_mask(factorization),
        )

    def save(self, ctx: FieldCtx) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path_for(ctx.p, ctx.alpha, ctx.n)
        np.savez_compressed(
            path,
            header=np.array([ctx.p, ctx.alpha, ctx.n, ctx.order], dtype=np.int64),
            modulus=np.array(ctx.modulus, dtype=np.int64),
            exp_table=ctx.exp_table,
        )

    def delete(self, p: int, alpha: int, n: int) -> None:
        with suppress(FileNotFoundError):
            self.path_for(p, alpha, n).unlink()
