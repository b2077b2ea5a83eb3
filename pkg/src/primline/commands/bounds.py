# ruff: noqa: B008
from __future__ import annotations

import json
from collections.abc import Iterator
from pathlib import Path

import typer

from ..arith import prime_power
from ..charsum import (
    CapExceededError,
    sample_pairs,
    tu_decomposition,
    verify_cubic_bound,
    verify_katz,
    verify_sieve_inequalities,
)
from ..field import FieldCtx, build_field
from ..helpers import EXIT_FAILURE, EXIT_USAGE, emit_lines, fail, load_settings, print_table
from ..sieve import enumerate_partitions


def _sieve_reports(
    ctx: FieldCtx, pairs: list[tuple[int, int]], t_max: int, r_max: int
) -> Iterator[dict[str, object]]:
    """One aggregate record per enumerated partition over all sampled pairs."""
    for partition in enumerate_partitions(ctx.q, ctx.n, ctx.factorization, t_max, r_max):
        failures = []
        for beta, gamma in pairs:
            report = verify_sieve_inequalities(ctx, beta, gamma, partition)
            if not report.passed:
                failures.append({"beta": beta, "gamma": gamma, "relations": report.relations})
        yield {
            "q": ctx.q,
            "n": ctx.n,
            "check_name": "sieve_inequalities",
            "partition": partition.to_json(),
            "pairs": len(pairs),
            "failures": failures,
            "passed": not failures,
        }


def register_bounds(app: typer.Typer) -> None:
    @app.command()
    def bounds(  # noqa: PLR0913
        q: int = typer.Option(..., "--q", help="Prime power to check."),
        degree: int = typer.Option(3, "--degree", min=3, max=4, help="Extension degree n."),
        max_order: int | None = typer.Option(
            None, "--max-order", min=1, help="Largest q^n checked."
        ),
        samples: int | None = typer.Option(
            None, "--samples", min=1, help="Sampled (beta, gamma) pairs."
        ),
        seed: int | None = typer.Option(None, "--seed", help="Seed for sampled pairs."),
        t_max: int | None = typer.Option(None, "--t-max", min=1, help="Core primes in partitions."),
        r_max: int | None = typer.Option(
            None, "--r-max", min=0, help="Special primes in partitions."
        ),
        out: Path | None = typer.Option(None, "--out", help="Write JSON reports here."),
    ) -> None:
        """Check character-sum bounds and sieve inequalities exhaustively on one small field."""
        settings = load_settings(
            bounds_max_order=max_order, sample_pairs=samples, seed=seed, t_max=t_max, r_max=r_max
        )
        pp = prime_power(q)
        if pp is None:
            fail(f"{q} is not a prime power", EXIT_USAGE)
        if q**degree > settings.bounds_max_order:
            fail(
                f"q^n = {q**degree} exceeds the exhaustive cap {settings.bounds_max_order}",
                EXIT_USAGE,
            )
        ctx = build_field(pp.p, pp.alpha, degree)
        records: list[dict[str, object]] = []
        try:
            records.append(verify_katz(ctx, settings.bounds_max_order).model_dump())
            if degree == 3:  # noqa: PLR2004
                cubic = verify_cubic_bound(
                    ctx, seed=settings.seed, max_order=settings.bounds_max_order
                )
                records.append(cubic.model_dump())
                records.append(tu_decomposition(ctx, 1).model_dump())
        except CapExceededError as exc:
            fail(str(exc), EXIT_USAGE)
        pairs = sample_pairs(ctx, settings.sample_pairs, settings.seed)
        records.extend(_sieve_reports(ctx, pairs, settings.t_max, settings.r_max))

        emit_lines((json.dumps(r) for r in records), out)
        rows = []
        for record in records:
            detail = record.get("max_ratio", "")
            if record["check_name"] == "tu_decomposition":
                detail = f"T={record['t_distinct']} U={record['u_size']}"
            elif record["check_name"] == "sieve_inequalities":
                detail = f"{record['pairs']} pairs"
            rows.append((record["check_name"], detail, "yes" if record["passed"] else "no"))
        print_table(f"Bounds for q={q}, n={degree}", rows, ["check", "detail", "passed"])
        if not all(record["passed"] for record in records):
            raise typer.Exit(code=EXIT_FAILURE)
