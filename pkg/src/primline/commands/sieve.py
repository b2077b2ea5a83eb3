# ruff: noqa: B008
from __future__ import annotations

import json
from pathlib import Path

import typer

from ..arith import FactorizationError, prime_power
from ..helpers import (
    EXIT_FAILURE,
    EXIT_USAGE,
    console,
    emit_lines,
    fail,
    load_fixtures,
    load_settings,
    make_progress,
    print_table,
)
from ..sieve import PipelineResult, best_partition, cubic_pipeline, quartic_pipeline


def _records(result: PipelineResult, candidates: list[int], n: int) -> list[str]:
    lines = []
    for q in candidates:
        partition = result.eliminations.get(q)
        record = {
            "q": q,
            "n": n,
            "passed": partition is not None,
            "partition": partition.to_json() if partition else None,
        }
        lines.append(json.dumps(record))
    return lines


def _report_diff(label: str, produced: list[int], expected: list[int]) -> bool:
    extra = sorted(set(produced) - set(expected))
    missing = sorted(set(expected) - set(produced))
    rows = [
        ("survivors", str(len(produced))),
        (f"{label} fixture", str(len(expected))),
        ("unexpected", ", ".join(map(str, extra)) or "-"),
        ("missing", ", ".join(map(str, missing)) or "-"),
    ]
    print_table(f"Diff against {label}", rows, ["", "value"])
    return not extra and not missing


def register_sieve(app: typer.Typer) -> None:  # noqa: PLR0915
    sieve_app = typer.Typer(help="Regenerate exception lists with the sieve criteria.")
    app.add_typer(sieve_app, name="sieve")

    @sieve_app.command("cubic-refine")
    def cubic_refine(
        r_max: int | None = typer.Option(
            None, "--r-max", min=0, help="Special primes tried per variant."
        ),
        fixtures: Path | None = typer.Option(None, "--fixtures", help="Fixture directory."),
        out: Path | None = typer.Option(
            None, "--out", help="Write JSON lines here instead of stdout."
        ),
    ) -> None:
        """Apply the k=2 and k=6 refinements to the 146-value list and diff against the 82."""
        settings = load_settings(cubic_r_max=r_max, fixtures_dir=fixtures)
        fixture_set = load_fixtures(settings)
        candidates = fixture_set.cubic_146
        try:
            result = cubic_pipeline(candidates, r_max=settings.cubic_r_max)
        except FactorizationError as exc:
            fail(f"Factorization failed: {exc}")
        emit_lines(_records(result, candidates, 3), out)
        print_table("Cubic refinement", list(result.stages.items()), ["stage", "remaining"])
        if not _report_diff("82-value", result.survivors, fixture_set.cubic_82):
            raise typer.Exit(code=EXIT_FAILURE)

    @sieve_app.command("quartic")
    def quartic(  # noqa: PLR0913
        max_omega: int | None = typer.Option(None, "--max-omega", min=1, help="Prime-count bound."),
        t_max: int | None = typer.Option(None, "--t-max", min=1, help="Core primes tried."),
        r_max: int | None = typer.Option(
            None, "--r-max", min=0, help="Special primes in the second pass."
        ),
        workers: int | None = typer.Option(None, "--workers", min=1, help="Worker processes."),
        fixtures: Path | None = typer.Option(None, "--fixtures", help="Fixture directory."),
        out: Path | None = typer.Option(
            None, "--out", help="Write JSON lines here instead of stdout."
        ),
    ) -> None:
        """Scan every prime power up to the quartic cutoff and diff the survivors against E_4."""
        settings = load_settings(
            max_omega=max_omega,
            quartic_t_max=t_max,
            quartic_r_max=r_max,
            workers=workers,
            fixtures_dir=fixtures,
        )
        fixture_set = load_fixtures(settings)
        with make_progress() as progress:
            task = progress.add_task("[cyan]quartic scan[/cyan]", total=None)

            def _advance(done: int, total: int) -> None:
                progress.update(task, completed=done, total=total)

            try:
                result = quartic_pipeline(
                    max_omega=settings.max_omega,
                    t_max=settings.quartic_t_max,
                    r_max=settings.quartic_r_max,
                    workers=settings.workers,
                    progress=_advance,
                )
            except FactorizationError as exc:
                fail(f"Factorization failed: {exc}")
        reported = sorted({*result.survivors, *result.eliminations})
        emit_lines(_records(result, reported, 4), out)
        print_table("Quartic scan", list(result.stages.items()), ["stage", "value"])
        if not _report_diff("E_4", result.survivors, fixture_set.e4):
            raise typer.Exit(code=EXIT_FAILURE)

    @sieve_app.command("lemma1")
    def lemma1(
        q: int = typer.Option(..., "--q", help="Prime power to test."),
        degree: int = typer.Option(3, "--degree", min=3, max=4, help="Extension degree."),
        t_max: int | None = typer.Option(None, "--t-max", min=1, help="Core primes tried."),
        r_max: int | None = typer.Option(None, "--r-max", min=0, help="Special primes tried."),
    ) -> None:
        """Print the first partition for which the basic criterion eliminates q."""
        if prime_power(q) is None:
            fail(f"{q} is not a prime power", EXIT_USAGE)
        settings = load_settings(t_max=t_max, r_max=r_max)
        try:
            partition = best_partition(q, degree, settings.t_max, settings.r_max)
        except FactorizationError as exc:
            fail(f"Factorization failed: {exc}")
        record = {
            "q": q,
            "n": degree,
            "passed": partition is not None,
            "partition": partition.to_json() if partition else None,
        }
        typer.echo(json.dumps(record))
        if partition is None:
            console.print(
                f"q={q} is not eliminated with t <= {settings.t_max}, r <= {settings.r_max}"
            )

    @sieve_app.command("sets")
    def sets(
        fixtures: Path | None = typer.Option(None, "--fixtures", help="Fixture directory."),
    ) -> None:
        """Show the fixture lists and the sets derived from E_4."""
        fixture_set = load_fixtures(load_settings(fixtures_dir=fixtures))
        named = {
            "cubic_146": fixture_set.cubic_146,
            "cubic_82": fixture_set.cubic_82,
            "line3_exceptions": fixture_set.line3_exceptions,
            "e4": fixture_set.e4,
            "e_line": fixture_set.e_line,
            "e_translate": fixture_set.e_translate,
            "g_line": fixture_set.quartic_line_exceptions,
            "g_translate": fixture_set.quartic_translate_exceptions,
        }
        for name, values in named.items():
            typer.echo(json.dumps({"set": name, "size": len(values), "max": max(values)}))
        rows = [(name, len(values), max(values)) for name, values in named.items()]
        print_table("Fixture sets", rows, ["set", "size", "max"])
