# ruff: noqa: B008
from __future__ import annotations

from collections.abc import Iterator
from pathlib import Path

import typer

from ..arith import prime_power
from ..cache import FieldCache
from ..campaign import CampaignConfig, Target, check_budget, run_campaign
from ..charsum import CapExceededError
from ..checkpoint import CheckpointError
from ..field import FieldCtx, MemoryBudgetError, build_field
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
    resolve_qs,
)
from ..search import (
    Algorithm,
    ChunkResult,
    Problem,
    SearchStats,
    Verdict,
    WitnessError,
    verify_witness,
)

_LINE_ALGORITHMS = {
    3: {Algorithm.ALG1, Algorithm.ALG2, Algorithm.BRUTE},
    4: {Algorithm.QUARTIC, Algorithm.BRUTE},
}


def _check_algorithm(problem: Problem, degree: int, algorithm: Algorithm | None) -> None:
    if algorithm is None:
        return
    allowed = {Algorithm.TRANSLATE} if problem is Problem.TRANSLATE else _LINE_ALGORITHMS[degree]
    if algorithm not in allowed:
        names = ", ".join(sorted(a.value for a in allowed))
        raise typer.BadParameter(
            f"{problem} with degree {degree} accepts --algorithm in {{{names}}}"
        )


def register_verify(app: typer.Typer) -> None:  # noqa: PLR0915
    @app.command()
    def verify(  # noqa: PLR0913
        q: list[int] = typer.Option([], "--q", help="Prime power to decide (repeatable)."),
        range_text: str | None = typer.Option(None, "--range", help="Inclusive range A..B of q."),
        degree: int = typer.Option(3, "--degree", min=3, max=4, help="Extension degree n."),
        problem: Problem = typer.Option(Problem.LINE, "--problem", help="line or translate."),
        algorithm: Algorithm | None = typer.Option(None, "--algorithm", help="Decider to use."),
        workers: int | None = typer.Option(None, "--workers", min=1, help="Worker processes."),
        chunk_size: int | None = typer.Option(
            None, "--chunk-size", min=1, help="Outer indices per work unit."
        ),
        checkpoint: Path | None = typer.Option(
            None, "--checkpoint", help="Checkpoint file to resume from."
        ),
        out: Path | None = typer.Option(None, "--out", help="Write verdict JSON lines here."),
        mem_budget: int | None = typer.Option(
            None, "--mem-budget", min=1, help="Table bytes per field."
        ),
        fixtures: Path | None = typer.Option(None, "--fixtures", help="Fixture directory."),
        reorder_a: bool | None = typer.Option(
            None, "--reorder-a/--no-reorder-a", help="Reorder shifts per class."
        ),
    ) -> None:
        """Decide membership of each q in the line or translate set, one JSON verdict per line."""
        qs = resolve_qs(q, range_text)
        _check_algorithm(problem, degree, algorithm)
        settings = load_settings(
            workers=workers,
            chunk_size=chunk_size,
            mem_budget=mem_budget,
            fixtures_dir=fixtures,
            reorder_a=reorder_a,
        )
        fixture_set = load_fixtures(settings)

        targets: list[Target] = []
        skipped: list[int] = []
        for value in qs:
            target = Target(q=value, n=degree, problem=problem, algorithm=algorithm)
            try:
                check_budget(target, settings.mem_budget)
            except MemoryBudgetError as exc:
                console.print(f"[red]Skipping q={value}:[/red] {exc}")
                skipped.append(value)
                continue
            targets.append(target)

        config = CampaignConfig(
            targets=targets,
            workers=settings.workers,
            chunk_size=settings.chunk_size,
            checkpoint=checkpoint,
            checkpoint_every=settings.checkpoint_every,
            mem_budget=settings.mem_budget,
            fixture_sha=fixture_set.digest(),
            reorder_a=settings.reorder_a,
            max_pairs=settings.brute_force_max_pairs,
            cache_dir=settings.cache_dir,
        )
        cache = FieldCache(settings.cache_dir) if settings.cache_dir else None
        verdicts: list[Verdict] = []

        def _field(verdict: Verdict) -> FieldCtx:
            pp = prime_power(verdict.q)
            assert pp is not None
            return build_field(
                pp.p, pp.alpha, verdict.n, mem_budget=settings.mem_budget, cache=cache
            )

        def _lines() -> Iterator[str]:
            with make_progress() as progress:
                tasks: dict[tuple[int, int, str], int] = {}

                def _advance(target: Target, chunk: ChunkResult, stats: SearchStats) -> None:
                    if target.key not in tasks:
                        label = f"[cyan]q={target.q}[/cyan]"
                        tasks[target.key] = progress.add_task(label, total=None)
                    progress.update(tasks[target.key], completed=chunk.stop)

                for verdict in run_campaign(config, on_chunk=_advance):
                    if verdict.witness is not None:
                        try:
                            verify_witness(_field(verdict), verdict.problem, verdict.witness)
                        except WitnessError as exc:
                            fail(f"Witness for q={verdict.q} failed re-verification: {exc}")
                    verdicts.append(verdict)
                    yield verdict.model_dump_json()

        try:
            emit_lines(_lines(), out)
        except CheckpointError as exc:
            fail(f"Checkpoint rejected: {exc}", EXIT_USAGE)
        except CapExceededError as exc:
            fail(str(exc), EXIT_USAGE)

        rows = [(v.q, v.n, v.problem.value, v.status.value, v.elapsed_ms) for v in verdicts]
        print_table("Verdicts", rows, ["q", "n", "problem", "status", "ms"])
        if skipped:
            console.print(f"[red]Not decided (memory budget):[/red] {', '.join(map(str, skipped))}")
            raise typer.Exit(code=EXIT_FAILURE)
