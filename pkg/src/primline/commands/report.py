# ruff: noqa: B008
from __future__ import annotations

import csv
import io
import sys
from collections.abc import Iterable
from pathlib import Path

import typer
from pydantic import ValidationError

from ..arith import factor_q_power_minus_one, radical
from ..helpers import EXIT_USAGE, emit_lines, fail, print_table
from ..search import Status, Verdict

COLUMNS = [
    "range_lo",
    "range_hi",
    "n",
    "problem",
    "count",
    "member",
    "nonmember",
    "min_ms",
    "avg_ms",
    "max_ms",
    "work",
]


def read_verdicts(sources: Iterable[tuple[str, Iterable[str]]]) -> list[Verdict]:
    """Parse verdict lines, keeping the first verdict seen for each (q, n, problem)."""
    seen: dict[tuple[int, int, str], Verdict] = {}
    for name, lines in sources:
        for number, raw in enumerate(lines, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                verdict = Verdict.model_validate_json(line)
            except ValidationError as exc:
                raise ValueError(
                    f"{name}:{number}: not a verdict line ({exc.error_count()} errors)"
                ) from exc
            seen.setdefault((verdict.q, verdict.n, verdict.problem.value), verdict)
    return sorted(seen.values(), key=lambda v: (v.n, v.problem.value, v.q))


def work_figure(q: int, n: int) -> int:
    """q^2 * radical(q^n - 1), the per-q cost the scans scale with."""
    return q * q * radical(factor_q_power_minus_one(q, n))


def summarize(verdicts: list[Verdict], bucket: int) -> list[list[int | str]]:
    groups: dict[tuple[int, int, str], list[Verdict]] = {}
    for verdict in verdicts:
        lo = verdict.q // bucket * bucket
        groups.setdefault((lo, verdict.n, verdict.problem.value), []).append(verdict)
    rows: list[list[int | str]] = []
    ordered = sorted(groups.items(), key=lambda item: (item[0][1], item[0][2], item[0][0]))
    for (lo, n, problem), members in ordered:
        elapsed = [v.elapsed_ms for v in members]
        nonmember = sum(v.status is Status.NONMEMBER for v in members)
        rows.append(
            [
                lo,
                lo + bucket,
                n,
                problem,
                len(members),
                len(members) - nonmember,
                nonmember,
                min(elapsed),
                round(sum(elapsed) / len(elapsed)),
                max(elapsed),
                sum(work_figure(v.q, v.n) for v in members),
            ]
        )
    return rows


def to_csv(rows: list[list[int | str]]) -> list[str]:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COLUMNS)
    writer.writerows(rows)
    return buffer.getvalue().splitlines()


def register_report(app: typer.Typer) -> None:
    @app.command()
    def report(
        files: list[Path] = typer.Argument(
            None, help="Verdict JSON-lines files; stdin when omitted."
        ),
        bucket: int = typer.Option(100, "--bucket", min=1, help="Width of the q ranges."),
        out: Path | None = typer.Option(
            None, "--out", help="Write the CSV here instead of stdout."
        ),
    ) -> None:
        """Aggregate verdict streams into per-range tallies and timings as CSV."""
        sources: list[tuple[str, Iterable[str]]] = []
        for path in files or []:
            if not path.exists():
                fail(f"{path} does not exist", EXIT_USAGE)
            sources.append((str(path), path.read_text().splitlines()))
        if not files:
            sources.append(("<stdin>", sys.stdin.read().splitlines()))
        try:
            verdicts = read_verdicts(sources)
        except ValueError as exc:
            fail(str(exc), EXIT_USAGE)
        rows = summarize(verdicts, bucket)
        emit_lines(to_csv(rows), out)
        print_table(
            "Verdict summary",
            [(r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[8]) for r in rows],
            ["from", "to", "n", "problem", "count", "member", "nonmember", "avg ms"],
        )
