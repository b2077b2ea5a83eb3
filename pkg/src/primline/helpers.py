from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any, NoReturn

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.progress import BarColumn, Progress, TaskProgressColumn, TextColumn, TimeRemainingColumn
from rich.table import Table

from .arith import prime_power, prime_powers_between
from .config import Settings
from .fixtures import FixtureError, FixtureSet

# Machine output (JSON lines, CSV) goes to stdout; everything human-facing to stderr.
console = Console(stderr=True)

EXIT_FAILURE = 1
EXIT_USAGE = 2


def fail(message: str, code: int = EXIT_FAILURE) -> NoReturn:
    console.print(f"[red]{message}[/red]")
    raise typer.Exit(code=code)


def setup_logging(level: str) -> None:
    package = logging.getLogger("primline")
    package.setLevel(level.upper())
    for handler in list(package.handlers):
        package.removeHandler(handler)
    package.addHandler(RichHandler(console=console, show_path=False, rich_tracebacks=True))


def load_settings(**overrides: Any) -> Settings:
    """Settings from env/.env with CLI flags (non-None values) layered on top."""
    settings = Settings()
    update = {key: value for key, value in overrides.items() if value is not None}
    return settings.model_copy(update=update) if update else settings


def load_fixtures(settings: Settings) -> FixtureSet:
    fixtures = FixtureSet(settings.fixtures_dir)
    try:
        fixtures.digest()
    except FixtureError as exc:
        fail(str(exc), EXIT_USAGE)
    return fixtures


def parse_range(text: str) -> tuple[int, int]:
    """Parse ``A..B`` into an inclusive pair."""
    lo_text, sep, hi_text = text.partition("..")
    try:
        lo, hi = int(lo_text), int(hi_text)
    except ValueError:
        lo = hi = -1
    if not sep or lo < 2 or hi < lo:  # noqa: PLR2004
        raise typer.BadParameter(f"expected A..B with 2 <= A <= B, got {text!r}")
    return lo, hi


def resolve_qs(qs: Sequence[int], range_text: str | None) -> list[int]:
    """Prime powers named by --q and --range, ascending and without duplicates."""
    chosen: set[int] = set()
    for q in qs:
        if prime_power(q) is None:
            raise typer.BadParameter(f"{q} is not a prime power")
        chosen.add(q)
    if range_text:
        lo, hi = parse_range(range_text)
        chosen.update(pp.q for pp in prime_powers_between(lo, hi))
    if not chosen:
        raise typer.BadParameter("give at least one --q or a --range")
    return sorted(chosen)


def print_table(
    title: str, rows: Sequence[Sequence[Any]], headers: Sequence[str], *, show_lines: bool = False
) -> None:
    table = Table(title=title, show_lines=show_lines)
    for h in headers:
        table.add_column(h)
    for row in rows:
        table.add_row(*[str(x) for x in row])
    console.print(table)


def emit_lines(lines: Iterable[str], out: Path | None) -> None:
    """Write one record per line to ``out`` or stdout."""
    if out is None:
        for line in lines:
            typer.echo(line)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w") as handle:
        for line in lines:
            handle.write(line + "\n")


def make_progress() -> Progress:
    return Progress(
        TextColumn("{task.description}"),
        BarColumn(),
        TaskProgressColumn(),
        TimeRemainingColumn(),
        console=console,
        transient=True,
    )
