# ruff: noqa: B008
from __future__ import annotations

import typer

from .commands.bounds import register_bounds
from .commands.report import register_report
from .commands.sieve import register_sieve
from .commands.verify import register_verify
from .helpers import load_settings, setup_logging

app = typer.Typer(
    help="Primitive elements on lines in cubic and quartic extensions of finite fields."
)
register_sieve(app)
register_verify(app)
register_bounds(app)
register_report(app)


@app.callback()
def main(
    log_level: str | None = typer.Option(None, "--log-level", help="Library log level on stderr."),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Shortcut for --log-level DEBUG."),
) -> None:
    """Reproduce the sieve exception lists and decide small q exhaustively."""
    settings = load_settings(log_level=log_level)
    setup_logging("DEBUG" if verbose or settings.debug else settings.log_level)
