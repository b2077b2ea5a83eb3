"""Runs verification targets in order, in parallel over outer-index chunks, with checkpoints."""

from __future__ import annotations

import hashlib
import logging
import time
from collections.abc import Callable, Iterator
from concurrent.futures import Future, ProcessPoolExecutor
from pathlib import Path

from pydantic import BaseModel, Field

from .arith import prime_power
from .cache import FieldCache
from .checkpoint import Checkpoint, CheckpointError, CheckpointStore, TargetProgress
from .field import DEFAULT_MEM_BUDGET, FieldCtx, MemoryBudgetError, build_field, table_bytes
from .search import (
    DEFAULT_CHUNK_SIZE,
    DEFAULT_MAX_PAIRS,
    Algorithm,
    ChunkResult,
    ClassFamily,
    Problem,
    SearchStats,
    Verdict,
    build_verdict,
    chunk_bounds,
    default_algorithm,
    plan,
    scan_chunk,
    witness_for,
)

logger = logging.getLogger(__name__)

ChunkCallback = Callable[["Target", ChunkResult, SearchStats], None]


class Target(BaseModel):
    q: int
    n: int
    problem: Problem
    algorithm: Algorithm | None = None

    @property
    def resolved_algorithm(self) -> Algorithm:
        return self.algorithm or default_algorithm(self.problem, self.n)

    @property
    def key(self) -> tuple[int, int, str]:
        return self.q, self.n, self.problem.value


class CampaignConfig(BaseModel):
    targets: list[Target] = Field(default_factory=list)
    workers: int = Field(default=1, ge=1)
    chunk_size: int = Field(default=DEFAULT_CHUNK_SIZE, ge=1)
    checkpoint: Path | None = None
    checkpoint_every: int = Field(default=1, ge=1)
    mem_budget: int = DEFAULT_MEM_BUDGET
    fixture_sha: str = ""
    reorder_a: bool = False
    max_pairs: int = DEFAULT_MAX_PAIRS
    cache_dir: Path | None = None


def targets_digest(targets: list[Target]) -> str:
    joined = "\n".join(f"{t.q}:{t.n}:{t.problem}:{t.resolved_algorithm}" for t in targets)
    return hashlib.sha256(joined.encode()).hexdigest()


def check_budget(target: Target, mem_budget: int) -> None:
    needed = table_bytes(target.q, target.n)
    if needed > mem_budget:
        raise MemoryBudgetError(
            f"q={target.q}, n={target.n} needs {needed} bytes of tables, budget is {mem_budget}"
        )


def _field_for(target: Target, config: CampaignConfig) -> FieldCtx:
    pp = prime_power(target.q)
    if pp is None:
        raise ValueError(f"{target.q} is not a prime power")
    cache = FieldCache(config.cache_dir) if config.cache_dir else None
    return build_field(pp.p, pp.alpha, target.n, mem_budget=config.mem_budget, cache=cache)


def _family_for(ctx: FieldCtx, target: Target, config: CampaignConfig) -> ClassFamily:
    return plan(
        ctx,
        target.problem,
        target.resolved_algorithm,
        reorder_a=config.reorder_a,
        max_pairs=config.max_pairs,
    )


# Per-process cache so each worker builds a field and its class family once.
_WORKER_STATE: dict[tuple[int, int, str, str], tuple[FieldCtx, ClassFamily]] = {}


def _scan_in_worker(target: Target, config: CampaignConfig, start: int, stop: int) -> ChunkResult:
    key = (*target.key, target.resolved_algorithm.value)
    if key not in _WORKER_STATE:
        _WORKER_STATE.clear()
        ctx = _field_for(target, config)
        _WORKER_STATE[key] = (ctx, _family_for(ctx, target, config))
    ctx, family = _WORKER_STATE[key]
    return scan_chunk(ctx, family, start, stop)


class _Progress:
    """Checkpoint bookkeeping owned by the collecting process."""

    def __init__(self, config: CampaignConfig) -> None:
        self.config = config
        self.store = CheckpointStore(config.checkpoint) if config.checkpoint else None
        self.targets_sha = targets_digest(config.targets)
        self.state = Checkpoint(fixture_sha=config.fixture_sha, targets_sha=self.targets_sha)
        self.unsaved = 0

    def resume(self) -> Checkpoint:
        if self.store is None:
            return self.state
        loaded = self.store.load()
        if loaded is not None:
            loaded.check_inputs(self.config.fixture_sha, self.targets_sha)
            logger.info(
                "resuming from %s: %d targets done", self.store.path, len(loaded.completed)
            )
            self.state = loaded
        return self.state

    def advance(self, current: TargetProgress) -> None:
        self.state.current = current
        self.unsaved += 1
        if self.unsaved >= self.config.checkpoint_every:
            self.flush()

    def complete(self, verdict: Verdict) -> None:
        self.state.completed.append(verdict)
        self.state.current = None
        self.flush()

    def flush(self) -> None:
        self.unsaved = 0
        if self.store is not None:
            self.store.save(self.state)


def _sequential_chunks(
    ctx: FieldCtx, family: ClassFamily, chunk_size: int, start: int
) -> Iterator[ChunkResult]:
    for lo, hi in chunk_bounds(family, chunk_size, start):
        yield scan_chunk(ctx, family, lo, hi)


def _parallel_chunks(
    pool: ProcessPoolExecutor,
    target: Target,
    config: CampaignConfig,
    family: ClassFamily,
    start: int,
) -> Iterator[ChunkResult]:
    """Chunk results in index order; a bounded window of chunks is in flight at once."""
    bounds = chunk_bounds(family, config.chunk_size, start)
    window: list[Future[ChunkResult]] = []
    limit = config.workers * 2
    try:
        while True:
            while len(window) < limit:
                nxt = next(bounds, None)
                if nxt is None:
                    break
                window.append(pool.submit(_scan_in_worker, target, config, *nxt))
            if not window:
                return
            yield window.pop(0).result()
    finally:
        for future in window:
            future.cancel()


def _run_target(
    target: Target,
    config: CampaignConfig,
    progress: _Progress,
    pool: ProcessPoolExecutor | None,
    on_chunk: ChunkCallback | None,
) -> Verdict:
    algorithm = target.resolved_algorithm
    ctx = _field_for(target, config)
    family = _family_for(ctx, target, config)
    current = progress.state.current
    if current is not None and (current.q, current.n, current.problem, current.algorithm) == (
        target.q,
        target.n,
        target.problem,
        algorithm,
    ):
        start, stats, prior_ms = current.next_k, current.stats.model_copy(), current.elapsed_ms
        logger.info(
            "q=%d n=%d %s: resuming at outer index %d", target.q, target.n, target.problem, start
        )
    else:
        start, stats, prior_ms = 0, SearchStats(algorithm=algorithm), 0

    began = time.perf_counter()
    chunks = (
        _parallel_chunks(pool, target, config, family, start)
        if pool is not None
        else _sequential_chunks(ctx, family, config.chunk_size, start)
    )
    witness = None
    for result in chunks:
        stats.absorb(result)
        if result.bad is not None:
            witness = witness_for(ctx, family, *result.bad)
            break
        elapsed = prior_ms + int((time.perf_counter() - began) * 1000)
        progress.advance(
            TargetProgress(
                q=target.q,
                n=target.n,
                problem=target.problem,
                algorithm=algorithm,
                next_k=result.stop,
                stats=stats.model_copy(),
                elapsed_ms=elapsed,
            )
        )
        if on_chunk is not None:
            on_chunk(target, result, stats)
    verdict = build_verdict(ctx, target.problem, stats, witness, began)
    verdict.elapsed_ms += prior_ms
    return verdict


def run_campaign(
    config: CampaignConfig, *, on_chunk: ChunkCallback | None = None
) -> Iterator[Verdict]:
    """Yield one verdict per target, in target order, resuming from the checkpoint if present."""
    for target in config.targets:
        check_budget(target, config.mem_budget)
    progress = _Progress(config)
    state = progress.resume()
    done = {(v.q, v.n, v.problem.value): v for v in state.completed}
    if len(done) > len(config.targets):
        raise CheckpointError("checkpoint holds more verdicts than there are targets")

    pool = ProcessPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    try:
        for target in config.targets:
            if target.key in done:
                yield done[target.key]
                continue
            verdict = _run_target(target, config, progress, pool, on_chunk)
            progress.complete(verdict)
            yield verdict
    finally:
        if pool is not None:
            pool.shutdown(wait=True, cancel_futures=True)
