from __future__ import annotations

from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):  # type: ignore[misc]
    """CLI configuration loaded from environment or .env."""

    workers: int = Field(
        default=1, ge=1, description="Worker processes for verification campaigns."
    )
    chunk_size: int = Field(
        default=65536, ge=1, description="Outer indices per work unit (one checkpoint step)."
    )
    checkpoint_every: int = Field(
        default=1, ge=1, description="Write the checkpoint after this many finished work units."
    )
    t_max: int = Field(default=4, ge=1, description="Largest number of core primes in a partition.")
    r_max: int = Field(
        default=6, ge=0, description="Largest number of special primes in a partition."
    )
    cubic_r_max: int = Field(
        default=2, ge=0, description="Special primes tried by the cubic k=2/k=6 refinement."
    )
    quartic_t_max: int = Field(
        default=4, ge=1, description="Core primes tried by the quartic scan."
    )
    quartic_r_max: int = Field(
        default=4, ge=0, description="Special primes tried by the quartic second pass."
    )
    max_omega: int = Field(
        default=14, ge=1, description="Prime-factor count above which q^4-1 is not sieved."
    )
    mem_budget: int = Field(
        default=2**28 * 8, ge=1, description="Bytes allowed for the exp/log tables of one field."
    )
    bounds_max_order: int = Field(
        default=4096, ge=1, description="Largest field order for exhaustive character-sum checks."
    )
    brute_force_max_pairs: int = Field(
        default=1_000_000,
        ge=1,
        description="Largest (beta, gamma) pair count for the brute-force oracle.",
    )
    sample_pairs: int = Field(
        default=24, ge=1, description="Random (beta, gamma) pairs for the sieve inequality check."
    )
    seed: int = Field(default=20190101, description="Seed for sampled pairs.")
    fixtures_dir: Path | None = Field(
        default=None, description="Directory holding fixture lists (defaults to the packaged data)."
    )
    cache_dir: Path | None = Field(
        default=None, description="Directory for cached field tables; unset disables the cache."
    )
    reorder_a: bool = Field(
        default=False, description="Try the most successful shifts first within each class."
    )
    log_level: str = Field(
        default="WARNING", description="Log level for library messages on stderr."
    )
    debug: bool = Field(
        default=False, description="Enable verbose error output (set via PRIMLINE_DEBUG=1)."
    )

    model_config = SettingsConfigDict(env_prefix="PRIMLINE_", env_file=".env", extra="ignore")
