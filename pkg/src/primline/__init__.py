"""Primitive-element verification engine and its command-line interface."""

from .arith import Factorization, factorize, is_prime, prime_powers_between
from .campaign import CampaignConfig, Target, run_campaign
from .cli import app
from .config import Settings
from .field import FieldCtx, build_field
from .fixtures import FixtureSet
from .search import (
    Problem,
    Status,
    Verdict,
    brute_force_line,
    check_line_alg1,
    check_line_alg2,
    check_line_quartic,
    check_translate,
    find_bad_pair,
)
from .sieve import best_partition, cubic_pipeline, lemma1_criterion, quartic_pipeline

__all__ = [
    "app",
    "Settings",
    "Factorization",
    "factorize",
    "is_prime",
    "prime_powers_between",
    "FieldCtx",
    "build_field",
    "FixtureSet",
    "Problem",
    "Status",
    "Verdict",
    "check_line_alg1",
    "check_line_alg2",
    "check_line_quartic",
    "check_translate",
    "brute_force_line",
    "find_bad_pair",
    "CampaignConfig",
    "Target",
    "run_campaign",
    "best_partition",
    "lemma1_criterion",
    "cubic_pipeline",
    "quartic_pipeline",
]
