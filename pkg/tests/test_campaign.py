from pathlib import Path

import pytest

from primline.campaign import CampaignConfig, Target, check_budget, run_campaign, targets_digest
from primline.checkpoint import CheckpointError, CheckpointStore
from primline.field import MemoryBudgetError
from primline.fixtures import FixtureSet
from primline.search import Algorithm, Problem, Status


class Interrupted(Exception):
    pass


def _targets(qs, n=3, problem=Problem.LINE):
    return [Target(q=q, n=n, problem=problem) for q in qs]


def _canonical(verdicts):
    return [v.canonical() for v in verdicts]


def _kill_after(chunks: int):
    seen = []

    def callback(target, result, stats):
        seen.append(result.stop)
        if len(seen) >= chunks:
            raise Interrupted

    return callback


def test_empty_campaign_yields_nothing():
    assert list(run_campaign(CampaignConfig())) == []


def test_target_defaults():
    assert Target(q=5, n=3, problem=Problem.LINE).resolved_algorithm is Algorithm.ALG2
    assert Target(q=5, n=4, problem=Problem.LINE).resolved_algorithm is Algorithm.QUARTIC
    assert Target(q=5, n=4, problem=Problem.TRANSLATE).resolved_algorithm is Algorithm.TRANSLATE
    assert Target(q=5, n=3, problem=Problem.LINE).key == (5, 3, "line")


def test_targets_digest_depends_on_order_and_algorithm():
    forward = _targets([3, 4])
    assert targets_digest(forward) == targets_digest(_targets([3, 4]))
    assert targets_digest(forward) != targets_digest(_targets([4, 3]))
    with_alg = [Target(q=3, n=3, problem=Problem.LINE, algorithm=Algorithm.ALG1)] + forward[1:]
    assert targets_digest(forward) != targets_digest(with_alg)


def test_cubic_exceptions_sequential():
    exceptions = set(FixtureSet().line3_exceptions)
    qs = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16]
    verdicts = list(run_campaign(CampaignConfig(targets=_targets(qs), chunk_size=64)))
    assert [v.q for v in verdicts] == qs
    for verdict in verdicts:
        expected = Status.NONMEMBER if verdict.q in exceptions else Status.MEMBER
        assert verdict.status is expected


@pytest.mark.parametrize("workers", [4, 8])
def test_worker_count_does_not_change_verdicts(workers):
    targets = _targets([2, 3, 4, 5, 7, 9, 11, 13, 16, 31, 37])
    sequential = list(run_campaign(CampaignConfig(targets=targets, chunk_size=64)))
    parallel = list(run_campaign(CampaignConfig(targets=targets, chunk_size=64, workers=workers)))
    assert _canonical(parallel) == _canonical(sequential)


def test_mixed_problems_in_one_campaign():
    targets = [
        Target(q=3, n=4, problem=Problem.TRANSLATE),
        Target(q=2, n=4, problem=Problem.TRANSLATE),
        Target(q=2, n=4, problem=Problem.LINE),
    ]
    statuses = [v.status for v in run_campaign(CampaignConfig(targets=targets, workers=2))]
    assert statuses == [Status.NONMEMBER, Status.MEMBER, Status.NONMEMBER]


def test_kill_and_resume_matches_uninterrupted(tmp_path: Path):
    targets = _targets([16])
    baseline = list(run_campaign(CampaignConfig(targets=targets, chunk_size=128)))

    config = CampaignConfig(targets=targets, chunk_size=128, checkpoint=tmp_path / "run.json")
    with pytest.raises(Interrupted):
        list(run_campaign(config, on_chunk=_kill_after(3)))
    saved = CheckpointStore(config.checkpoint).load()
    assert saved is not None
    assert saved.current is not None
    assert saved.current.next_k == 3 * 128

    resumed = list(run_campaign(config))
    assert _canonical(resumed) == _canonical(baseline)
    assert resumed[0].stats.outer_indices == 1365
    assert resumed[0].stats.chunks == 11


def test_resume_replays_completed_targets(tmp_path: Path):
    targets = _targets([13, 16])
    baseline = list(run_campaign(CampaignConfig(targets=targets, chunk_size=64)))

    config = CampaignConfig(targets=targets, chunk_size=64, checkpoint=tmp_path / "run.json")
    calls = []

    def kill_in_second_target(target, result, stats):
        calls.append(target.q)
        if target.q == 16 and calls.count(16) == 2:
            raise Interrupted

    emitted = []
    with pytest.raises(Interrupted):
        for verdict in run_campaign(config, on_chunk=kill_in_second_target):
            emitted.append(verdict)
    assert [v.q for v in emitted] == [13]

    saved = CheckpointStore(config.checkpoint).load()
    assert saved is not None
    assert [v.q for v in saved.completed] == [13]

    resumed = list(run_campaign(config))
    assert _canonical(resumed) == _canonical(baseline)


def test_parallel_resume_matches_uninterrupted(tmp_path: Path):
    targets = _targets([16])
    baseline = list(run_campaign(CampaignConfig(targets=targets, chunk_size=100)))
    config = CampaignConfig(
        targets=targets, chunk_size=100, workers=3, checkpoint=tmp_path / "run.json"
    )
    with pytest.raises(Interrupted):
        list(run_campaign(config, on_chunk=_kill_after(5)))
    resumed = list(run_campaign(config))
    assert _canonical(resumed) == _canonical(baseline)


@pytest.mark.slow
def test_kill_and_resume_q103(tmp_path: Path):
    targets = _targets([103])
    baseline = list(run_campaign(CampaignConfig(targets=targets, chunk_size=4096)))
    config = CampaignConfig(
        targets=targets, chunk_size=4096, workers=4, checkpoint=tmp_path / "run.json"
    )
    try:
        list(run_campaign(config, on_chunk=_kill_after(2)))
    except Interrupted:
        pass
    assert _canonical(list(run_campaign(config))) == _canonical(baseline)


def test_checkpoint_for_other_inputs_is_rejected(tmp_path: Path):
    path = tmp_path / "run.json"
    first = CampaignConfig(targets=_targets([3]), checkpoint=path, fixture_sha="a")
    list(run_campaign(first))
    other_fixtures = CampaignConfig(targets=_targets([3]), checkpoint=path, fixture_sha="b")
    with pytest.raises(CheckpointError):
        list(run_campaign(other_fixtures))
    other_targets = CampaignConfig(targets=_targets([3, 4]), checkpoint=path, fixture_sha="a")
    with pytest.raises(CheckpointError):
        list(run_campaign(other_targets))


def test_memory_budget_is_checked_before_running():
    target = Target(q=31, n=3, problem=Problem.LINE)
    with pytest.raises(MemoryBudgetError):
        check_budget(target, 1000)
    with pytest.raises(MemoryBudgetError):
        list(run_campaign(CampaignConfig(targets=[target], mem_budget=1000)))
    check_budget(target, 10**6)


def test_field_cache_is_used(tmp_path: Path):
    cache_dir = tmp_path / "fields"
    config = CampaignConfig(targets=_targets([5]), cache_dir=cache_dir)
    first = list(run_campaign(config))
    assert any(cache_dir.iterdir())
    second = list(run_campaign(config))
    assert _canonical(first) == _canonical(second)
