from unittest.mock import MagicMock, patch

import numpy as np
import pytest

from grouprec import artifacts, store
from grouprec.errors import MissingArtifactError
from grouprec.factorization import FactorizationResult
from grouprec.models import GroupRecord, RecommendationRecord, RunStatus
from grouprec.ratings import FeatureMatrix, build_ratings


def _group(rep, position, members="0,1"):
    return GroupRecord(
        id=GroupRecord.make_id(rep, "random", 2, position),
        repetition=rep, kind="random", size=2, position=position, members=members,
    )


def test_group_ids_and_members():
    record = _group(3, 7, "4,9")
    assert record.id == "r3-random-2-0007"
    assert record.member_ids() == (4, 9)


def test_groups_round_trip_and_replace(tmp_path):
    store.save_groups(tmp_path, 0, [_group(0, 1), _group(0, 0)])
    store.save_groups(tmp_path, 1, [_group(1, 0, "2,3")])
    loaded = store.load_groups(tmp_path, 0)
    assert [g.position for g in loaded] == [0, 1]

    store.save_groups(tmp_path, 0, [_group(0, 0, "5,6")])
    assert [g.members for g in store.load_groups(tmp_path, 0)] == ["5,6"]
    assert [g.members for g in store.load_groups(tmp_path, 1)] == ["2,3"]


def test_recommendations_round_trip(tmp_path):
    store.save_groups(tmp_path, 0, [_group(0, 0)])
    rows = [
        RecommendationRecord(group_id="r0-random-2-0000", repetition=0, algorithm="saga-linear",
                             gamma=0.5, rank=rank, item_id=item, marginal_gain=gain)
        for rank, (item, gain) in enumerate([(4, 2.5), (1, 1.25)], start=1)
    ]
    rows.append(RecommendationRecord(group_id="r0-random-2-0000", repetition=0, algorithm="fm", param=0.3, rank=1, item_id=2))
    store.save_recommendations(tmp_path, 0, rows)

    loaded = store.load_recommendations(tmp_path, 0)
    assert [(r.algorithm, r.rank, r.item_id) for r in loaded] == [("fm", 1, 2), ("saga-linear", 1, 4), ("saga-linear", 2, 1)]
    assert loaded[1].marginal_gain == 2.5
    assert loaded[0].gamma is None and loaded[0].param == 0.3


def test_missing_records_raise(tmp_path):
    with pytest.raises(MissingArtifactError) as exc:
        store.load_groups(tmp_path, 0)
    assert exc.value.stage == "groups"
    assert exc.value.exit_code == 6
    with pytest.raises(MissingArtifactError):
        store.load_recommendations(tmp_path, 0)


def test_tracked_run_marks_status(tmp_path):
    with store.tracked_run(tmp_path, "groups", "{}"):
        pass
    with pytest.raises(MissingArtifactError):
        with store.tracked_run(tmp_path, "recommend", "{}"):
            raise MissingArtifactError("groups", "groups")
    statuses = {run.command: run.status for run in store.list_runs(tmp_path)}
    assert statuses == {"groups": RunStatus.COMPLETE, "recommend": RunStatus.FAILED}


def test_start_run_uses_the_session():
    with patch("grouprec.store.get_session") as mock_session:
        mock_db = MagicMock()
        mock_session.return_value.__enter__.return_value = mock_db

        store.start_run("/nowhere", "run", "{}")

        added = mock_db.add.call_args[0][0]
        assert added.command == "run"
        assert added.status == RunStatus.RUNNING
        mock_db.commit.assert_called_once()


def test_npz_artifacts_round_trip(tmp_path):
    R = build_ratings([(0, 0, 5), (0, 1, 3), (1, 1, 4)], user_ids=np.array([10, 20]), item_ids=np.array([7, 8]))
    artifacts.save_ratings(tmp_path, R)
    loaded = artifacts.load_ratings(tmp_path)
    assert list(loaded.triples()) == list(R.triples())
    assert loaded.item_ids.tolist() == [7, 8]

    split = loaded.with_test_mask(np.array([False, True, False]))
    result = FactorizationResult(FeatureMatrix(np.ones((2, 2))), FeatureMatrix(np.full((2, 2), 0.5)), (3.0, 2.0))
    artifacts.save_factorization(tmp_path, 4, split, result)
    again, factors = artifacts.load_factorization(tmp_path, 4, loaded)
    assert again.test_mask.tolist() == [False, True, False]
    assert factors.objective_trace == (3.0, 2.0)
    assert np.array_equal(factors.item_features.values, result.item_features.values)

    with pytest.raises(MissingArtifactError):
        artifacts.load_factorization(tmp_path, 0, loaded)
