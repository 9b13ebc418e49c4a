import pytest

from coimg_harness.errors import TooFewSamples
from coimg_harness.folds import (
    RECORD_LEVEL,
    SOURCE_GROUP_LEVEL,
    assert_leak_free,
    make_folds,
)
from coimg_harness.records import EvalRecord


def records_with_own_sources(per_class: dict[str, int]) -> list[EvalRecord]:
    out = []
    for name, count in sorted(per_class.items()):
        for i in range(count):
            rid = f"{name}/{i:04d}.png"
            out.append(EvalRecord(rid, name, f"/img/{rid}", (f"{name}:{i}",)))
    return out


def composite_records(class_name: str, member_sets: list[tuple[int, ...]]) -> list[EvalRecord]:
    return [
        EvalRecord(
            f"{class_name}/{rank:04d}.png",
            class_name,
            f"/img/{class_name}/{rank:04d}.png",
            tuple(f"{class_name}:{m}" for m in members),
        )
        for rank, members in enumerate(member_sets)
    ]


class TestRecordLevel:
    def test_100_records_give_folds_of_20(self):
        records = records_with_own_sources({"a": 50, "b": 50})
        folds = make_folds(records, RECORD_LEVEL, seed=3)
        assert len(folds) == 5
        for fold in folds:
            assert len(fold.val_ids) == 20
            assert len(fold.train_ids) == 80
            assert not set(fold.val_ids) & set(fold.train_ids)

    def test_validation_slices_partition_the_dataset(self):
        records = records_with_own_sources({"a": 13, "b": 7})
        folds = make_folds(records, RECORD_LEVEL, seed=1)
        seen = [rid for fold in folds for rid in fold.val_ids]
        assert sorted(seen) == sorted(r.record_id for r in records)

    def test_stratified_by_class(self):
        records = records_with_own_sources({"a": 25, "b": 10})
        for fold in make_folds(records, RECORD_LEVEL, seed=9):
            a_val = sum(rid.startswith("a/") for rid in fold.val_ids)
            b_val = sum(rid.startswith("b/") for rid in fold.val_ids)
            assert a_val == 5
            assert b_val == 2

    def test_deterministic_in_seed(self):
        records = records_with_own_sources({"a": 20, "b": 20})
        assert make_folds(records, RECORD_LEVEL, seed=4) == make_folds(
            records, RECORD_LEVEL, seed=4
        )
        assert make_folds(records, RECORD_LEVEL, seed=4) != make_folds(
            records, RECORD_LEVEL, seed=5
        )

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamples):
            make_folds(records_with_own_sources({"a": 4}), RECORD_LEVEL, seed=0)


class TestSourceGroupLevel:
    def test_shared_source_records_stay_together(self):
        # pairs (0,1), (1,2) share source 1 and must travel as one group
        member_sets = [(0, 1), (1, 2), (3, 4), (5, 6), (7, 8), (9, 10), (11, 12)]
        records = composite_records("c", member_sets)
        folds = make_folds(records, SOURCE_GROUP_LEVEL, seed=2)
        assert_leak_free(records, folds)
        first_two = {records[0].record_id, records[1].record_id}
        for fold in folds:
            val = set(fold.val_ids)
            assert first_two <= val or not (first_two & val)

    def test_leak_detection_fires_on_record_level_composites(self):
        member_sets = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (0, 7)]
        records = composite_records("c", member_sets)
        folds = make_folds(records, RECORD_LEVEL, seed=0)
        with pytest.raises(AssertionError):
            assert_leak_free(records, folds)

    def test_heavily_overlapping_class_is_refused(self):
        # every composite shares source 0: one giant component
        member_sets = [(0, i) for i in range(1, 9)]
        records = composite_records("c", member_sets)
        with pytest.raises(TooFewSamples):
            make_folds(records, SOURCE_GROUP_LEVEL, seed=0)

    def test_disjoint_composites_split_cleanly(self):
        member_sets = [(3 * i, 3 * i + 1, 3 * i + 2) for i in range(10)]
        records = composite_records("c", member_sets)
        folds = make_folds(records, SOURCE_GROUP_LEVEL, seed=6)
        assert_leak_free(records, folds)
        assert sorted(rid for f in folds for rid in f.val_ids) == sorted(
            r.record_id for r in records
        )

    def test_deterministic(self):
        member_sets = [(2 * i, 2 * i + 1) for i in range(12)]
        records = composite_records("c", member_sets)
        assert make_folds(records, SOURCE_GROUP_LEVEL, seed=8) == make_folds(
            records, SOURCE_GROUP_LEVEL, seed=8
        )
