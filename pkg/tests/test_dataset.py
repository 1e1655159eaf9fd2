"""Dataset ingestion, validation, and content-independent splitting."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairscale import load_dataset, save_dataset, split_dataset
from pairscale.dataset import ImageRecord, _largest_remainder, load_split_file
from pairscale.errors import ParseError, ValidationError

from conftest import make_records


def write_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadDataset:
    def test_row_maps_to_record(self, tmp_path):
        path = write_csv(
            tmp_path, "image_id,mos,std,ref_group\nimg_001,3.41,0.16,grpA\n"
        )
        (record,) = load_dataset(path, dataset="demo")
        assert record == ImageRecord("img_001", 3.41, 0.16, "grpA", "demo")

    def test_dataset_tag_defaults_to_stem(self, tmp_path):
        path = write_csv(
            tmp_path, "image_id,mos,std,ref_group\na,1,0.1,\n", name="koniq.csv"
        )
        (record,) = load_dataset(path)
        assert record.dataset == "koniq"
        assert record.ref_group is None

    def test_header_only_gives_empty_list(self, tmp_path):
        path = write_csv(tmp_path, "image_id,mos,std,ref_group\n")
        assert load_dataset(path) == []

    def test_negative_std_names_row(self, tmp_path):
        path = write_csv(
            tmp_path,
            "image_id,mos,std,ref_group\na,1.0,0.1,\nb,2.0,-0.1,\n",
        )
        with pytest.raises(ParseError, match="negative std at row 3"):
            load_dataset(path)

    def test_non_numeric_mos_names_row(self, tmp_path):
        path = write_csv(tmp_path, "image_id,mos,std,ref_group\na,oops,0.1,\n")
        with pytest.raises(ParseError, match="row 2"):
            load_dataset(path)

    def test_duplicate_id_rejected(self, tmp_path):
        path = write_csv(
            tmp_path, "image_id,mos,std,ref_group\na,1,0.1,\na,2,0.1,\n"
        )
        with pytest.raises(ParseError, match="duplicate image_id"):
            load_dataset(path)

    def test_missing_column_rejected(self, tmp_path):
        path = write_csv(tmp_path, "image_id,mos,std\na,1,0.1\n")
        with pytest.raises(ParseError, match="bad header"):
            load_dataset(path)

    def test_record_rejects_negative_std(self):
        with pytest.raises(ValidationError, match="negative std"):
            ImageRecord("a", 1.0, -0.5)


class TestRoundTrip:
    @given(
        values=st.lists(
            st.tuples(
                st.floats(-100, 100, allow_nan=False),
                st.floats(0, 10, allow_nan=False),
            ),
            min_size=0,
            max_size=30,
        )
    )
    @settings(max_examples=50, deadline=None)
    def test_save_load_save_is_byte_stable(self, values, tmp_path_factory):
        tmp = tmp_path_factory.mktemp("roundtrip")
        records = make_records(
            [m for m, _ in values], [s for _, s in values], dataset="rt"
        )
        first = tmp / "a.csv"
        second = tmp / "b.csv"
        save_dataset(records, first)
        loaded = load_dataset(first, dataset="rt")
        assert loaded == records
        save_dataset(loaded, second)
        assert first.read_bytes() == second.read_bytes()


class TestSplitDataset:
    def test_ten_groups_split_7_1_2(self):
        records = make_records(range(10), groups=[f"g{k}" for k in range(10)])
        assignment = split_dataset(records, seed=7, group_by_ref=True)
        assert (len(assignment.train), len(assignment.val), len(assignment.test)) == (7, 1, 2)

    def test_deterministic_for_fixed_seed(self):
        records = make_records(range(20))
        a = split_dataset(records, seed=3)
        b = split_dataset(records, seed=3)
        assert a == b
        c = split_dataset(records, seed=4)
        assert a != c

    def test_29_groups_largest_remainder_20_3_6(self):
        # independent statement of the largest-remainder rule
        total, ratios = 29, (0.7, 0.1, 0.2)
        quotas = [total * r for r in ratios]
        base = [math.floor(q) for q in quotas]
        order = sorted(range(3), key=lambda k: quotas[k] - base[k], reverse=True)
        for k in order[: total - sum(base)]:
            base[k] += 1
        assert base == [20, 3, 6]
        assert _largest_remainder(29, ratios) == [20, 3, 6]

        records = make_records(
            range(29 * 2),
            groups=[f"ref{k // 2}" for k in range(29 * 2)],
        )
        assignment = split_dataset(records, seed=0, group_by_ref=True)
        per_split = [
            {records[int(i.split("_")[1])].ref_group for i in part}
            for part in (assignment.train, assignment.val, assignment.test)
        ]
        assert [len(p) for p in per_split] == [20, 3, 6]

    def test_partition_property(self):
        records = make_records(range(57))
        assignment = split_dataset(records, seed=11)
        train, val, test = map(set, (assignment.train, assignment.val, assignment.test))
        assert not (train & val or train & test or val & test)
        assert train | val | test == {r.image_id for r in records}

    def test_groups_never_straddle_splits(self):
        records = make_records(
            range(40), groups=[f"ref{k % 13}" for k in range(40)]
        )
        assignment = split_dataset(records, seed=5, group_by_ref=True)
        by_id = {r.image_id: r.ref_group for r in records}
        homes = {}
        for name, part in (("train", assignment.train), ("val", assignment.val),
                           ("test", assignment.test)):
            for image_id in part:
                group = by_id[image_id]
                assert homes.setdefault(group, name) == name

    def test_insufficient_groups(self):
        records = make_records([1, 2], groups=["a", "a"])
        with pytest.raises(ValidationError, match="insufficient groups"):
            split_dataset(records, seed=0, group_by_ref=True)

    def test_bad_ratios(self):
        records = make_records(range(10))
        with pytest.raises(ValidationError, match="sum to 1"):
            split_dataset(records, ratios=(0.5, 0.2, 0.2), seed=0)

    def test_group_by_ref_requires_groups(self):
        records = make_records(range(5))
        with pytest.raises(ValidationError, match="lack ref_group"):
            split_dataset(records, seed=0, group_by_ref=True)


class TestSplitFile:
    def test_published_split_injection(self, tmp_path):
        path = tmp_path / "split.csv"
        path.write_text(
            "image_id,split\na,train\nb,train\nc,val\nd,test\n", encoding="utf-8"
        )
        assignment = load_split_file(path)
        assert assignment.train == ("a", "b")
        assert assignment.val == ("c",)
        assert assignment.test == ("d",)

    def test_bad_split_label(self, tmp_path):
        path = tmp_path / "split.csv"
        path.write_text("image_id,split\na,dev\n", encoding="utf-8")
        with pytest.raises(ParseError, match="row 2"):
            load_split_file(path)
