"""Level classification, pair sampling, and corpus emission."""

import json
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairscale import (
    ComparativeLevel,
    ImageRecord,
    QualityDifference,
    classify_level,
    emit_corpus,
    generate_corpus,
    quality_difference,
    render_pair,
    sample_pairs,
)
from pairscale.corpus import (
    INSTRUCTION_TEMPLATE,
    LEVEL_WEIGHTS,
    STD_FLOOR,
)
from pairscale.errors import ValidationError
from pairscale.experiment import synthetic_records

from conftest import make_records


def rec(image_id, mos, std, dataset="demo"):
    return ImageRecord(image_id, mos, std, None, dataset)


class TestQualityDifference:
    def test_direct_arithmetic(self):
        d = quality_difference(rec("a", 4.0, 0.3), rec("b", 2.0, 0.4))
        assert d.mean_diff == pytest.approx(2.0)
        assert d.std_diff == pytest.approx(0.5)

    def test_identical_records(self):
        r = rec("a", 3.0, 0.2)
        d = quality_difference(r, r)
        assert d.mean_diff == 0.0
        assert d.std_diff == pytest.approx(0.2 * 2**0.5)

    def test_zero_spread_floors_at_epsilon(self):
        d = quality_difference(rec("a", 1.0, 0.0), rec("b", 2.0, 0.0))
        assert d.std_diff == STD_FLOOR

    def test_cross_dataset_forbidden(self):
        with pytest.raises(ValidationError, match="cross-dataset"):
            quality_difference(rec("a", 1, 0.1, "x"), rec("b", 1, 0.1, "y"))


class TestClassifyLevel:
    @pytest.mark.parametrize(
        "mean,std,expected",
        [
            (2.0, 0.5, ComparativeLevel.INFERIOR),
            (0.0, 0.3, ComparativeLevel.SIMILAR),
            (0.0, 12.0, ComparativeLevel.SIMILAR),
            (-1.0, 1.0, ComparativeLevel.BETTER),
        ],
    )
    def test_examples(self, mean, std, expected):
        assert classify_level(QualityDifference(mean, std)) is expected

    @pytest.mark.parametrize(
        "mean,expected",
        [
            (2.0, ComparativeLevel.WORSE),      # +2 sigma: upper band edge
            (1.0, ComparativeLevel.SIMILAR),    # +1 sigma
            (-1.0, ComparativeLevel.BETTER),    # -1 sigma
            (-2.0, ComparativeLevel.SUPERIOR),  # -2 sigma
        ],
    )
    def test_boundaries_follow_half_open_bands(self, mean, expected):
        assert classify_level(QualityDifference(mean, 1.0)) is expected

    @given(
        mean=st.floats(-50, 50, allow_nan=False),
        std=st.floats(1e-6, 10, allow_nan=False),
    )
    @settings(max_examples=300, deadline=None)
    def test_exactly_one_band_everywhere(self, mean, std):
        level = classify_level(QualityDifference(mean, std))
        assert level in ComparativeLevel

    @given(
        mean=st.floats(-20, 20, allow_nan=False),
        std=st.floats(0.01, 5, allow_nan=False),
    )
    @settings(max_examples=300, deadline=None)
    def test_mirror_property_off_boundaries(self, mean, std):
        on_boundary = any(
            mean == edge * std for edge in (-2.0, -1.0, 1.0, 2.0)
        )
        if on_boundary:
            return
        fwd = classify_level(QualityDifference(mean, std))
        rev = classify_level(QualityDifference(-mean, std))
        assert rev is fwd.mirror

    @given(
        mean=st.floats(-20, 20, allow_nan=False),
        std=st.floats(0.01, 5, allow_nan=False),
        scale_exp=st.integers(-6, 6),
    )
    @settings(max_examples=200, deadline=None)
    def test_scale_invariance(self, mean, std, scale_exp):
        # powers of two keep the scaling exact in binary floating point
        s = 2.0**scale_exp
        base = classify_level(QualityDifference(mean, std))
        scaled = classify_level(QualityDifference(mean * s, std * s))
        assert base is scaled

    def test_weights_and_mirror_table(self):
        assert LEVEL_WEIGHTS == (0.0, 0.25, 0.5, 0.75, 1.0)
        for level in ComparativeLevel:
            assert level.weight + level.mirror.weight == 1.0
        assert ComparativeLevel.SIMILAR.mirror is ComparativeLevel.SIMILAR


class TestSamplePairs:
    def test_exhaustive_three_records(self):
        records = make_records([1.0, 2.0, 3.0])
        pairs = sample_pairs(records, 6, seed=0)
        assert len(pairs) == 6
        assert len(set(pairs)) == 6
        assert all(a != b for a, b in pairs)

    def test_deterministic(self):
        records = make_records(range(12))
        assert sample_pairs(records, 20, seed=9) == sample_pairs(records, 20, seed=9)
        assert sample_pairs(records, 20, seed=9) != sample_pairs(records, 20, seed=10)

    def test_too_many_pairs_reports_maximum(self):
        records = make_records([1, 2, 3])
        with pytest.raises(ValidationError, match="only 6 ordered pairs"):
            sample_pairs(records, 7, seed=0)

    def test_cross_dataset_records_rejected(self):
        records = make_records([1, 2], dataset="x") + make_records(
            [3, 4], dataset="y", prefix="other"
        )
        with pytest.raises(ValidationError, match="multiple datasets"):
            sample_pairs(records, 2, seed=0)

    def test_balanced_sampling_bounds_level_disparity(self):
        records = synthetic_records(200, sigma=0.25, seed=5)
        pairs = sample_pairs(records, 1000, seed=5, balance_levels=True)
        assert len(pairs) == len(set(pairs)) == 1000
        by_id = {r.image_id: r for r in records}
        histogram = Counter(
            classify_level(quality_difference(by_id[a], by_id[b]))
            for a, b in pairs
        )
        assert max(histogram.values()) <= 2 * min(histogram.values())

    def test_balanced_deterministic(self):
        records = synthetic_records(60, sigma=0.3, seed=2)
        a = sample_pairs(records, 300, seed=4, balance_levels=True)
        b = sample_pairs(records, 300, seed=4, balance_levels=True)
        assert a == b


class TestRenderPair:
    @pytest.mark.parametrize(
        "mos_first,mos_second,phrase",
        [
            (3.0, 2.4, "is worse than the first image."),   # gap 0.6, sigma_diff ~0.42
            (3.0, 3.1, "is similar to the first image."),
            (1.0, 4.0, "is superior to the first image."),
            (3.0, 2.0, "is inferior to the first image."),
            (3.0, 3.6, "is better than the first image."),
        ],
    )
    def test_response_connectives(self, mos_first, mos_second, phrase):
        pair = render_pair(rec("a", mos_first, 0.3), rec("b", mos_second, 0.3))
        assert pair.instruction == INSTRUCTION_TEMPLATE
        assert pair.response == f"The quality of the second image {phrase}"
        assert pair.response.startswith("The quality of the second image is ")

    def test_instruction_keeps_placeholders(self):
        pair = render_pair(rec("a", 1, 0.1), rec("b", 2, 0.1))
        assert "<img1>" in pair.instruction and "<img2>" in pair.instruction


class TestEmitCorpus:
    def test_empty_corpus(self, tmp_path):
        out = tmp_path / "corpus.jsonl"
        assert emit_corpus([], out) == 0
        assert out.read_bytes() == b""

    def test_lines_and_fields(self, tmp_path):
        records = make_records([1.0, 2.0, 3.0])
        rendered = generate_corpus(records, 6, seed=1)
        out = tmp_path / "corpus.jsonl"
        assert emit_corpus(rendered, out) == 6
        lines = out.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 6
        for line in lines:
            obj = json.loads(line)
            assert set(obj) == {
                "first_image", "second_image", "instruction", "response",
                "level", "dataset",
            }
            assert obj["level"] in ("inferior", "worse", "similar", "better", "superior")

    def test_reemission_is_byte_identical(self, tmp_path):
        records = make_records(range(10))
        rendered = generate_corpus(records, 30, seed=3)
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        emit_corpus(rendered, a)
        emit_corpus(rendered, b)
        assert a.read_bytes() == b.read_bytes()

    def test_full_generation_deterministic(self, tmp_path):
        records = make_records(range(15))
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        emit_corpus(generate_corpus(records, 40, seed=6), a)
        emit_corpus(generate_corpus(records, 40, seed=6), b)
        assert a.read_bytes() == b.read_bytes()

    def test_production_scale_180k_pairs_across_six_datasets(self, tmp_path):
        out = tmp_path / "corpus.jsonl"
        total = 0
        with open(out, "w", encoding="utf-8") as fh:
            pass
        for k in range(6):
            records = synthetic_records(
                200, sigma=0.3, seed=k, dataset=f"set{k}"
            )
            rendered = generate_corpus(records, 30_000, seed=k)
            tmp = tmp_path / f"part{k}.jsonl"
            total += emit_corpus(rendered, tmp)
            with open(out, "a", encoding="utf-8") as fh:
                fh.write(tmp.read_text(encoding="utf-8"))
        assert total == 180_000
        with open(out, encoding="utf-8") as fh:
            assert sum(1 for _ in fh) == 180_000
