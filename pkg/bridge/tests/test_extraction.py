"""First-sub-token extraction and the startup collision check."""

import pytest

from lmm_bridge import LEVEL_NAMES, extract_level_logits, level_first_token_ids
from lmm_bridge.errors import BadRequestError, StartupError


def toy_encode(text):
    """Word-level fake tokenizer: distinct id per distinct word."""
    vocab = {}

    def ids(word):
        return vocab.setdefault(word, 100 + len(vocab))

    return [ids(w) for w in text.split()]


class TestLevelFirstTokenIds:
    def test_distinct_first_tokens(self):
        table = {
            " inferior": [7, 1],
            " worse": [8],
            " similar": [9, 2, 3],
            " better": [10],
            " superior": [11, 1],
        }
        ids = level_first_token_ids(lambda text: table[text])
        assert ids == {
            "inferior": 7, "worse": 8, "similar": 9, "better": 10, "superior": 11,
        }

    def test_collision_is_startup_error(self):
        table = {
            " inferior": [7, 1],
            " worse": [8],
            " similar": [7, 9],  # same first sub-token as inferior
            " better": [10],
            " superior": [11],
        }
        with pytest.raises(StartupError, match="share first sub-token 7"):
            level_first_token_ids(lambda text: table[text])

    def test_empty_encoding_rejected(self):
        with pytest.raises(StartupError, match="no tokens"):
            level_first_token_ids(lambda text: [])


class TestExtractLevelLogits:
    def test_reads_by_token_id(self):
        ids = {name: 50 + k for k, name in enumerate(LEVEL_NAMES)}
        distribution = [0.0] * 60
        for k, name in enumerate(LEVEL_NAMES):
            distribution[50 + k] = float(k) - 2.0
        logits = extract_level_logits(distribution, ids)
        assert logits == {
            "inferior": -2.0, "worse": -1.0, "similar": 0.0,
            "better": 1.0, "superior": 2.0,
        }

    def test_missing_token_rejected(self):
        ids = {name: 10 + k for k, name in enumerate(LEVEL_NAMES)}
        with pytest.raises(BadRequestError, match="lacks token"):
            extract_level_logits([0.0] * 5, ids)

    def test_non_finite_rejected(self):
        ids = {name: k for k, name in enumerate(LEVEL_NAMES)}
        with pytest.raises(BadRequestError, match="non-finite"):
            extract_level_logits([0.0, float("nan"), 0.0, 0.0, 0.0], ids)
