"""Level-logit extraction from a next-token distribution.

Multi-token level words are represented by their first sub-token. That
convention is declared here and guarded by a startup collision check: a
tokenizer mapping two level words onto the same first sub-token cannot
disambiguate them, so the model is unsupported.
"""

import math

from .errors import BadRequestError, StartupError
from .protocol import LEVEL_NAMES


def level_first_token_ids(encode) -> dict[str, int]:
    """First sub-token id of each level word.

    ``encode`` is a tokenizer callable mapping text to a token-id list.
    Level words are encoded with a leading space, matching their position
    after the response prefix.
    """
    ids = {}
    for name in LEVEL_NAMES:
        tokens = [t for t in encode(f" {name}")]
        if not tokens:
            raise StartupError(f"tokenizer produced no tokens for {name!r}")
        ids[name] = int(tokens[0])
    seen = {}
    for name, token_id in ids.items():
        if token_id in seen:
            raise StartupError(
                f"model unsupported: levels {seen[token_id]!r} and {name!r} "
                f"share first sub-token {token_id}"
            )
        seen[token_id] = name
    return ids


def extract_level_logits(next_token_logits, level_token_ids) -> dict[str, float]:
    """Read the five level logits out of a next-token distribution.

    ``next_token_logits`` is indexable by token id (sequence or mapping);
    ``level_token_ids`` comes from ``level_first_token_ids``.
    """
    out = {}
    for name in LEVEL_NAMES:
        token_id = level_token_ids[name]
        try:
            value = float(next_token_logits[token_id])
        except (KeyError, IndexError) as exc:
            raise BadRequestError(
                f"next-token distribution lacks token {token_id} for {name!r}"
            ) from exc
        if not math.isfinite(value):
            raise BadRequestError(f"non-finite logit for level {name!r}: {value}")
        out[name] = value
    return out
