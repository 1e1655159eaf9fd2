"""Five-level comparative labels and instruction-response corpus generation.

A pair of same-dataset images is labeled by where their MOS difference
falls relative to the +-1 and +-2 sigma significance thresholds of the
difference distribution, then rendered into a fixed instruction/response
template and emitted as JSON Lines.
"""

import json
import math
import random
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

from .dataset import ImageRecord
from .errors import ValidationError

#: lower bound on the std of a MOS difference; keeps classification defined
#: when both ratings have zero spread
STD_FLOOR = 1e-6


class ComparativeLevel(IntEnum):
    """Ordinal outcome describing the second image relative to the first."""

    INFERIOR = 0
    WORSE = 1
    SIMILAR = 2
    BETTER = 3
    SUPERIOR = 4

    @property
    def weight(self) -> float:
        return LEVEL_WEIGHTS[self.value]

    @property
    def mirror(self) -> "ComparativeLevel":
        """Level of the same pair with the presentation order swapped."""
        return ComparativeLevel(4 - self.value)

    @property
    def label(self) -> str:
        return self.name.lower()


#: preference weight carried by each level, ordered inferior -> superior
LEVEL_WEIGHTS = (0.0, 0.25, 0.5, 0.75, 1.0)

#: English connective for each level in the response template
LEVEL_CONNECTIVES = ("to", "than", "to", "than", "to")

INSTRUCTION_TEMPLATE = (
    "Compared with the first image <img1>, "
    "how is the quality of the second image <img2>?"
)
RESPONSE_TEMPLATE = "The quality of the second image is {level} {connective} the first image."


@dataclass(frozen=True)
class QualityDifference:
    """Gaussian model of the MOS difference of a pair (first minus second)."""

    mean_diff: float
    std_diff: float


@dataclass(frozen=True)
class InstructionPair:
    first_id: str
    second_id: str
    level: ComparativeLevel
    instruction: str
    response: str
    dataset: str


def quality_difference(first: ImageRecord, second: ImageRecord) -> QualityDifference:
    """Difference distribution of two same-dataset images.

    Mean is first.mos - second.mos; std combines the two rating spreads in
    quadrature, floored at STD_FLOOR.
    """
    if first.dataset != second.dataset:
        raise ValidationError(
            "cross-dataset comparison forbidden: "
            f"{first.image_id!r} is {first.dataset!r}, "
            f"{second.image_id!r} is {second.dataset!r}"
        )
    std = max(math.hypot(first.std, second.std), STD_FLOOR)
    return QualityDifference(first.mos - second.mos, std)


def classify_level(d: QualityDifference) -> ComparativeLevel:
    """Map a quality difference onto the five comparative levels.

    Half-open significance bands on the mean difference m with spread s:
    inferior for m > 2s, worse for s < m <= 2s, similar for -s < m <= s,
    better for -2s < m <= -s, superior for m <= -2s.
    """
    m, s = d.mean_diff, d.std_diff
    if m > 2.0 * s:
        return ComparativeLevel.INFERIOR
    if m > s:
        return ComparativeLevel.WORSE
    if m > -s:
        return ComparativeLevel.SIMILAR
    if m > -2.0 * s:
        return ComparativeLevel.BETTER
    return ComparativeLevel.SUPERIOR


def _pair_from_index(k: int, n: int) -> tuple[int, int]:
    """k-th ordered pair (i, j), i != j, in row-major order."""
    i, j = divmod(k, n - 1)
    if j >= i:
        j += 1
    return i, j


def _distinct_index_stream(rng, total):
    """Yield all of range(total) in seeded random order, lazily.

    Rejection sampling with a seen-set; cheap while few indices have been
    consumed, with a shuffled sweep of the leftovers as a tail guard.
    """
    seen = set()
    attempts = 0
    cap = 60 * total
    while len(seen) < total and attempts < cap:
        attempts += 1
        k = rng.randrange(total)
        if k in seen:
            continue
        seen.add(k)
        yield k
    if len(seen) < total:
        rest = [k for k in range(total) if k not in seen]
        rng.shuffle(rest)
        yield from rest


def sample_pairs(records, n, seed=0, balance_levels=False):
    """Draw n distinct ordered pairs of records, uniformly without replacement.

    With ``balance_levels``, rejection resampling steers the draw toward a
    per-level quota so that the most- and least-frequent levels differ by at
    most 2x when the pair population allows it; quotas that cannot be filled
    are backfilled from the least-represented levels.

    Returns a list of (first_id, second_id) tuples; deterministic for a
    fixed seed.
    """
    tags = {r.dataset for r in records}
    if len(tags) > 1:
        raise ValidationError(f"records span multiple datasets: {sorted(tags)}")
    size = len(records)
    total = size * (size - 1)
    if n > total:
        raise ValidationError(
            f"requested {n} pairs but only {total} ordered pairs exist"
        )
    rng = random.Random(seed)

    if not balance_levels:
        ks = rng.sample(range(total), n)
        pairs = [_pair_from_index(k, size) for k in ks]
        return [(records[i].image_id, records[j].image_id) for i, j in pairs]

    levels = list(ComparativeLevel)
    base, extra = divmod(n, len(levels))
    quota = {
        lvl: base + (1 if k < extra else 0) for k, lvl in enumerate(levels)
    }
    counts = {lvl: 0 for lvl in levels}
    chosen: list[tuple[str, str]] = []
    overflow: dict[ComparativeLevel, list[tuple[str, str]]] = {
        lvl: [] for lvl in levels
    }

    for k in _distinct_index_stream(rng, total):
        if len(chosen) >= n:
            break
        i, j = _pair_from_index(k, size)
        lvl = classify_level(quality_difference(records[i], records[j]))
        pair = (records[i].image_id, records[j].image_id)
        if counts[lvl] < quota[lvl]:
            chosen.append(pair)
            counts[lvl] += 1
        elif len(overflow[lvl]) < n:
            overflow[lvl].append(pair)

    # Backfill when some level is too scarce to meet its quota: repeatedly
    # take from the currently least-represented level that still has spares.
    while len(chosen) < n:
        candidates = [lvl for lvl in levels if overflow[lvl]]
        if not candidates:
            raise ValidationError(
                f"could not assemble {n} pairs; only "
                f"{len(chosen)} distinct pairs were reachable"
            )
        lvl = min(candidates, key=lambda l: (counts[l], l.value))
        chosen.append(overflow[lvl].pop(0))
        counts[lvl] += 1
    return chosen


def render_pair(first: ImageRecord, second: ImageRecord) -> InstructionPair:
    """Build the instruction-response pair for two same-dataset images."""
    level = classify_level(quality_difference(first, second))
    response = RESPONSE_TEMPLATE.format(
        level=level.label, connective=LEVEL_CONNECTIVES[level.value]
    )
    return InstructionPair(
        first_id=first.image_id,
        second_id=second.image_id,
        level=level,
        instruction=INSTRUCTION_TEMPLATE,
        response=response,
        dataset=first.dataset,
    )


def emit_corpus(pairs, path) -> int:
    """Write instruction pairs as JSON Lines; returns the number written."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(
                json.dumps(
                    {
                        "first_image": p.first_id,
                        "second_image": p.second_id,
                        "instruction": p.instruction,
                        "response": p.response,
                        "level": p.level.label,
                        "dataset": p.dataset,
                    },
                    ensure_ascii=False,
                )
            )
            fh.write("\n")
    return len(pairs)


def generate_corpus(records, n, seed=0, balance_levels=False):
    """Sample pairs and render them; the one-stop shop behind gen-corpus."""
    by_id = {r.image_id: r for r in records}
    sampled = sample_pairs(records, n, seed=seed, balance_levels=balance_levels)
    return [render_pair(by_id[a], by_id[b]) for a, b in sampled]
