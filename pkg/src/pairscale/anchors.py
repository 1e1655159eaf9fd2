"""Quality-interval partitioning and anchor image selection.

The training MOS range is cut into ``alpha`` equal-width intervals; from
each interval the ``beta`` images with the smallest rating variance are
kept as anchors (sum of per-image variances is minimized exactly because
the objective decomposes per image).
"""

import csv
import math
import random
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, ValidationError


@dataclass(frozen=True)
class AnchorSet:
    """Ordered anchors: (image_id, interval_index), sorted by both keys."""

    anchors: tuple[tuple[str, int], ...]
    alpha: int
    beta: int
    dataset: str = ""

    def ids(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.anchors)

    def __len__(self):
        return len(self.anchors)


def partition_intervals(records, alpha):
    """Equal-width interval index over [min mos, max mos] for each record.

    Boundaries are left-closed, right-open, except that the maximum MOS
    belongs to the last interval. Returns a list aligned with ``records``.
    """
    if alpha < 1:
        raise ValidationError(f"alpha must be >= 1, got {alpha}")
    if not records:
        raise ValidationError("cannot partition an empty record list")
    lo = min(r.mos for r in records)
    hi = max(r.mos for r in records)
    if lo == hi:
        if alpha > 1:
            raise ValidationError(
                f"degenerate MOS range [{lo}, {hi}] cannot support alpha={alpha}"
            )
        return [0] * len(records)
    width = (hi - lo) / alpha
    out = []
    for r in records:
        idx = int(math.floor((r.mos - lo) / width))
        out.append(min(max(idx, 0), alpha - 1))
    return out


def _interval_members(records, alpha):
    members = [[] for _ in range(alpha)]
    for r, idx in zip(records, partition_intervals(records, alpha)):
        members[idx].append(r)
    return members


def select_anchors(records, alpha, beta, dataset=None) -> AnchorSet:
    """Per interval, the ``beta`` records with the smallest rating std.

    Ties break on image_id so selection never depends on input order.
    """
    if beta < 1:
        raise ValidationError(f"beta must be >= 1, got {beta}")
    tag = dataset if dataset is not None else (records[0].dataset if records else "")
    chosen = []
    for idx, group in enumerate(_interval_members(records, alpha)):
        if len(group) < beta:
            raise ValidationError(
                f"interval {idx} holds {len(group)} record(s), need beta={beta}"
            )
        best = sorted(group, key=lambda r: (r.std, r.image_id))[:beta]
        chosen.extend((r.image_id, idx) for r in best)
    chosen.sort(key=lambda pair: (pair[1], pair[0]))
    return AnchorSet(tuple(chosen), alpha=alpha, beta=beta, dataset=tag)


def select_anchors_random(records, alpha, beta, seed=0, dataset=None) -> AnchorSet:
    """Uniform per-interval anchor choice; the baseline to beat."""
    if beta < 1:
        raise ValidationError(f"beta must be >= 1, got {beta}")
    tag = dataset if dataset is not None else (records[0].dataset if records else "")
    rng = random.Random(seed)
    chosen = []
    for idx, group in enumerate(_interval_members(records, alpha)):
        if len(group) < beta:
            raise ValidationError(
                f"interval {idx} holds {len(group)} record(s), need beta={beta}"
            )
        ids = sorted(r.image_id for r in group)
        chosen.extend((i, idx) for i in rng.sample(ids, beta))
    chosen.sort(key=lambda pair: (pair[1], pair[0]))
    return AnchorSet(tuple(chosen), alpha=alpha, beta=beta, dataset=tag)


def save_anchor_set(anchor_set: AnchorSet, path) -> None:
    """Write anchors as CSV with a comment line recording alpha/beta/dataset."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(
            f"# alpha={anchor_set.alpha} beta={anchor_set.beta} "
            f"dataset={anchor_set.dataset}\n"
        )
        writer = csv.writer(fh)
        writer.writerow(["image_id", "interval_index"])
        for image_id, idx in anchor_set.anchors:
            writer.writerow([image_id, idx])


def load_anchor_set(path) -> AnchorSet:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        comment = fh.readline().strip()
        if not comment.startswith("#"):
            raise ParseError(f"{path}: missing anchor header comment")
        meta = dict(
            part.split("=", 1) for part in comment.lstrip("# ").split() if "=" in part
        )
        try:
            alpha = int(meta["alpha"])
            beta = int(meta["beta"])
        except (KeyError, ValueError) as exc:
            raise ParseError(f"{path}: bad anchor header {comment!r}") from exc
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["image_id", "interval_index"]:
            raise ParseError(f"{path}: bad header {header!r}")
        anchors = []
        for lineno, row in enumerate(reader, start=3):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(f"{path}: bad anchor row {lineno}: {row!r}")
            anchors.append((row[0], int(row[1])))
    return AnchorSet(
        tuple(anchors), alpha=alpha, beta=beta, dataset=meta.get("dataset", "")
    )
