"""Dataset metadata ingestion and content-independent splitting.

One dataset per CSV file with header ``image_id,mos,std,ref_group``. MOS
values stay on their native scale; nothing here ever compares across
datasets.
"""

import csv
import random
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, ValidationError

CSV_HEADER = ["image_id", "mos", "std", "ref_group"]

#: train / validation / test proportions used throughout
DEFAULT_RATIOS = (0.7, 0.1, 0.2)


@dataclass(frozen=True)
class ImageRecord:
    """One annotated image: identity, MOS, rating spread, content group."""

    image_id: str
    mos: float
    std: float
    ref_group: str | None = None
    dataset: str = ""

    def __post_init__(self):
        if self.std < 0:
            raise ValidationError(
                f"negative std {self.std} for image {self.image_id!r}"
            )


@dataclass(frozen=True)
class SplitAssignment:
    """Disjoint, exhaustive train/val/test id lists for one dataset."""

    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]
    seed: int

    def all_ids(self):
        return self.train + self.val + self.test


def load_dataset(path, dataset=None):
    """Read image records from a metadata CSV.

    ``dataset`` tags every record; defaults to the filename stem. Raises
    ParseError naming the offending row on any malformed content.
    """
    path = Path(path)
    tag = dataset if dataset is not None else path.stem
    records = []
    seen = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file, expected header {CSV_HEADER}")
        if header != CSV_HEADER:
            raise ParseError(
                f"{path}: bad header {header!r}, expected {CSV_HEADER}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise ParseError(
                    f"{path}: row {lineno} has {len(row)} fields, expected "
                    f"{len(CSV_HEADER)}"
                )
            image_id, mos_s, std_s, group = row
            try:
                mos = float(mos_s)
                std = float(std_s)
            except ValueError:
                raise ParseError(
                    f"{path}: non-numeric mos/std at row {lineno}: "
                    f"{mos_s!r}, {std_s!r}"
                )
            if std < 0:
                raise ParseError(f"{path}: negative std at row {lineno}")
            if image_id in seen:
                raise ParseError(
                    f"{path}: duplicate image_id {image_id!r} at row {lineno}"
                )
            seen.add(image_id)
            records.append(
                ImageRecord(image_id, mos, std, group or None, tag)
            )
    return records


def save_dataset(records, path):
    """Write records in the metadata CSV format.

    Floats are written with ``repr`` (shortest round-trip form), so
    save -> load -> save is byte-stable and load(save(r)) == r.
    """
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow([r.image_id, repr(r.mos), repr(r.std), r.ref_group or ""])
    return len(records)


def _largest_remainder(total, ratios):
    """Integer allocation of ``total`` items proportional to ``ratios``."""
    quotas = [total * r for r in ratios]
    base = [int(q) for q in quotas]
    short = total - sum(base)
    remainders = sorted(
        range(len(ratios)), key=lambda k: (quotas[k] - base[k]), reverse=True
    )
    for k in remainders[:short]:
        base[k] += 1
    return base


def split_dataset(records, ratios=DEFAULT_RATIOS, seed=0, group_by_ref=False):
    """Randomly partition a dataset into train/val/test.

    Assignment happens at group granularity: with ``group_by_ref`` the groups
    are the ref_group values (content independence), otherwise every record
    is its own group. Proportions are applied to the group count with
    largest-remainder rounding; deterministic for a fixed seed.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValidationError(f"split ratios {ratios} do not sum to 1")
    if len(ratios) != 3:
        raise ValidationError("expected exactly three split ratios")

    if group_by_ref:
        missing = [r.image_id for r in records if r.ref_group is None]
        if missing:
            raise ValidationError(
                f"group_by_ref set but records lack ref_group: {missing[:5]}"
            )
        groups: dict[str, list[str]] = {}
        for r in records:
            groups.setdefault(r.ref_group, []).append(r.image_id)
    else:
        groups = {r.image_id: [r.image_id] for r in records}

    names = sorted(groups)
    if len(names) < 3:
        raise ValidationError(
            f"insufficient groups: {len(names)} found, at least 3 required"
        )

    rng = random.Random(seed)
    rng.shuffle(names)
    n_train, n_val, n_test = _largest_remainder(len(names), ratios)

    buckets = (
        names[:n_train],
        names[n_train : n_train + n_val],
        names[n_train + n_val :],
    )
    train, val, test = (
        tuple(i for g in sorted(b) for i in groups[g]) for b in buckets
    )
    return SplitAssignment(train=train, val=val, test=test, seed=seed)


def load_split_file(path, seed=0):
    """Read an explicit (published) split: CSV with header image_id,split.

    Lets externally defined splits be injected in place of seeded random
    ones; split values must be train, val, or test.
    """
    path = Path(path)
    buckets = {"train": [], "val": [], "test": []}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["image_id", "split"]:
            raise ParseError(f"{path}: bad header {header!r}, expected image_id,split")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2 or row[1] not in buckets:
                raise ParseError(f"{path}: bad split row {lineno}: {row!r}")
            buckets[row[1]].append(row[0])
    return SplitAssignment(
        train=tuple(buckets["train"]),
        val=tuple(buckets["val"]),
        test=tuple(buckets["test"]),
        seed=seed,
    )
