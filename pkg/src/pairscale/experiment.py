"""Multi-split experiments: split, anchor, score, correlate, take medians."""

import csv
import random
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .anchors import select_anchors, select_anchors_random
from .comparators import ComparatorConfig, build_comparator
from .corpus import classify_level, quality_difference, sample_pairs
from .dataset import DEFAULT_RATIOS, ImageRecord, load_dataset, split_dataset
from .errors import ExperimentError, ValidationError
from .metrics import level_accuracy, plcc, srcc
from .scaling import (
    SolverConfig,
    build_anchor_matrix,
    build_count_matrix,
    score_many,
    solve_map,
)


@dataclass(frozen=True)
class MetricReport:
    """Per-split agreement metrics."""

    split_id: int
    n_items: int
    srcc: float
    plcc: float
    accuracy: float | None = None


@dataclass(frozen=True)
class MetricSummary:
    """Element-wise medians across splits."""

    splits: int
    srcc: float
    plcc: float
    accuracy: float | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str | Path | None = None
    dataset_tag: str | None = None
    comparator: ComparatorConfig = field(default_factory=ComparatorConfig)
    alpha: int = 5
    beta: int = 1
    anchors_random: bool = False
    splits: int = 10
    seed: int = 0
    ratios: tuple[float, float, float] = DEFAULT_RATIOS
    group_by_ref: bool = False
    matrix: str = "probability"
    symmetrize: bool = False
    solver: SolverConfig = field(default_factory=SolverConfig)
    accuracy_pairs: int = 1000
    logistic_plcc: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.matrix not in ("probability", "count"):
            raise ValidationError(f"unknown matrix kind {self.matrix!r}")
        if self.splits < 1:
            raise ValidationError("splits must be >= 1")


def synthetic_records(
    n,
    mos_range=(0.0, 5.0),
    sigma=0.25,
    sigma_range=None,
    seed=0,
    dataset="synthetic",
):
    """Seeded synthetic dataset: MOS uniform on a range, constant or
    uniformly drawn per-image rating std."""
    if n < 1:
        raise ValidationError("need at least one synthetic record")
    rng = random.Random(seed)
    width = len(str(n - 1))
    records = []
    for k in range(n):
        mos = rng.uniform(*mos_range)
        std = rng.uniform(*sigma_range) if sigma_range else sigma
        records.append(
            ImageRecord(f"img_{k:0{width}d}", mos, std, None, dataset)
        )
    return records


def _run_split(records, by_id, cfg, split_id):
    seed_s = cfg.seed + split_id
    assignment = split_dataset(
        records, ratios=cfg.ratios, seed=seed_s, group_by_ref=cfg.group_by_ref
    )
    pool_ids = set(assignment.train) | set(assignment.val)
    pool = [r for r in records if r.image_id in pool_ids]
    test = [r for r in records if r.image_id in set(assignment.test)]
    if len(test) < 2:
        raise ValidationError(f"test split holds {len(test)} images, need >= 2")

    if cfg.anchors_random:
        anchor_set = select_anchors_random(
            pool, cfg.alpha, cfg.beta, seed=seed_s
        )
    else:
        anchor_set = select_anchors(pool, cfg.alpha, cfg.beta)

    # stochastic-oracle noise is redrawn per split, like a fresh user study
    cmp_config = replace(cfg.comparator, seed=cfg.comparator.seed + split_id)
    comparator = build_comparator(cmp_config, records=records)

    test_ids = [r.image_id for r in test]
    if cfg.matrix == "probability":
        anchor_matrix = build_anchor_matrix(
            anchor_set, comparator, symmetrize=cfg.symmetrize
        )
        scores = score_many(
            test_ids, anchor_set, anchor_matrix, comparator,
            config=cfg.solver, jobs=cfg.jobs,
        )
    else:
        scores = [
            float(solve_map(build_count_matrix(anchor_set, t, comparator),
                            cfg.solver).values[-1])
            for t in test_ids
        ]

    truth = [r.mos for r in test]
    srcc_v = srcc(scores, truth)
    plcc_v = plcc(scores, truth, logistic_map=cfg.logistic_plcc)

    accuracy = None
    if cfg.accuracy_pairs > 0:
        budget = min(cfg.accuracy_pairs, len(test) * (len(test) - 1))
        pairs = sample_pairs(test, budget, seed=seed_s)
        pred = [comparator.compare(a, b).top_level() for a, b in pairs]
        true_levels = [
            classify_level(quality_difference(by_id[a], by_id[b]))
            for a, b in pairs
        ]
        accuracy = level_accuracy(pred, true_levels)

    return MetricReport(
        split_id=split_id,
        n_items=len(test),
        srcc=srcc_v,
        plcc=plcc_v,
        accuracy=accuracy,
    )


def run_experiment(cfg: ExperimentConfig, records=None):
    """Run every split and summarize with element-wise medians.

    Returns (reports, summary); a failing split aborts the whole run with
    the split identified in the raised error.
    """
    if records is None:
        if cfg.dataset is None:
            raise ValidationError("experiment needs a dataset path or records")
        records = load_dataset(cfg.dataset, dataset=cfg.dataset_tag)
    by_id = {r.image_id: r for r in records}

    reports = []
    for split_id in range(cfg.splits):
        try:
            reports.append(_run_split(records, by_id, cfg, split_id))
        except Exception as exc:
            raise ExperimentError(f"split {split_id} failed: {exc}") from exc

    accuracies = [r.accuracy for r in reports if r.accuracy is not None]
    summary = MetricSummary(
        splits=len(reports),
        srcc=float(np.median([r.srcc for r in reports])),
        plcc=float(np.median([r.plcc for r in reports])),
        accuracy=float(np.median(accuracies)) if accuracies else None,
    )
    return reports, summary


def write_reports_csv(reports, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["split_id", "n_items", "srcc", "plcc", "accuracy"])
        for r in reports:
            writer.writerow(
                [
                    r.split_id,
                    r.n_items,
                    repr(r.srcc),
                    repr(r.plcc),
                    "" if r.accuracy is None else repr(r.accuracy),
                ]
            )


def write_summary_csv(summary, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["splits", "srcc_median", "plcc_median", "accuracy_median"])
        writer.writerow(
            [
                summary.splits,
                repr(summary.srcc),
                repr(summary.plcc),
                "" if summary.accuracy is None else repr(summary.accuracy),
            ]
        )


def format_table(reports, summary) -> str:
    """Plain-text table of per-split metrics plus the median row."""

    def fmt(v):
        return "   -  " if v is None else f"{v:6.4f}"

    lines = [f"{'split':>5}  {'n':>4}  {'srcc':>6}  {'plcc':>6}  {'acc':>6}"]
    for r in reports:
        lines.append(
            f"{r.split_id:>5}  {r.n_items:>4}  {fmt(r.srcc)}  {fmt(r.plcc)}  {fmt(r.accuracy)}"
        )
    lines.append(
        f"{'med':>5}  {'':>4}  {fmt(summary.srcc)}  {fmt(summary.plcc)}  {fmt(summary.accuracy)}"
    )
    return "\n".join(lines)


def load_experiment_file(path) -> dict[str, str]:
    """Parse the key-value experiment description format.

    Lines are ``key = value``; blank lines and '#' comments are skipped.
    """
    out = {}
    path = Path(path)
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}: line {lineno} is not key = value: {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out
