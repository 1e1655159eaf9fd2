"""Agreement metrics: rank correlation, linear correlation, level accuracy."""

import warnings

import numpy as np

from .errors import MetricError, ValidationError


def average_ranks(values) -> np.ndarray:
    """1-based ranks; tied values share the mean of their rank range."""
    arr = np.asarray(values, dtype=np.float64)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(arr.size)
    i = 0
    while i < arr.size:
        j = i
        while j + 1 < arr.size and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt((xc @ xc) * (yc @ yc))
    return float((xc @ yc) / denom)


def _check_lengths(pred, truth):
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ValidationError(
            f"prediction/truth shapes differ: {pred.shape} vs {truth.shape}"
        )
    if pred.size < 2:
        raise ValidationError("correlations need at least 2 items")
    if not (np.all(np.isfinite(pred)) and np.all(np.isfinite(truth))):
        raise ValidationError("correlations require finite inputs")
    return pred, truth


def srcc(pred, truth) -> float:
    """Spearman rank correlation: Pearson over average-ranked vectors."""
    pred, truth = _check_lengths(pred, truth)
    rp = average_ranks(pred)
    rt = average_ranks(truth)
    if np.ptp(rp) == 0 or np.ptp(rt) == 0:
        raise MetricError("degenerate ranking: zero rank variance")
    return _pearson(rp, rt)


def _logistic4(x, b1, b2, b3, b4):
    return b2 + (b1 - b2) / (1.0 + np.exp(-(x - b3) / (abs(b4) + 1e-12)))


def fit_logistic(pred, truth):
    """Least-squares monotone 4-parameter logistic map pred -> truth."""
    from scipy.optimize import curve_fit

    p0 = [float(np.max(truth)), float(np.min(truth)), float(np.mean(pred)),
          max(float(np.std(pred)) / 4.0, 1e-3)]
    params, _ = curve_fit(_logistic4, pred, truth, p0=p0, maxfev=20000)
    return _logistic4(pred, *params)


def plcc(pred, truth, logistic_map=False) -> float:
    """Pearson linear correlation, optionally after a 4PL regression.

    The logistic map is the field-standard monotone nonlinearity fitted
    pred -> truth before correlating; if the fit fails the raw correlation
    is returned with a warning.
    """
    pred, truth = _check_lengths(pred, truth)
    if np.ptp(pred) == 0 or np.ptp(truth) == 0:
        raise MetricError("zero variance: linear correlation undefined")
    if logistic_map:
        try:
            mapped = fit_logistic(pred, truth)
            if np.ptp(mapped) > 0 and np.all(np.isfinite(mapped)):
                return _pearson(mapped, truth)
            warnings.warn("logistic fit collapsed; using raw correlation")
        except RuntimeError as exc:
            warnings.warn(f"logistic fit failed ({exc}); using raw correlation")
    return _pearson(pred, truth)


def level_accuracy(pred_levels, truth_levels) -> float:
    """Fraction of exact level matches."""
    if len(pred_levels) != len(truth_levels):
        raise ValidationError(
            f"level lists differ in length: {len(pred_levels)} vs {len(truth_levels)}"
        )
    if not pred_levels:
        raise ValidationError("level accuracy needs at least one pair")
    hits = sum(1 for p, t in zip(pred_levels, truth_levels) if p == t)
    return hits / len(pred_levels)
