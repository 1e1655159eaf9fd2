"""Preference aggregation and Thurstone Case V MAP scaling.

Comparator logits are collapsed into preference probabilities by the
weighted softmax, assembled into a complement-antisymmetric matrix over
anchors plus one test image, and solved for zero-sum latent quality scores
by damped Newton ascent of the Case V log-posterior.
"""

import csv
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as kernels
from .anchors import AnchorSet
from .comparators import ComparisonLogits
from .corpus import LEVEL_WEIGHTS
from .errors import MatrixError, NonConvergenceError, ValidationError

#: probabilities are clamped to this open interval before the likelihood so
#: that hard 0/1 preferences cannot drive scores to +-infinity
PROB_CLAMP = 1e-6

_WEIGHTS = np.asarray(LEVEL_WEIGHTS, dtype=np.float64)


class PreferenceMatrix:
    """Square matrix with entries[i][j] = P(item i preferred over item j).

    The diagonal is 0.5 and entries[i][j] + entries[j][i] == 1 exactly: the
    constructor treats the lower triangle as authoritative and rebuilds the
    upper one as its complement, after verifying that the input satisfied
    the invariants to within ``atol``.
    """

    def __init__(self, values, atol=1e-9):
        arr = np.array(values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise MatrixError(f"preference matrix must be square, got {arr.shape}")
        n = arr.shape[0]
        if not np.all(np.isfinite(arr)):
            raise MatrixError("preference matrix contains non-finite entries")
        if np.any(arr < -atol) or np.any(arr > 1 + atol):
            raise MatrixError("preference entries must lie in [0, 1]")
        if np.any(np.abs(np.diagonal(arr) - 0.5) > atol):
            raise MatrixError("preference diagonal must equal 0.5")
        asym = arr + arr.T - 1.0
        bad = np.unravel_index(np.argmax(np.abs(asym)), asym.shape)
        if np.abs(asym[bad]) > atol:
            raise MatrixError(
                f"entries {bad} violate complement antisymmetry by {asym[bad]:.3e}"
            )
        canonical = np.clip(arr, 0.0, 1.0)
        for i in range(n):
            canonical[i, i] = 0.5
            for j in range(i + 1, n):
                canonical[i, j] = 1.0 - canonical[j, i]
        canonical.setflags(write=False)
        self.values = canonical
        self.n = n

    def __repr__(self):
        return f"PreferenceMatrix(n={self.n})"


class CountMatrix:
    """Nonnegative comparison-outcome weights with a zero diagonal."""

    def __init__(self, values, atol=1e-9):
        arr = np.array(values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise MatrixError(f"count matrix must be square, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise MatrixError("count matrix contains non-finite entries")
        if np.any(arr < -atol):
            raise MatrixError("count entries must be >= 0")
        if np.any(np.abs(np.diagonal(arr)) > atol):
            raise MatrixError("count diagonal must be 0")
        canonical = np.clip(arr, 0.0, None)
        np.fill_diagonal(canonical, 0.0)
        canonical.setflags(write=False)
        self.values = canonical
        self.n = arr.shape[0]

    def __repr__(self):
        return f"CountMatrix(n={self.n})"


@dataclass(frozen=True)
class SolverConfig:
    prior: str = "gaussian"
    prior_weight: float = 1.0
    tol: float = 1e-9
    max_iter: int = 500

    def __post_init__(self):
        if self.prior not in ("gaussian", "none"):
            raise ValidationError(f"unknown prior {self.prior!r}")
        if self.prior_weight < 0:
            raise ValidationError("prior_weight must be >= 0")
        if self.tol <= 0:
            raise ValidationError("tol must be > 0")

    @property
    def effective_weight(self) -> float:
        return self.prior_weight if self.prior == "gaussian" else 0.0


@dataclass(frozen=True)
class ScaleScores:
    """Zero-sum latent quality scores plus solver diagnostics."""

    values: np.ndarray
    iterations: int
    grad_norm: float
    objective_path: tuple[float, ...] = field(repr=False, default=())

    def __post_init__(self):
        total = float(np.sum(self.values))
        if abs(total) > 1e-9:
            raise ValidationError(f"scores must sum to 0, got {total:.3e}")


def soft_preference(logits: ComparisonLogits) -> float:
    """Weighted softmax of the level logits.

    Returns the probability that the SECOND image of the comparison is
    preferred over the first; weights (0, .25, .5, .75, 1) make mirrored
    logits complementary.
    """
    arr = logits.as_array() if isinstance(logits, ComparisonLogits) else np.asarray(logits, dtype=np.float64)
    shifted = arr - arr.max()
    p = np.exp(shifted)
    p /= p.sum()
    return float(p @ _WEIGHTS)


def log_norm_cdf(x):
    """ln Phi(x) via the active kernel backend; scalar in, scalar out."""
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(kernels.log_ndtr(np.float64(x)))
    return kernels.log_ndtr(np.asarray(x, dtype=np.float64))


def build_anchor_matrix(anchor_set: AnchorSet, comparator, symmetrize=False) -> PreferenceMatrix:
    """Preference matrix over the anchors.

    Each unordered pair i < j is compared once in canonical order
    (first = anchor i, second = anchor j); with ``symmetrize`` the reversed
    order is also queried and the two estimates averaged, absorbing any
    position bias in the comparator.
    """
    ids = anchor_set.ids()
    m = len(ids)
    if m < 2:
        raise ValidationError(f"need at least 2 anchors, got {m}")
    values = np.full((m, m), 0.5)
    for i in range(m):
        for j in range(i + 1, m):
            p_ji = soft_preference(comparator.compare(ids[i], ids[j]))
            if symmetrize:
                p_ij_rev = soft_preference(comparator.compare(ids[j], ids[i]))
                p_ji = 0.5 * (p_ji + (1.0 - p_ij_rev))
            values[j, i] = p_ji
            values[i, j] = 1.0 - p_ji
    return PreferenceMatrix(values)


def extend_matrix(anchor_matrix: PreferenceMatrix, b) -> PreferenceMatrix:
    """Add one row/column for a test image.

    ``b[n]`` is the probability that the test image is preferred over
    anchor n; it becomes the last row, its complement the last column.
    """
    b = np.asarray(b, dtype=np.float64)
    m = anchor_matrix.n
    if b.shape != (m,):
        raise MatrixError(f"extension vector has shape {b.shape}, expected ({m},)")
    if np.any(b < 0) or np.any(b > 1):
        raise MatrixError("extension entries must lie in [0, 1]")
    values = np.full((m + 1, m + 1), 0.5)
    values[:m, :m] = anchor_matrix.values
    values[m, :m] = b
    values[:m, m] = 1.0 - b
    return PreferenceMatrix(values)


def build_count_matrix(anchor_set: AnchorSet, test: str, comparator) -> CountMatrix:
    """Hard-decision counterpart of the probability pipeline.

    Every comparison contributes its top-1 level's fixed weight w to
    entries[second][first] and 1 - w to entries[first][second]; anchors are
    compared pairwise in canonical order, then each anchor against the test
    image (test presented second).
    """
    ids = anchor_set.ids()
    m = len(ids)
    if m < 2:
        raise ValidationError(f"need at least 2 anchors, got {m}")
    values = np.zeros((m + 1, m + 1))

    def tally(first_idx, second_idx, first_id, second_id):
        level = comparator.compare(first_id, second_id).top_level()
        w = level.weight
        values[second_idx, first_idx] += w
        values[first_idx, second_idx] += 1.0 - w

    for i in range(m):
        for j in range(i + 1, m):
            tally(i, j, ids[i], ids[j])
    for i in range(m):
        tally(i, m, ids[i], test)
    return CountMatrix(values)


def _likelihood_weights(matrix) -> np.ndarray:
    """Matrix entries as likelihood weights, clamped when probabilistic."""
    if isinstance(matrix, PreferenceMatrix):
        values = matrix.values
        off_diag = ~np.eye(matrix.n, dtype=bool)
        needs_clamp = (values[off_diag] < PROB_CLAMP) | (
            values[off_diag] > 1.0 - PROB_CLAMP
        )
        if needs_clamp.any():
            warnings.warn(
                f"clamping preference entries to [{PROB_CLAMP}, {1 - PROB_CLAMP}] "
                "to keep the likelihood finite",
                stacklevel=3,
            )
        return np.clip(values, PROB_CLAMP, 1.0 - PROB_CLAMP)
    if isinstance(matrix, CountMatrix):
        return matrix.values
    raise ValidationError(
        f"solve_map expects a PreferenceMatrix or CountMatrix, got {type(matrix)!r}"
    )


def solve_map(matrix, config: SolverConfig | None = None) -> ScaleScores:
    """Latent quality scores maximizing the Case V log-posterior.

    J(q) = sum_{i != j} M[i][j] ln Phi(q_i - q_j) - w/2 |q|^2, ascended by
    damped Newton steps with a gradient fallback; the zero-sum constraint is
    enforced by recentering after every update. J is concave, so the
    optimum is unique once centered.
    """
    config = config or SolverConfig()
    weights = _likelihood_weights(matrix)
    n = weights.shape[0]
    if n < 2:
        raise ValidationError(f"need at least 2 items to scale, got {n}")
    lam = config.effective_weight

    q = np.zeros(n)
    objective, grad, hess = kernels.case_v_system(weights, q, lam)
    path = [objective]

    # Below this gradient norm the remaining objective gain (~|grad|^2) sinks
    # under float resolution, so steps are judged by gradient decrease instead.
    endgame = 1e-6

    for iteration in range(config.max_iter):
        grad_c = grad - grad.mean()
        grad_norm = float(np.linalg.norm(grad_c))
        if grad_norm <= config.tol:
            return ScaleScores(
                values=q - q.mean(),
                iterations=iteration,
                grad_norm=grad_norm,
                objective_path=tuple(path),
            )

        step, *_ = np.linalg.lstsq(hess, -grad_c, rcond=None)
        newton_ok = np.all(np.isfinite(step)) and float(grad_c @ step) > 0.0

        accepted = False
        if newton_ok and grad_norm <= endgame:
            candidate = q + step
            candidate -= candidate.mean()
            cand = kernels.case_v_system(weights, candidate, lam)
            cand_gc = cand[1] - cand[1].mean()
            if float(np.linalg.norm(cand_gc)) < grad_norm:
                q, (objective, grad, hess) = candidate, cand
                accepted = True

        if not accepted:
            directions = [step] if newton_ok else []
            directions.append(grad_c)
            for direction in directions:
                slope = float(grad_c @ direction)
                t = 1.0
                for _ in range(60):
                    candidate = q + t * direction
                    candidate -= candidate.mean()
                    cand = kernels.case_v_system(weights, candidate, lam)
                    if cand[0] > objective and cand[0] >= objective + 1e-4 * t * slope:
                        q, (objective, grad, hess) = candidate, cand
                        accepted = True
                        break
                    t *= 0.5
                if accepted:
                    break
        path.append(objective)
        if not accepted:
            raise NonConvergenceError(grad_norm, iteration + 1)

    grad_c = grad - grad.mean()
    raise NonConvergenceError(float(np.linalg.norm(grad_c)), config.max_iter)


def score_image(
    test: str,
    anchor_set: AnchorSet,
    anchor_matrix: PreferenceMatrix,
    comparator,
    config: SolverConfig | None = None,
) -> float:
    """Quality score of one test image against a fixed anchor matrix.

    The returned value is the last coordinate of the zero-sum solution: a
    relative Thurstone-scale position among the anchors.
    """
    if anchor_matrix.n != len(anchor_set):
        raise ValidationError(
            f"anchor matrix is {anchor_matrix.n}x{anchor_matrix.n} but the "
            f"anchor set holds {len(anchor_set)} anchors"
        )
    b = np.array(
        [
            soft_preference(comparator.compare(a, test))
            for a in anchor_set.ids()
        ]
    )
    extended = extend_matrix(anchor_matrix, b)
    return float(solve_map(extended, config).values[-1])


def score_many(tests, anchor_set, anchor_matrix, comparator, config=None, jobs=1):
    """Score a batch of test images, optionally across a thread pool.

    The anchor matrix is immutable and each scoring owns its solver state,
    so parallelism is limited only by the comparator's own concurrency
    contract. Result order matches ``tests``.
    """
    if jobs <= 1 or len(tests) <= 1:
        return [
            score_image(t, anchor_set, anchor_matrix, comparator, config)
            for t in tests
        ]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(
            pool.map(
                lambda t: score_image(t, anchor_set, anchor_matrix, comparator, config),
                tests,
            )
        )


def load_matrix_csv(path, kind="preference"):
    """Read a plain-text square matrix (row-major CSV of reals)."""
    rows = []
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise MatrixError(f"{path}: bad matrix row {lineno}: {exc}") from exc
    if not rows:
        raise MatrixError(f"{path}: empty matrix file")
    if kind == "count":
        return CountMatrix(rows)
    return PreferenceMatrix(rows)


def write_scores_csv(ids, scores, fh) -> None:
    """Emit image_id,score lines (shortest round-trip float form)."""
    writer = csv.writer(fh)
    writer.writerow(["image_id", "score"])
    for image_id, score in zip(ids, scores):
        writer.writerow([image_id, repr(float(score))])
