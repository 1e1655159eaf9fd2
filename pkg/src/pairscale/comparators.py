"""Pairwise comparison backends.

Three implementations of the same contract: ``compare(first, second)``
returns five finite logits over the comparative levels, describing the
second image relative to the first. The oracle backend is an analytically
known comparator for desk-scale verification; the cache backend replays
stored logits; the remote backend talks to a bridge service over HTTP.
"""

import hashlib
import json
import math
import os
import random
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import httpx
import numpy as np

from .corpus import ComparativeLevel, QualityDifference, classify_level, quality_difference
from .dataset import ImageRecord
from .errors import (
    CacheMissError,
    ParseError,
    ProtocolError,
    TransportError,
    UnresolvableReferenceError,
    ValidationError,
)

#: floor applied to band masses before taking logs in the deterministic oracle
MASS_FLOOR = 1e-12

#: logit assigned to non-chosen levels by the stochastic oracle
OFF_LEVEL_LOGIT = -20.0

LEVEL_NAMES = tuple(lvl.label for lvl in ComparativeLevel)

ENDPOINT_ENV_VAR = "PAIRSCALE_ENDPOINT"


@dataclass(frozen=True)
class ComparisonLogits:
    """Five real logits ordered over the levels inferior -> superior."""

    values: tuple[float, float, float, float, float]

    def __post_init__(self):
        if len(self.values) != 5:
            raise ValidationError(f"expected 5 logits, got {len(self.values)}")
        if not all(math.isfinite(v) for v in self.values):
            raise ValidationError(f"non-finite logits: {self.values}")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    def top_level(self) -> ComparativeLevel:
        """Hard argmax level; ties resolve to the lower ordinal."""
        best = max(self.values)
        return ComparativeLevel(self.values.index(best))


class Comparator(Protocol):
    def compare(self, first: str, second: str) -> ComparisonLogits: ...


@dataclass(frozen=True)
class ComparatorConfig:
    backend: str = "oracle"
    oracle_mode: str = "deterministic"
    noise_scale: float = 0.0
    seed: int = 0
    endpoint: str | None = None
    cache_path: str | Path | None = None

    def __post_init__(self):
        if self.backend not in ("oracle", "cache", "remote"):
            raise ValidationError(f"unknown comparator backend {self.backend!r}")
        if self.oracle_mode not in ("deterministic", "stochastic"):
            raise ValidationError(f"unknown oracle mode {self.oracle_mode!r}")
        if self.noise_scale < 0:
            raise ValidationError("noise_scale must be >= 0")
        if self.backend == "remote" and not self.endpoint:
            raise ValidationError("remote backend requires an endpoint")
        if self.backend != "remote" and self.endpoint:
            raise ValidationError("endpoint only applies to the remote backend")
        if self.backend == "cache" and not self.cache_path:
            raise ValidationError("cache backend requires cache_path")
        if self.backend != "cache" and self.cache_path:
            raise ValidationError("cache_path only applies to the cache backend")


def _ndtr(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def band_masses(z: float) -> tuple[float, float, float, float, float]:
    """Probability of each level when the normalized difference is z.

    A standard normal draw centered at z is cut at the significance
    thresholds -2, -1, 1, 2; masses are ordered inferior -> superior.
    """
    return (
        1.0 - _ndtr(2.0 - z),
        _ndtr(2.0 - z) - _ndtr(1.0 - z),
        _ndtr(1.0 - z) - _ndtr(-1.0 - z),
        _ndtr(-1.0 - z) - _ndtr(-2.0 - z),
        _ndtr(-2.0 - z),
    )


class OracleComparator:
    """Analytic comparator driven by ground-truth MOS and rating spread.

    Deterministic mode returns the log band masses of the normalized MOS
    difference, so every downstream stage can be checked against closed
    forms. Stochastic mode draws one difference sample per ordered pair
    (derived deterministically from the seed and the pair, so repeated
    calls agree) and returns near-one-hot logits, optionally perturbed.
    """

    def __init__(self, records, mode="deterministic", noise_scale=0.0, seed=0):
        if mode not in ("deterministic", "stochastic"):
            raise ValidationError(f"unknown oracle mode {mode!r}")
        self._records = {r.image_id: r for r in records}
        self._mode = mode
        self._noise_scale = noise_scale
        self._seed = seed

    def _resolve(self, image_id: str) -> ImageRecord:
        try:
            return self._records[image_id]
        except KeyError:
            raise UnresolvableReferenceError(
                f"oracle has no record for image {image_id!r}"
            ) from None

    def compare(self, first: str, second: str) -> ComparisonLogits:
        d = quality_difference(self._resolve(first), self._resolve(second))
        if self._mode == "deterministic":
            z = d.mean_diff / d.std_diff
            logits = tuple(
                math.log(max(m, MASS_FLOOR)) for m in band_masses(z)
            )
            return ComparisonLogits(logits)

        digest = hashlib.sha256(
            f"{self._seed}|{first}|{second}".encode()
        ).digest()
        rng = random.Random(int.from_bytes(digest[:8], "big"))
        draw = rng.gauss(d.mean_diff, d.std_diff)
        level = classify_level(QualityDifference(draw, d.std_diff))
        logits = [OFF_LEVEL_LOGIT] * 5
        logits[level.value] = 0.0
        if self._noise_scale > 0:
            logits = [v + rng.gauss(0.0, self._noise_scale) for v in logits]
        return ComparisonLogits(tuple(logits))


class CacheComparator:
    """Replays logits stored as JSON Lines, keyed by the ordered pair.

    No implicit mirroring: (b, a) is a miss when only (a, b) was stored,
    because real comparators exhibit genuine position bias.
    """

    def __init__(self, path):
        self._path = Path(path)
        self._entries: dict[tuple[str, str], ComparisonLogits] = {}
        with open(self._path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    key = (obj["first"], obj["second"])
                    logits = ComparisonLogits(tuple(float(v) for v in obj["logits"]))
                except (ValueError, KeyError, TypeError) as exc:
                    raise ParseError(
                        f"{self._path}: bad cache line {lineno}: {exc}"
                    ) from exc
                if key in self._entries:
                    raise ParseError(
                        f"{self._path}: duplicate pair {key} at line {lineno}"
                    )
                self._entries[key] = logits

    def __len__(self):
        return len(self._entries)

    def compare(self, first: str, second: str) -> ComparisonLogits:
        try:
            return self._entries[(first, second)]
        except KeyError:
            raise CacheMissError(
                f"no cached logits for ordered pair ({first!r}, {second!r})"
            ) from None


def write_cache(entries, path) -> int:
    """Persist (first, second, logits) triples in the cache file format."""
    path = Path(path)
    written = 0
    with open(path, "w", encoding="utf-8") as fh:
        for first, second, logits in entries:
            values = list(logits.values) if isinstance(logits, ComparisonLogits) else list(logits)
            fh.write(json.dumps({"first": first, "second": second, "logits": values}))
            fh.write("\n")
            written += 1
    return written


class RemoteComparator:
    """HTTP client for the bridge service's POST /v1/compare.

    Retries transport failures up to ``max_attempts`` with exponential
    backoff; protocol problems (bad status, malformed body) are never
    retried. At most ``max_in_flight`` requests are outstanding at once.
    """

    def __init__(
        self,
        endpoint,
        timeout=30.0,
        max_attempts=3,
        backoff=0.25,
        max_in_flight=4,
        transport=None,
    ):
        self._endpoint = endpoint.rstrip("/")
        self._max_attempts = max_attempts
        self._backoff = backoff
        self._gate = threading.BoundedSemaphore(max_in_flight)
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def close(self):
        self._client.close()

    def compare(self, first: str, second: str) -> ComparisonLogits:
        url = f"{self._endpoint}/v1/compare"
        body = {"first_image": first, "second_image": second}
        last_exc = None
        for attempt in range(self._max_attempts):
            if attempt:
                time.sleep(self._backoff * 2 ** (attempt - 1))
            try:
                with self._gate:
                    response = self._client.post(url, json=body)
            except httpx.TransportError as exc:
                last_exc = exc
                continue
            return self._parse(response, first, second)
        raise TransportError(
            f"{url} unreachable after {self._max_attempts} attempts "
            f"for pair ({first!r}, {second!r}): {last_exc}"
        ) from last_exc

    def _parse(self, response, first, second) -> ComparisonLogits:
        if response.status_code != 200:
            raise ProtocolError(
                f"compare of ({first!r}, {second!r}) failed: "
                f"status {response.status_code}: {response.text[:200]}"
            )
        try:
            payload = response.json()
            logits = payload["logits"]
        except (ValueError, KeyError) as exc:
            raise ProtocolError(f"malformed compare response: {exc}") from exc
        if set(logits) != set(LEVEL_NAMES):
            raise ProtocolError(
                f"level keys {sorted(logits)} != expected {sorted(LEVEL_NAMES)}"
            )
        try:
            values = tuple(float(logits[name]) for name in LEVEL_NAMES)
        except (TypeError, ValueError) as exc:
            raise ProtocolError(f"non-numeric logit in response: {exc}") from exc
        if not all(math.isfinite(v) for v in values):
            raise ProtocolError(f"non-finite logits in response: {values}")
        return ComparisonLogits(values)


def build_comparator(config: ComparatorConfig, records=None) -> Comparator:
    """Instantiate the backend described by a ComparatorConfig."""
    if config.backend == "oracle":
        if records is None:
            raise ValidationError("oracle backend needs ground-truth records")
        return OracleComparator(
            records,
            mode=config.oracle_mode,
            noise_scale=config.noise_scale,
            seed=config.seed,
        )
    if config.backend == "cache":
        return CacheComparator(config.cache_path)
    endpoint = config.endpoint or os.environ.get(ENDPOINT_ENV_VAR)
    if not endpoint:
        raise ValidationError(
            f"remote backend requires an endpoint (flag or {ENDPOINT_ENV_VAR})"
        )
    return RemoteComparator(endpoint)
