"""Turning sketch scores into anomaly decisions."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import AceSketch, ScoreEstimate
from .estimators import Dataset
from .exceptions import ContractViolation


@dataclass
class DetectionReport:
    """Outcome of one batch detection run.

    The label-dependent fields are ``None`` when the dataset has no labels.
    """

    reported: int
    correctly_reported: int | None
    missed: int | None
    total_labeled_anomalies: int | None
    threshold: float
    elapsed_seconds: float
    mean_score: float = 0.0
    std_score: float = 0.0
    n: int = 0
    build_seconds: float | None = None
    flags: np.ndarray = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("flags")
        return d


def _score_rows(sketch: AceSketch, X: np.ndarray, threads: int) -> np.ndarray:
    if threads <= 1 or X.shape[0] < 2 * threads:
        return sketch.score_many(X)
    chunks = np.array_split(X, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.concatenate(list(pool.map(sketch.score_many, chunks)))


def threshold_flags(scores) -> tuple[np.ndarray, float, float, float]:
    """Flag scores strictly below ``mean - std``; returns ``(flags, threshold, mean, std)``."""
    scores = np.asarray(scores, dtype=np.float64)
    mu = float(scores.mean())
    sigma = float(scores.std())
    cut = mu - sigma
    return scores < cut, cut, mu, sigma


def detect_batch(sketch: AceSketch, data: Dataset, threads: int = 1) -> DetectionReport:
    """Score every row of ``data`` against a sketch already built over it and flag
    rows below ``mean - std`` of those scores.

    Timing covers scoring and thresholding only.
    """
    if not isinstance(data, Dataset):
        data = Dataset(data)
    if data.dim != sketch.dim:
        raise ContractViolation(f"dimension mismatch: sketch expects {sketch.dim}, data has {data.dim}")

    start = time.perf_counter()
    scores = _score_rows(sketch, data.points, threads)
    flags, cut, mu, sigma = threshold_flags(scores)
    elapsed = time.perf_counter() - start

    reported = int(flags.sum())
    if data.labels is None:
        correct = missed = total = None
    else:
        total = int(data.labels.sum())
        correct = int(np.sum(flags & data.labels))
        missed = total - correct
    return DetectionReport(
        reported=reported,
        correctly_reported=correct,
        missed=missed,
        total_labeled_anomalies=total,
        threshold=cut,
        elapsed_seconds=elapsed,
        mean_score=mu,
        std_score=sigma,
        n=data.n,
        flags=flags,
    )


def detect_stream(sketch: AceSketch, q, alpha: float) -> tuple[ScoreEstimate, bool]:
    """Score ``q`` and flag it when ``score <= sketch.mean - alpha``.

    The sketch is left untouched; insert ``q`` afterwards to adapt to drift.
    """
    if alpha < 0:
        raise ContractViolation(f"alpha must be >= 0, got {alpha}")
    if sketch.n < 1:
        raise ContractViolation("detect_stream needs a non-empty sketch")
    est = sketch.score(q)
    return est, est.value <= sketch.mean - alpha
