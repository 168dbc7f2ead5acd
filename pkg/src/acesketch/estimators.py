"""Exact score oracle, random-sampling estimator, and estimator comparisons.

Everything here needs the raw data, unlike the sketch. These routines are the
ground truth the sketch is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import AceSketch
from .exceptions import ContractViolation, DomainError
from .srp import collision_probabilities


@dataclass
class Dataset:
    """An ``(n, d)`` matrix of points with optional boolean anomaly labels."""

    points: np.ndarray
    labels: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2 or self.points.shape[0] < 1 or self.points.shape[1] < 1:
            raise ContractViolation(f"points must be a non-empty 2-D array, got shape {self.points.shape}")
        zero_rows = np.flatnonzero(~self.points.any(axis=1))
        if zero_rows.size:
            raise DomainError(f"all-zero rows are not allowed (rows {zero_rows[:20].tolist()})")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=bool)
            if self.labels.shape != (self.points.shape[0],):
                raise ContractViolation(
                    f"labels must have one entry per row: {self.labels.shape} vs {self.points.shape[0]} rows"
                )

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n


def _points(data) -> np.ndarray:
    return data.points if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)


def exact_score(data, q, k_bits: int) -> float:
    """``S(q, D) = sum_i p(q, x_i)**k_bits`` by a full pass over the data."""
    if k_bits < 1:
        raise ContractViolation(f"k_bits must be >= 1, got {k_bits}")
    p = collision_probabilities(q, _points(data))
    return float(np.sum(p**k_bits))


def exact_scores(data, queries, k_bits: int) -> np.ndarray:
    return np.array([exact_score(data, q, k_bits) for q in np.asarray(queries, dtype=np.float64)])


SAMPLING_MODELS = ("subset", "replacement", "bernoulli")


def _sampling_model(sampling: str | None, with_replacement: bool) -> str:
    if sampling is None:
        return "replacement" if with_replacement else "subset"
    if sampling not in SAMPLING_MODELS:
        raise ContractViolation(f"sampling must be one of {SAMPLING_MODELS}, got {sampling!r}")
    return sampling


def _draw(rng, n: int, size: int, model: str) -> np.ndarray:
    if model == "subset":
        return rng.choice(n, size=size, replace=False)
    if model == "replacement":
        return rng.integers(0, n, size=size)
    return np.flatnonzero(rng.random(n) < size / n)


def rse_score(
    data,
    q,
    k_bits: int,
    sample_size: int,
    seed,
    with_replacement: bool = False,
    sampling: str | None = None,
) -> float:
    """Random-sampling estimate ``(n / L) * sum_{x in S} p(q, x)**K`` with ``L = sample_size``.

    ``sampling`` picks how S is drawn:

    * ``"subset"`` (default): L distinct rows, uniformly.
    * ``"replacement"`` (or ``with_replacement=True``): L independent uniform draws.
    * ``"bernoulli"``: each row kept independently with probability L/n, so
      |S| is random with mean L.

    All three are unbiased; see :func:`rse_variance` for their variances.
    """
    X = _points(data)
    n = X.shape[0]
    if not 1 <= sample_size <= n:
        raise ContractViolation(f"sample_size must be in [1, {n}], got {sample_size}")
    model = _sampling_model(sampling, with_replacement)
    idx = _draw(np.random.default_rng(seed), n, sample_size, model)
    if idx.size == 0:
        return 0.0
    p = collision_probabilities(q, X[idx])
    return float(n / sample_size * np.sum(p**k_bits))


def rse_variance(data, q, k_bits: int, sample_size: int, sampling: str = "bernoulli") -> float:
    """Exact variance of :func:`rse_score` under the given sampling model.

    With ``y_i = p_i**K``, ``S = sum(y)`` and ``L = sample_size``:

    * bernoulli:   ``(n/L - 1) * sum(y**2)``
    * replacement: ``(n * sum(y**2) - S**2) / L``
    * subset:      ``n**2 * (1 - L/n) * s2 / L`` with ``s2`` the sample variance of y
    """
    X = _points(data)
    n = X.shape[0]
    L = sample_size
    y = collision_probabilities(q, X) ** k_bits
    model = _sampling_model(sampling, False)
    if model == "bernoulli":
        return float((n / L - 1.0) * np.sum(y * y))
    if model == "replacement":
        return float((n * np.sum(y * y) - np.sum(y) ** 2) / L)
    if n == 1:
        return 0.0
    return float(n * n * (1.0 - L / n) * np.var(y, ddof=1) / L)


def derive_seed(*parts: int) -> int:
    """Deterministic 64-bit seed from a tuple of integers."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1, np.uint64)[0])


@dataclass
class EstimatorComparison:
    l_values: list[int]
    ace_mse: list[float]
    rse_mse: list[float]
    num_queries: int
    num_trials: int
    k_bits: int = 15
    query_indices: list[int] = field(default_factory=list)

    def rows(self):
        for L, a, r in zip(self.l_values, self.ace_mse, self.rse_mse):
            yield {"L": L, "ace_mse": a, "rse_mse": r}


def compare_estimators(
    data,
    k_bits: int,
    l_values,
    num_queries: int,
    num_trials: int,
    seed: int,
    with_replacement: bool = False,
    sampling: str | None = None,
) -> EstimatorComparison:
    """Mean squared error of the sketch and of RSE against the exact score, per L.

    Queries are ``num_queries`` distinct rows of the data (fewer if n is
    smaller). For each L, ``num_trials`` sketches with independent seeds are
    built over the whole dataset, and RSE uses ``sample_size = L`` with a fresh
    seed per (trial, query).
    """
    X = _points(data)
    n = X.shape[0]
    model = _sampling_model(sampling, with_replacement)
    l_values = [int(v) for v in l_values]
    if not l_values:
        raise ContractViolation("l_values must not be empty")
    if any(not 1 <= v <= n for v in l_values):
        raise ContractViolation(f"every L must be in [1, {n}], got {l_values}")
    if num_queries < 1 or num_trials < 1:
        raise ContractViolation("num_queries and num_trials must be >= 1")

    rng = np.random.default_rng(derive_seed(seed, 0))
    qidx = rng.choice(n, size=min(num_queries, n), replace=False)
    queries = X[qidx]
    truth = exact_scores(X, queries, k_bits)
    # (num_queries, n) powered collision probabilities, reused by every RSE draw
    pk = np.stack([collision_probabilities(q, X) ** k_bits for q in queries])

    ace_mse, rse_mse = [], []
    for L in l_values:
        ace_err = np.empty((num_trials, len(queries)))
        rse_err = np.empty((num_trials, len(queries)))
        for t in range(num_trials):
            sketch = AceSketch.create(X.shape[1], k_bits, L, seed=derive_seed(seed, 1, L, t), counter_width=32)
            sketch.insert_many(X)
            ace_err[t] = sketch.score_many(queries) - truth
            trial_rng = np.random.default_rng(derive_seed(seed, 2, L, t))
            for i in range(len(queries)):
                idx = _draw(trial_rng, n, L, model)
                rse_err[t, i] = n / L * pk[i, idx].sum() - truth[i]
        ace_mse.append(float(np.mean(ace_err**2)))
        rse_mse.append(float(np.mean(rse_err**2)))

    return EstimatorComparison(
        l_values, ace_mse, rse_mse, len(queries), num_trials, k_bits, [int(i) for i in qidx]
    )


def variance_decomposition(data, q, k_bits: int, num_trials: int, seed: int, chunk: int = 256):
    """Split the single-array variance of the sketch estimate into two parts.

    Returns ``(diagonal_term, covariance_term)`` where the diagonal term is the
    analytic ``sum_i p_i^K (1 - p_i^K)`` and the covariance term is the
    empirical single-array variance over ``num_trials`` independent arrays
    minus that diagonal. A negative covariance term means the sketch beats the
    independent-collision baseline.
    """
    X = _points(data)
    if X.shape[0] > 2000:
        raise ContractViolation(f"variance_decomposition is limited to n <= 2000, got {X.shape[0]}")
    if num_trials < 2:
        raise ContractViolation("num_trials must be >= 2")
    pk = collision_probabilities(q, X) ** k_bits
    diagonal = float(np.sum(pk * (1.0 - pk)))

    counts = []
    done = 0
    block = 0
    while done < num_trials:
        tables = min(chunk, num_trials - done)
        # each table of a wide sketch is an independent single-array sketch
        sketch = AceSketch.create(X.shape[1], k_bits, tables, seed=derive_seed(seed, block), counter_width=32)
        sketch.insert_many(X)
        counts.append(sketch.table_counts(q))
        done += tables
        block += 1
    counts = np.concatenate(counts).astype(np.float64)
    return diagonal, float(np.var(counts, ddof=1) - diagonal)
