"""The ACE sketch: L arrays of 2^K counters plus an exactly maintained mean score."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import ContractViolation, InconsistentDeleteError, UnsupportedOperationError
from .srp import SrpFamily

COUNTER_DTYPES = {16: np.uint16, 32: np.uint32}

# Fixed size of the on-disk header; see acesketch.io.
HEADER_BYTES = 56


class SaturationWarning(RuntimeWarning):
    """A counter hit its maximum value; scores from this sketch are degraded."""


@dataclass(frozen=True)
class ScoreEstimate:
    value: float
    k_bits: int
    num_tables: int

    def __float__(self) -> float:
        return self.value


class AceSketch:
    """Counts of hashed items from which ``S(q, D) = sum_i p(q, x_i)^K`` is estimated.

    Each inserted vector increments one counter per table, at its meta-hash
    bucket. ``score(q)`` averages the L counters at ``q``'s buckets. No data
    points are retained.

    ``mean`` is the average estimated score of the summarised items, always
    consistent with the current counters. Internally it is kept as the integer
    ``sum_j sum_b A_j[b]**2`` (which equals ``L * n * mean``), updated by
    ``2c + 1`` on increment and ``2c - 1`` on decrement where ``c`` is the
    counter value before the update.

    Counters saturate at their maximum instead of wrapping. Once that happens
    ``saturated`` stays True and the scores and mean are no longer exact.

    Not safe for concurrent writers; concurrent ``score`` calls are fine.
    """

    def __init__(self, family: SrpFamily, counter_width: int = 16):
        if counter_width not in COUNTER_DTYPES:
            raise ContractViolation(f"counter_width must be 16 or 32, got {counter_width}")
        self.family = family
        self.counter_width = counter_width
        self._counters = np.zeros((family.num_tables, family.num_buckets), dtype=COUNTER_DTYPES[counter_width])
        self._max = int(np.iinfo(self._counters.dtype).max)
        self._rows = np.arange(family.num_tables)
        self.n = 0
        self._sq_sum = 0
        self.saturated = False

    @classmethod
    def create(
        cls,
        dim: int,
        k_bits: int = 15,
        num_tables: int = 50,
        seed: int = 0,
        noise_scale: float = 0.0,
        counter_width: int = 16,
        **family_kwargs,
    ) -> "AceSketch":
        family = SrpFamily(dim, k_bits, num_tables, seed, noise_scale, **family_kwargs)
        return cls(family, counter_width)

    @classmethod
    def from_data(cls, X, dim: int | None = None, **kwargs) -> "AceSketch":
        X = np.asarray(X, dtype=np.float64)
        sketch = cls.create(dim if dim is not None else X.shape[1], **kwargs)
        sketch.insert_many(X)
        return sketch

    def __repr__(self) -> str:
        return (
            f"AceSketch(k_bits={self.k_bits}, num_tables={self.num_tables}, n={self.n}, "
            f"mean={self.mean:.6g}, saturated={self.saturated})"
        )

    @property
    def dim(self) -> int:
        return self.family.dim

    @property
    def k_bits(self) -> int:
        return self.family.k_bits

    @property
    def num_tables(self) -> int:
        return self.family.num_tables

    @property
    def counters(self) -> np.ndarray:
        """Read-only view of the ``(num_tables, 2**k_bits)`` counter arrays."""
        view = self._counters.view()
        view.flags.writeable = False
        return view

    @property
    def mean(self) -> float:
        if self.n == 0:
            return 0.0
        return self._sq_sum / (self.num_tables * self.n)

    @property
    def degraded(self) -> bool:
        return self.saturated

    # -- updates -----------------------------------------------------------

    def _mark_saturated(self) -> None:
        if not self.saturated:
            warnings.warn("counter saturated; sketch accuracy is degraded", SaturationWarning, stacklevel=3)
        self.saturated = True

    def insert(self, x) -> None:
        self._insert_buckets(self.family.hash(x))

    def insert_many(self, X) -> None:
        """Insert every row of ``X``; same end state as calling :meth:`insert` per row."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ContractViolation(f"expected a 2-D array of rows, got shape {X.shape}")
        if X.shape[0] == 0:
            return
        buckets = self.family.hash_many(X)
        flat = (buckets + (self._rows * self.family.num_buckets)[None, :]).ravel()
        hits = np.bincount(flat, minlength=self._counters.size).reshape(self._counters.shape)
        total = self._counters.astype(np.int64) + hits
        if total.max() > self._max:
            # Order matters once counters clip; replay row by row.
            for b in buckets:
                self._insert_buckets(b)
            return
        before = self._counters.astype(np.int64)
        # sum over new hits of (2c + 1) telescopes to total**2 - before**2
        self._sq_sum += int(np.sum(total * total - before * before))
        self._counters[...] = total
        self.n += X.shape[0]

    def _insert_buckets(self, buckets: np.ndarray) -> None:
        before = self._counters[self._rows, buckets].astype(np.int64)
        room = before < self._max
        if not room.all():
            self._mark_saturated()
        self._counters[self._rows[room], buckets[room]] += 1
        self._sq_sum += int(np.sum(2 * before[room] + 1))
        self.n += 1

    def delete(self, x) -> None:
        """Remove one previously inserted copy of ``x``.

        Raises InconsistentDeleteError, leaving the sketch untouched, if any of
        ``x``'s counters is already zero.
        """
        if self.family.noise_scale > 0.0:
            raise UnsupportedOperationError("delete is not supported when noise_scale > 0")
        if self.n == 0:
            raise InconsistentDeleteError("cannot delete from an empty sketch")
        buckets = self.family.hash(x)
        before = self._counters[self._rows, buckets].astype(np.int64)
        if np.any(before == 0):
            tables = np.flatnonzero(before == 0).tolist()
            raise InconsistentDeleteError(f"item was never inserted: zero counter in tables {tables[:10]}")
        self._counters[self._rows, buckets] -= 1
        self._sq_sum -= int(np.sum(2 * before - 1))
        self.n -= 1
        if self.n == 0:
            self.clear()

    def clear(self) -> None:
        self._counters[...] = 0
        self.n = 0
        self._sq_sum = 0
        self.saturated = False

    # -- queries -----------------------------------------------------------

    def table_counts(self, q) -> np.ndarray:
        """The L counters at ``q``'s buckets (each an independent estimate of the score)."""
        return self._counters[self._rows, self.family.hash(q)].astype(np.int64)

    def score(self, q) -> ScoreEstimate:
        value = float(self.table_counts(q).sum()) / self.num_tables
        return ScoreEstimate(value, self.k_bits, self.num_tables)

    def score_many(self, Q) -> np.ndarray:
        buckets = self.family.hash_many(Q)
        counts = self._counters[self._rows[None, :], buckets].astype(np.int64)
        return counts.sum(axis=1) / self.num_tables

    # -- memory --------------------------------------------------------------

    def counter_bytes(self) -> int:
        return self.num_tables * self.family.num_buckets * (self.counter_width // 8)

    def memory_bytes(self) -> int:
        """Counter storage plus the fixed header; excludes cached projections."""
        return self.counter_bytes() + HEADER_BYTES

    def projection_bytes(self) -> int:
        return self.family.projection_bytes()

    # -- persistence helpers ---------------------------------------------------

    def _restore(self, counters: np.ndarray, n: int, mean: float, saturated: bool) -> None:
        self._counters[...] = counters
        self.n = int(n)
        self.saturated = bool(saturated)
        if self.saturated:
            # clipped counters no longer determine the mean
            self._sq_sum = round(mean * self.num_tables * self.n)
        else:
            c = self._counters.astype(np.int64)
            self._sq_sum = int(np.sum(c * c))
