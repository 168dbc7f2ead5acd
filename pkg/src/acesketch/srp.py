"""Signed random projections and K-bit meta-hashes.

Every projection direction is a vector of i.i.d. N(0, 1) draws. Direction
``t = table * k_bits + bit`` comes from its own PCG64 stream keyed by
``SeedSequence(entropy=seed, spawn_key=(t,))``, so a family is fully described
by ``(dim, k_bits, num_tables, seed)`` and any single direction can be rebuilt
without materialising the others.

A bit is 1 when the projection is ``>= 0`` (zero maps to 1). Bit 0 of a table
is the most significant bit of its bucket index.
"""

from __future__ import annotations

import threading

import numpy as np

from .exceptions import ContractViolation, DomainError

MAX_K_BITS = 30

# spawn_key reserved for the noise stream; direction keys are < 2**32.
_NOISE_SPAWN_KEY = 2**32 + 1


def _direction(seed: int, index: int, dim: int) -> np.ndarray:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.PCG64(ss)).standard_normal(dim)


class SrpFamily:
    """K x L signed random projections over ``dim``-dimensional inputs.

    With ``cache_projections=True`` (the default) the ``(num_tables * k_bits, dim)``
    direction matrix is held in memory. With ``False`` every direction is
    regenerated from the seed on each call, trading speed for memory.

    ``noise_scale > 0`` adds fresh N(0, noise_scale**2) noise to every
    projection before the sign is taken. Noise comes from an auxiliary stream
    (``noise_seed``, defaulting to one derived from ``seed``), so hashing the
    same vector twice may give different buckets.
    """

    def __init__(
        self,
        dim: int,
        k_bits: int = 15,
        num_tables: int = 50,
        seed: int = 0,
        noise_scale: float = 0.0,
        *,
        cache_projections: bool = True,
        noise_seed: int | None = None,
    ):
        if int(dim) < 1:
            raise ContractViolation(f"dim must be >= 1, got {dim}")
        if not 1 <= int(k_bits) <= MAX_K_BITS:
            raise ContractViolation(f"k_bits must be in [1, {MAX_K_BITS}], got {k_bits}")
        if int(num_tables) < 1:
            raise ContractViolation(f"num_tables must be >= 1, got {num_tables}")
        if not 0 <= int(seed) < 2**64:
            raise ContractViolation(f"seed must fit in an unsigned 64-bit integer, got {seed}")
        if not noise_scale >= 0.0 or not np.isfinite(noise_scale):
            raise ContractViolation(f"noise_scale must be finite and >= 0, got {noise_scale}")

        self.dim = int(dim)
        self.k_bits = int(k_bits)
        self.num_tables = int(num_tables)
        self.seed = int(seed)
        self.noise_scale = float(noise_scale)
        self.cache_projections = bool(cache_projections)

        self._weights = 1 << np.arange(self.k_bits - 1, -1, -1, dtype=np.int64)
        self._projections = self._build_matrix() if self.cache_projections else None

        if noise_seed is None:
            noise_ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(_NOISE_SPAWN_KEY,))
        else:
            noise_ss = np.random.SeedSequence(entropy=int(noise_seed))
        self._noise_rng = np.random.Generator(np.random.PCG64(noise_ss))
        self._noise_lock = threading.Lock()

    def __repr__(self) -> str:
        return (
            f"SrpFamily(dim={self.dim}, k_bits={self.k_bits}, num_tables={self.num_tables}, "
            f"seed={self.seed}, noise_scale={self.noise_scale})"
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SrpFamily):
            return NotImplemented
        return self.config == other.config

    def __hash__(self) -> int:
        return hash(self.config)

    @property
    def config(self) -> tuple:
        return (self.dim, self.k_bits, self.num_tables, self.seed, self.noise_scale)

    @property
    def num_directions(self) -> int:
        return self.k_bits * self.num_tables

    @property
    def num_buckets(self) -> int:
        return 1 << self.k_bits

    def _build_matrix(self) -> np.ndarray:
        out = np.empty((self.num_directions, self.dim), dtype=np.float64)
        for t in range(self.num_directions):
            out[t] = _direction(self.seed, t, self.dim)
        return out

    def direction(self, table: int, bit: int) -> np.ndarray:
        """The projection vector used for bit ``bit`` of table ``table``."""
        self._check_index(table, bit)
        t = table * self.k_bits + bit
        if self._projections is not None:
            return self._projections[t].copy()
        return _direction(self.seed, t, self.dim)

    def projections(self) -> np.ndarray:
        """All directions as a ``(num_tables * k_bits, dim)`` matrix (row = table * k_bits + bit)."""
        if self._projections is not None:
            return self._projections
        return self._build_matrix()

    def projection_bytes(self) -> int:
        """Bytes held by the cached direction matrix (0 when regenerating on the fly)."""
        return 0 if self._projections is None else self._projections.nbytes

    # -- hashing ---------------------------------------------------------

    def _check_index(self, table: int, bit: int | None = None) -> None:
        if not 0 <= table < self.num_tables:
            raise ContractViolation(f"table index {table} out of range [0, {self.num_tables})")
        if bit is not None and not 0 <= bit < self.k_bits:
            raise ContractViolation(f"bit index {bit} out of range [0, {self.k_bits})")

    def _as_matrix(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.dim:
            got = X.shape[-1] if X.ndim >= 1 else 0
            raise ContractViolation(f"dimension mismatch: expected length {self.dim}, got {got}")
        return X

    def _noise(self, shape) -> np.ndarray:
        with self._noise_lock:
            return self._noise_rng.normal(0.0, self.noise_scale, size=shape)

    def _raw_projections(self, X: np.ndarray, rows: slice | None = None) -> np.ndarray:
        if self._projections is not None:
            P = self._projections if rows is None else self._projections[rows]
            proj = X @ P.T
        else:
            idx = range(self.num_directions)[rows or slice(None)]
            proj = np.empty((X.shape[0], len(idx)))
            for col, t in enumerate(idx):
                proj[:, col] = X @ _direction(self.seed, t, self.dim)
        if self.noise_scale > 0.0:
            proj = proj + self._noise(proj.shape)
        return proj

    def bits_many(self, X) -> np.ndarray:
        """Hash bits for every row of ``X`` as a ``(n, num_tables, k_bits)`` uint8 array."""
        X = self._as_matrix(X)
        proj = self._raw_projections(X)
        return (proj >= 0.0).astype(np.uint8).reshape(X.shape[0], self.num_tables, self.k_bits)

    def hash_many(self, X) -> np.ndarray:
        """Bucket index of every row in every table, shape ``(n, num_tables)``."""
        return self.bits_many(X).astype(np.int64) @ self._weights

    def hash(self, x) -> np.ndarray:
        """Bucket index of ``x`` in each of the ``num_tables`` tables."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1:
            raise ContractViolation(f"expected a 1-D vector, got shape {x.shape}")
        return self.hash_many(x)[0]

    def srp_bit(self, table: int, bit: int, x) -> int:
        """Single sign bit: 1 if ``w . x (+ noise) >= 0`` else 0."""
        self._check_index(table, bit)
        X = self._as_matrix(x)
        t = table * self.k_bits + bit
        return int(self._raw_projections(X, slice(t, t + 1))[0, 0] >= 0.0)

    def meta_hash(self, table: int, x) -> int:
        """K-bit bucket index of ``x`` in ``table``; bit 0 is the most significant."""
        self._check_index(table)
        X = self._as_matrix(x)
        start = table * self.k_bits
        bits = self._raw_projections(X, slice(start, start + self.k_bits))[0] >= 0.0
        return int(bits.astype(np.int64) @ self._weights)


def collision_probability(x, y) -> float:
    """Probability that one SRP bit agrees on ``x`` and ``y``: ``1 - angle(x, y) / pi``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ContractViolation(f"vectors must be 1-D of equal length, got {x.shape} and {y.shape}")
    xx = float(np.dot(x, x))
    yy = float(np.dot(y, y))
    if xx == 0.0 or yy == 0.0:
        raise DomainError("collision probability is undefined for a zero vector")
    # sqrt(a * a) == a in IEEE arithmetic, so parallel inputs give exactly 1
    cos = np.clip(np.dot(x, y) / np.sqrt(xx * yy), -1.0, 1.0)
    return float(1.0 - np.arccos(cos) / np.pi)


def collision_probabilities(q, X) -> np.ndarray:
    """Vectorised :func:`collision_probability` of ``q`` against every row of ``X``."""
    q = np.asarray(q, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or q.ndim != 1 or X.shape[1] != q.shape[0]:
        raise ContractViolation(f"dimension mismatch: query {q.shape} vs data {X.shape}")
    # same elementwise product and summation for dots and norms, so a row equal
    # to q gets a cosine of exactly 1
    qq = float((q * q).sum())
    xx = (X * X).sum(axis=1)
    if qq == 0.0 or np.any(xx == 0.0):
        raise DomainError("collision probability is undefined for a zero vector")
    cos = np.clip((X * q).sum(axis=1) / np.sqrt(xx * qq), -1.0, 1.0)
    return 1.0 - np.arccos(cos) / np.pi
