"""Dataset ingestion, sketch persistence, and report files.

Sketch file layout (all little-endian)::

    offset  size  field
    0       4     magic b"ACE1"
    4       4     dim            uint32
    8       4     k_bits         uint32
    12      4     num_tables     uint32
    16      4     counter_width  uint32 (16 or 32)
    20      8     seed           uint64
    28      8     noise_scale    float64
    36      8     n              uint64
    44      8     mean           float64
    52      1     saturated      uint8
    53      3     padding
    56      ...   counters, num_tables * 2**k_bits, table-major
"""

from __future__ import annotations

import csv
import json
import os
import struct

import numpy as np

from .core import HEADER_BYTES, AceSketch
from .estimators import Dataset, EstimatorComparison
from .exceptions import DataError
from .srp import MAX_K_BITS, SrpFamily

MAGIC = b"ACE1"
_HEADER = struct.Struct("<4sIIIIQdQdB3x")
assert _HEADER.size == HEADER_BYTES


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def load_dataset(path, label_column=None, header: bool | None = None, name: str | None = None) -> Dataset:
    """Read a comma-separated numeric file into a :class:`Dataset`.

    A header line is detected when the first cell is not a number (override
    with ``header``). ``label_column`` is a column index (negative counts from
    the end) or a header name; that column must hold 0/1 and becomes the labels.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: file is empty")

    names = None
    if header is None:
        header = not _is_number(rows[0][0].strip())
    if header:
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise DataError(f"{path}: no data rows after header")

    width = len(rows[0])
    first_line = 2 if header else 1
    values = np.empty((len(rows), width), dtype=np.float64)
    for i, row in enumerate(rows):
        line = first_line + i
        if len(row) != width:
            raise DataError(f"{path}: row {line} has {len(row)} columns, expected {width}")
        for j, cell in enumerate(row):
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise DataError(f"{path}: row {line}, column {j + 1}: cannot parse {cell!r} as a number") from None

    labels = None
    if label_column is not None:
        col = _resolve_column(label_column, names, width, path)
        raw = values[:, col]
        if not np.all((raw == 0) | (raw == 1)):
            bad = int(np.flatnonzero((raw != 0) & (raw != 1))[0])
            raise DataError(f"{path}: label column must be 0/1, row {first_line + bad} has {float(raw[bad])!r}")
        labels = raw.astype(bool)
        values = np.delete(values, col, axis=1)
        if values.shape[1] == 0:
            raise DataError(f"{path}: no feature columns left after removing labels")

    zero = np.flatnonzero(~values.any(axis=1))
    if zero.size:
        lines = (zero + first_line).tolist()
        raise DataError(f"{path}: all-zero feature vectors at rows {lines[:20]}")
    return Dataset(values, labels, name=name or os.path.basename(str(path)))


def _resolve_column(spec, names, width, path) -> int:
    if isinstance(spec, str):
        if spec.lstrip("-").isdigit():
            spec = int(spec)
        elif names is None or spec not in names:
            raise DataError(f"{path}: label column {spec!r} not found in header")
        else:
            return names.index(spec)
    col = spec + width if spec < 0 else spec
    if not 0 <= col < width:
        raise DataError(f"{path}: label column {spec} out of range for {width} columns")
    return col


def load_matrix(path, header: bool | None = None) -> np.ndarray:
    """Numeric rows of a CSV file without the zero-vector check (for queries)."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        return np.empty((0, 0))
    if header is None:
        header = not _is_number(rows[0][0].strip())
    if header:
        rows = rows[1:]
    try:
        out = np.array([[float(c) for c in r] for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
    if out.ndim != 2:
        raise DataError(f"{path}: ragged rows")
    return out


# -- sketch files -----------------------------------------------------------------


def dumps_sketch(sketch: AceSketch) -> bytes:
    f = sketch.family
    head = _HEADER.pack(
        MAGIC,
        f.dim,
        f.k_bits,
        f.num_tables,
        sketch.counter_width,
        f.seed,
        f.noise_scale,
        sketch.n,
        sketch.mean,
        int(sketch.saturated),
    )
    dtype = "<u2" if sketch.counter_width == 16 else "<u4"
    return head + sketch.counters.astype(dtype, copy=False).tobytes(order="C")


def loads_sketch(blob: bytes, cache_projections: bool = True) -> AceSketch:
    if len(blob) < HEADER_BYTES:
        raise DataError(f"sketch file truncated: {len(blob)} bytes is shorter than the header")
    magic, dim, k, L, width, seed, noise, n, mean, saturated = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise DataError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if width not in (16, 32):
        raise DataError(f"unsupported counter width {width}")
    if not 1 <= k <= MAX_K_BITS or L < 1 or dim < 1:
        raise DataError(f"invalid header: dim={dim} k_bits={k} num_tables={L}")
    count = L * (1 << k)
    dtype = np.dtype("<u2" if width == 16 else "<u4")
    expected = HEADER_BYTES + count * dtype.itemsize
    if len(blob) != expected:
        raise DataError(f"sketch payload has {len(blob)} bytes, expected {expected}")
    counters = np.frombuffer(blob, dtype=dtype, count=count, offset=HEADER_BYTES).reshape(L, 1 << k)

    family = SrpFamily(dim, k, L, seed, noise, cache_projections=cache_projections)
    sketch = AceSketch(family, width)
    sketch._restore(counters, n, mean, bool(saturated))
    if not saturated and sketch.mean != mean:
        raise DataError(f"stored mean {mean!r} does not match counters ({sketch.mean!r})")
    return sketch


def save_sketch(sketch: AceSketch, path) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(dumps_sketch(sketch))
    os.replace(tmp, path)


def load_sketch(path, cache_projections: bool = True) -> AceSketch:
    with open(path, "rb") as fh:
        return loads_sketch(fh.read(), cache_projections=cache_projections)


# -- reports ---------------------------------------------------------------------


def write_scores_csv(path, scores, flags=None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "score"] if flags is None else ["index", "score", "is_anomaly"])
        for i, s in enumerate(scores):
            row = [i, repr(float(s))]
            if flags is not None:
                row.append(int(bool(flags[i])))
            w.writerow(row)


def write_report_json(path, report: dict) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_comparison_csv(path, comparison: EstimatorComparison) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["L", "ace_mse", "rse_mse"])
        for row in comparison.rows():
            w.writerow([row["L"], repr(row["ace_mse"]), repr(row["rse_mse"])])


def write_curves_csv(path, curves: dict) -> None:
    cols = ["k", "inner", "border", "outlier"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for i, k in enumerate(curves["k"]):
            w.writerow([k] + [repr(curves[c][i]) for c in cols[1:]])
