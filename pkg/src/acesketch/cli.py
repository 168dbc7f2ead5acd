"""Command-line interface: ``ace <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant failure.
Errors are reported as one line on stderr::

    ace-error code=<n> kind=<usage|data|internal> message="..."
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import io
from .core import AceSketch
from .detect import detect_batch, detect_stream
from .estimators import compare_estimators
from .exceptions import AceError
from .synthetic import inner_border_outlier, normalized_score_curves

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _label_spec(text: str):
    return int(text) if text.lstrip("-").isdigit() else text


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ace", description="Arrays of locality-sensitive count estimators for anomaly detection.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def sketch_opts(sp, k=15, l=50):
        sp.add_argument("--k", type=int, default=k, help="bits per meta-hash (default %(default)s)")
        sp.add_argument("--l", type=int, default=l, help="number of counter arrays (default %(default)s)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--noise", type=float, default=0.0, help="std of Gaussian noise added before the sign")
        sp.add_argument("--counter-width", type=int, choices=(16, 32), default=16)

    sp = sub.add_parser("build", help="build a sketch from a CSV file and save it")
    sp.add_argument("--input", required=True)
    sp.add_argument("--labels", type=_label_spec, default=None, help="label column to drop before hashing")
    sp.add_argument("--out", required=True)
    sketch_opts(sp)

    sp = sub.add_parser("score", help="score query rows against a saved sketch")
    sp.add_argument("--sketch", required=True)
    sp.add_argument("--queries", required=True)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("detect", help="build then flag rows scoring below mean - std")
    sp.add_argument("--input", required=True)
    sp.add_argument("--labels", type=_label_spec, default=None)
    sp.add_argument("--out", required=True)
    sp.add_argument("--scores-out", default=None, help="optional per-row score CSV")
    sp.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    sketch_opts(sp)

    sp = sub.add_parser("stream", help="score queries one by one with the mean - alpha rule")
    sp.add_argument("--sketch", required=True)
    sp.add_argument("--queries", required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--adapt", action="store_true", help="insert each query after scoring and save the sketch")
    sp.add_argument("--out", default=None, help="CSV of scores and flags (default: stdout)")

    sp = sub.add_parser("compare", help="MSE of the sketch estimator vs random sampling")
    sp.add_argument("--input", required=True)
    sp.add_argument("--labels", type=_label_spec, default=None)
    sp.add_argument("--k", type=int, default=15)
    sp.add_argument("--l-list", type=_int_list, default=[8, 16, 32, 64])
    sp.add_argument("--queries", type=int, default=50)
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--with-replacement", action="store_true")
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("simulate", help="normalized exact score vs K on a synthetic layout")
    sp.add_argument("--layout", choices=("inner-border-outlier",), default="inner-border-outlier")
    sp.add_argument("--k-max", type=int, default=20)
    sp.add_argument("--n", type=int, default=500)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--data-out", default=None, help="also write the generated points")
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("info", help="print a sketch header and its memory use")
    sp.add_argument("--sketch", required=True)
    return p


def _build(data_points, args) -> AceSketch:
    sketch = AceSketch.create(
        data_points.shape[1], args.k, args.l, args.seed, args.noise, counter_width=args.counter_width
    )
    sketch.insert_many(data_points)
    return sketch


def cmd_build(args) -> int:
    data = io.load_dataset(args.input, args.labels)
    start = time.perf_counter()
    sketch = _build(data.points, args)
    build_seconds = time.perf_counter() - start
    io.save_sketch(sketch, args.out)
    print(json.dumps({"n": sketch.n, "mean": sketch.mean, "build_seconds": build_seconds}))
    return EXIT_OK


def cmd_score(args) -> int:
    sketch = io.load_sketch(args.sketch)
    Q = io.load_matrix(args.queries)
    scores = sketch.score_many(Q) if Q.size else np.empty(0)
    io.write_scores_csv(args.out, scores)
    return EXIT_OK


def cmd_detect(args) -> int:
    data = io.load_dataset(args.input, args.labels)
    start = time.perf_counter()
    sketch = _build(data.points, args)
    build_seconds = time.perf_counter() - start
    report = detect_batch(sketch, data, threads=args.threads)
    report.build_seconds = build_seconds
    out = report.to_dict()
    out.update(k_bits=args.k, num_tables=args.l, seed=args.seed, saturated=sketch.saturated)
    io.write_report_json(args.out, out)
    if args.scores_out:
        io.write_scores_csv(args.scores_out, sketch.score_many(data.points), report.flags)
    return EXIT_OK


def cmd_stream(args) -> int:
    sketch = io.load_sketch(args.sketch)
    Q = io.load_matrix(args.queries)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        out.write("index,score,mean,is_anomaly\n")
        for i, q in enumerate(Q):
            est, flag = detect_stream(sketch, q, args.alpha)
            out.write(f"{i},{est.value!r},{sketch.mean!r},{int(flag)}\n")
            if args.adapt:
                sketch.insert(q)
    finally:
        if out is not sys.stdout:
            out.close()
    if args.adapt:
        io.save_sketch(sketch, args.sketch)
    return EXIT_OK


def cmd_compare(args) -> int:
    data = io.load_dataset(args.input, args.labels)
    cmp = compare_estimators(
        data, args.k, args.l_list, args.queries, args.trials, args.seed, with_replacement=args.with_replacement
    )
    io.write_comparison_csv(args.out, cmp)
    return EXIT_OK


def cmd_simulate(args) -> int:
    data, classes = inner_border_outlier(n=args.n, seed=args.seed)
    curves = normalized_score_curves(data, classes, range(1, args.k_max + 1))
    io.write_curves_csv(args.out, curves)
    if args.data_out:
        with open(args.data_out, "w") as fh:
            fh.write("x,y,class\n")
            for (x, y), c in zip(data.points, classes):
                fh.write(f"{x!r},{y!r},{c or 'middle'}\n")
    return EXIT_OK


def cmd_info(args) -> int:
    sketch = io.load_sketch(args.sketch)
    f = sketch.family
    info = {
        "dim": f.dim,
        "k_bits": f.k_bits,
        "num_tables": f.num_tables,
        "counter_width": sketch.counter_width,
        "seed": f.seed,
        "noise_scale": f.noise_scale,
        "n": sketch.n,
        "mean": sketch.mean,
        "saturated": sketch.saturated,
        "counter_bytes": sketch.counter_bytes(),
        "memory_bytes": sketch.memory_bytes(),
        "projection_bytes": sketch.projection_bytes(),
    }
    print(json.dumps(info, indent=2))
    return EXIT_OK


COMMANDS = {
    "build": cmd_build,
    "score": cmd_score,
    "detect": cmd_detect,
    "stream": cmd_stream,
    "compare": cmd_compare,
    "simulate": cmd_simulate,
    "info": cmd_info,
}


def _fail(code: int, kind: str, message: str) -> int:
    print(f"ace-error code={code} kind={kind} message={json.dumps(str(message))}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", exc)
    except (AceError, OSError) as exc:
        return _fail(EXIT_DATA, "data", exc)
    except AssertionError as exc:
        return _fail(EXIT_INTERNAL, "internal", exc or "invariant failure")


if __name__ == "__main__":
    sys.exit(main())
