"""Command-line interface.

Exit codes: 0 on success, 1 on invalid arguments, 2 when an index disagrees
with the linear-scan oracle, 3 on I/O or parse errors.
"""

import argparse
import logging
import sys

import numpy as np

from .bench import BenchConfig, METHODS, load_dataset, report_csv, run_bench
from .exceptions import (DuplicatePointError, IndexFormatError, OracleMismatchError,
                         PointFileError)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MISMATCH = 2
EXIT_IO = 3

log = logging.getLogger("voronoi_nns")


class _Parser(argparse.ArgumentParser):
    # exit status 2 is reserved for oracle mismatches
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_source(p, dim_default=3):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="point file (.xyz, .obj or ascii .ply)")
    src.add_argument("--gen", metavar="KIND:N",
                     help="synthetic cloud: sphere, jittered_line or uniform_cube")
    p.add_argument("--dim", type=int, default=dim_default, choices=(2, 3),
                   help="dimension of generated clouds")
    p.add_argument("--seed", type=int, default=0)


def _config(args, **extra):
    return BenchConfig(input_path=args.input, generator=args.gen,
                       dimension=args.dim, seed=args.seed, **extra)


def _points(args):
    return load_dataset(_config(args, queries=0))[1]


def _cmd_bench(args):
    cfg = _config(args, methods=args.strategies, scale=args.scale,
                  queries=args.queries, out=args.out, threads=args.threads)
    rows = run_bench(cfg)
    if not args.out:
        sys.stdout.write(report_csv(rows))
    return EXIT_OK


def _cmd_build(args):
    from .estimators import make_order
    from .qtable import build, save_index
    pts = _points(args)
    order = make_order(pts, args.strategy, args.seed, args.start)
    index = build(pts, order, seed=args.seed)
    save_index(index, args.out)
    log.info("wrote %s: n=%d, %d list entries", args.out, index.n,
             index.table.entries.shape[0])
    return EXIT_OK


def _cmd_query(args):
    from .qtable import load_index, nearest_batch
    index = load_index(args.index)
    rows = []
    for lineno, line in enumerate(args.queries, 1):
        tok = line.split()
        if not tok:
            continue
        try:
            vals = [float(t) for t in tok]
        except ValueError:
            raise PointFileError(f"stdin:{lineno}: non-numeric coordinate",
                                 line=lineno) from None
        if len(vals) != index.dimension:
            raise PointFileError(
                f"stdin:{lineno}: expected {index.dimension} coordinates, got {len(vals)}",
                line=lineno)
        rows.append(vals)
    if not rows:
        return EXIT_OK
    k = args.prefix_k
    ans, _ = nearest_batch(index, np.array(rows), k)
    sys.stdout.write("".join(f"{int(a)}\n" for a in ans))
    return EXIT_OK


def _read_dpc_csv(path):
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            tok = [t.strip() for t in line.strip().split(",")]
            if not line.strip():
                continue
            if len(tok) != 3:
                raise PointFileError(f"{path}:{lineno}: expected x,y,rho", path=path,
                                     line=lineno)
            try:
                rows.append([float(t) for t in tok])
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise PointFileError(f"{path}:{lineno}: non-numeric value", path=path,
                                     line=lineno) from None
    if not rows:
        raise PointFileError(f"{path}: no rows", path=path)
    return np.array(rows)


def _cmd_dpc(args):
    from .applications import dpc_delta
    data = _read_dpc_csv(args.input)
    res = dpc_delta(data[:, :2], data[:, 2])
    lines = ["delta,nearest_higher\n"]
    lines += [f"{float(d)!r},{int(h)}\n" for d, h in zip(res.delta, res.nearest_higher)]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.writelines(lines)
    else:
        sys.stdout.writelines(lines)
    log.info("distance evaluations: %d", res.distance_evaluations)
    return EXIT_OK


def _cmd_fps(args):
    from .applications import fps_sample
    pts = _points(args)
    m = pts.shape[0] if args.m is None else args.m
    idx = fps_sample(pts, m, args.start)
    sys.stdout.write("".join(f"{int(i)}\n" for i in idx))
    return EXIT_OK


def _cmd_validate(args):
    from .validation import validate_dataset
    pts = _points(args)
    report = validate_dataset(pts, queries=args.queries, scale=args.scale,
                              seed=args.seed, check_triangulation=args.triangulation)
    for line in report:
        print(line)
    return EXIT_OK


def make_parser():
    p = _Parser(prog="voronoi-nns",
                description="Exact nearest-neighbour search with Delaunay Query Tables.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bench", help="compare the Query Table with baselines")
    _add_source(b)
    b.add_argument("--strategies", default=",".join(METHODS),
                   help=f"comma list from {', '.join(METHODS)} (or identity/spatial/fps)")
    b.add_argument("--scale", type=float, default=2.0, help="query box scale (>= 1)")
    b.add_argument("--queries", type=int, default=10_000)
    b.add_argument("--out", help="CSV path; a JSON mirror is written next to it")
    b.add_argument("--threads", type=int, default=1)
    b.set_defaults(func=_cmd_bench)

    bd = sub.add_parser("build", help="build and save an index")
    _add_source(bd)
    bd.add_argument("--strategy", default="fps", choices=("identity", "spatial", "fps"))
    bd.add_argument("--start", type=int, default=0, help="FPS seed point")
    bd.add_argument("--out", required=True)
    bd.set_defaults(func=_cmd_build)

    q = sub.add_parser("query", help="answer queries from stdin with a saved index")
    q.add_argument("--index", required=True)
    q.add_argument("--prefix-k", type=int, default=None,
                   help="search only the first K inserted points")
    q.set_defaults(func=_cmd_query, queries=None)

    d = sub.add_parser("dpc", help="density-peak deltas from an x,y,rho CSV")
    d.add_argument("--input", required=True)
    d.add_argument("--out")
    d.set_defaults(func=_cmd_dpc)

    f = sub.add_parser("fps", help="farthest-point sample indices")
    _add_source(f)
    f.add_argument("--m", type=int, default=None, help="sample size (default: all)")
    f.add_argument("--start", type=int, default=0)
    f.set_defaults(func=_cmd_fps)

    v = sub.add_parser("validate", help="check every index against the oracle")
    _add_source(v)
    v.add_argument("--queries", type=int, default=1000)
    v.add_argument("--scale", type=float, default=2.0)
    v.add_argument("--no-triangulation", dest="triangulation", action="store_false",
                   help="skip the brute-force Delaunay check")
    v.set_defaults(func=_cmd_validate)
    return p


def main(argv=None, stdin=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.command == "query":
        args.queries = stdin if stdin is not None else sys.stdin
    try:
        return args.func(args)
    except OracleMismatchError as exc:
        print(f"oracle mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (OSError, PointFileError, IndexFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, DuplicatePointError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run():
    sys.exit(main())
