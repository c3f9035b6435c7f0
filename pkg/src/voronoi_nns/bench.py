"""Benchmark harness comparing the Query Table with baseline indices.

Every method is built once over the same points and queried with the same
seeded queries drawn from the scaled bounding box. A 1% sample of every
method's answers is checked against the linear scan before a row is
reported. Timing columns depend on the machine; all other columns are a
deterministic function of the configuration.
"""

import csv
import io as _io
import json
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import baselines
from .exceptions import OracleMismatchError
from .geometry import Aabb, SURFACE_KINDS, generate_queries, generate_surface_cloud
from .io import load_points
from .ordering import OrderStrategy
from .estimators import make_order
from .qtable import build, list_stats, nearest_batch

__all__ = ["BenchConfig", "BenchRow", "run_bench", "load_dataset", "METHODS",
           "CSV_COLUMNS", "NONDETERMINISTIC_COLUMNS", "report_csv"]

METHODS = ("ours-identity", "ours-spatial", "ours-fps", "kd", "grid", "linear")

CSV_COLUMNS = ("dataset", "n", "dim", "method", "strategy", "build_s",
               "query_us_mean", "query_us_p50", "comparisons_mean", "jumps_mean",
               "list_len_mean", "list_len_var", "mem_bytes", "seed")

NONDETERMINISTIC_COLUMNS = ("build_s", "query_us_mean", "query_us_p50", "mem_bytes")

_CHUNK = 256
_WARMUP = 1000


def parse_methods(names):
    """Accept a comma list of method names; bare strategy names mean ours-*."""
    if isinstance(names, str):
        names = [s for s in names.split(",") if s.strip()]
    out = []
    for item in names:
        key = item.strip().lower()
        if key in ("all", "*"):
            out.extend(METHODS)
            continue
        if key not in METHODS:
            try:
                key = "ours-" + OrderStrategy.parse(key).value
            except ValueError:
                raise ValueError(f"unknown method {item!r}; choose from {METHODS}") from None
        out.append(key)
    return list(dict.fromkeys(out))


@dataclass
class BenchConfig:
    """What to benchmark.

    Exactly one of ``input_path`` and ``generator`` is used; ``generator`` is
    ``"kind:n"`` with ``kind`` one of the synthetic cloud kinds.
    """

    input_path: str = None
    generator: str = None
    dimension: int = 3
    methods: list = field(default_factory=lambda: list(METHODS))
    scale: float = 2.0
    queries: int = 10_000
    seed: int = 0
    out: str = None
    threads: int = 1

    def __post_init__(self):
        if (self.input_path is None) == (self.generator is None):
            raise ValueError("give exactly one of an input file and a KIND:N generator")
        if not self.scale >= 1.0:
            raise ValueError(f"box scale must be >= 1, got {self.scale}")
        if self.queries < 0:
            raise ValueError("query count must be non-negative")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.dimension not in (2, 3):
            raise ValueError("dimension must be 2 or 3")
        self.methods = parse_methods(self.methods)


@dataclass
class BenchRow:
    dataset: str
    n: int
    dim: int
    method: str
    strategy: str
    build_s: float
    query_us_mean: float
    query_us_p50: float
    comparisons_mean: float
    jumps_mean: float
    list_len_mean: float
    list_len_var: float
    mem_bytes: int
    seed: int


def load_dataset(config):
    """``(name, points)`` for the configured input."""
    if config.generator is not None:
        kind, _, count = config.generator.partition(":")
        if kind not in SURFACE_KINDS or not count.isdigit():
            raise ValueError(
                f"generator must look like KIND:N with KIND in {SURFACE_KINDS}")
        pts = generate_surface_cloud(kind, int(count), config.seed, config.dimension)
        return kind, pts
    # files carry their own dimension
    pts, _ = load_points(config.input_path)
    return os.path.basename(config.input_path), pts


class _Method:
    """A built index with a uniform batch query interface."""

    def __init__(self, name, points, config):
        self.name = name
        self.strategy = ""
        self.jumps = None
        self.lists = None
        t0 = time.perf_counter()
        if name.startswith("ours-"):
            self.strategy = name[5:]
            order = make_order(points, self.strategy, config.seed)
            self.index = build(points, order, seed=config.seed)
            self.mem = self.index.table.nbytes()
            self.lists = list_stats(self.index)
        elif name == "kd":
            self.index = baselines.KdTree(points)
            self.mem = self.index.nbytes()
        elif name == "grid":
            self.index = baselines.UniformGrid(points, seed=config.seed)
            self.mem = self.index.nbytes()
        else:
            self.index = points
            self.mem = int(points.nbytes)
        self.build_s = time.perf_counter() - t0

    def query(self, Q):
        """``(answers, comparisons, jumps or None)``."""
        if self.name.startswith("ours-"):
            ans, st = nearest_batch(self.index, Q)
            return ans, st["comparisons"], st["jumps"]
        if self.name == "linear":
            ans = baselines.linear_nearest_batch(self.index, Q)
            return ans, np.full(Q.shape[0], self.index.shape[0], dtype=np.int64), None
        ans, comps = self.index.query_batch(Q)
        return ans, comps, None


def _timed_chunks(method, Q, threads):
    chunks = [Q[i: i + _CHUNK] for i in range(0, Q.shape[0], _CHUNK)]

    def run(chunk):
        t0 = time.perf_counter()
        res = method.query(chunk)
        return res, time.perf_counter() - t0

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(c) for c in chunks]
    ans = np.concatenate([r[0][0] for r in results])
    comps = np.concatenate([r[0][1] for r in results])
    jumps = None
    if results[0][0][2] is not None:
        jumps = np.concatenate([r[0][2] for r in results])
    per_query = [dt / c.shape[0] * 1e6 for (_, dt), c in zip(results, chunks)]
    total = sum(dt for _, dt in results)
    return ans, comps, jumps, total / Q.shape[0] * 1e6, statistics.median(per_query)


def _verify(method, points, Q, ans, seed):
    m = Q.shape[0]
    if m == 0:
        return
    rng = np.random.default_rng(seed)
    sample = np.sort(rng.choice(m, size=max(1, m // 100), replace=False))
    for r in sample:
        ref = baselines.linear_nearest(points, Q[r])
        if ref != ans[r]:
            raise OracleMismatchError(
                f"{method.name}: query {r} at {Q[r].tolist()} answered {int(ans[r])}, "
                f"linear scan says {ref}")


def run_bench(config, write=True):
    """Run the benchmark; returns the list of :class:`BenchRow`.

    When ``config.out`` is set and ``write`` is true, a CSV and a JSON file
    (same stem) are written.
    """
    name, points = load_dataset(config)
    n, dim = points.shape
    Q = generate_queries(Aabb.of(points), config.scale, config.queries, config.seed)
    rows = []
    for mname in config.methods:
        method = _Method(mname, points, config)
        tmean = tp50 = cmean = jmean = float("nan")
        if Q.shape[0]:
            method.query(Q[:_WARMUP])
            ans, comps, jumps, tmean, tp50 = _timed_chunks(method, Q, config.threads)
            _verify(method, points, Q, ans, config.seed)
            cmean = float(comps.mean())
            if jumps is not None:
                jmean = float(jumps.mean())
        lmean = lvar = float("nan")
        if method.lists is not None:
            lmean, lvar = method.lists.mean, method.lists.variance
        rows.append(BenchRow(name, n, dim, "ours" if mname.startswith("ours-") else mname,
                             method.strategy, method.build_s, tmean, tp50, cmean, jmean,
                             lmean, lvar, method.mem, config.seed))
    if write and config.out:
        write_report(rows, config.out)
    return rows


def _fmt(v):
    if isinstance(v, float):
        return "" if v != v else f"{v:.6f}"
    return str(v)


def report_csv(rows):
    """CSV text for ``rows`` with the stable column order."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        d = asdict(row)
        w.writerow([_fmt(d[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def write_report(rows, out):
    stem, ext = os.path.splitext(out)
    csv_path = out if ext else out + ".csv"
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(report_csv(rows))
    records = [{k: (None if isinstance(v, float) and v != v else v)
                for k, v in asdict(r).items()} for r in rows]
    with open(stem + ".json", "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=2)
    return csv_path, stem + ".json"
