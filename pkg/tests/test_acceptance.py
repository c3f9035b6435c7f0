"""Acceptance suite.

Each test prints one ``criterion N: PASS|FAIL (...)`` line, and the lines are
repeated in the terminal summary. Run directly with
``python tests/test_acceptance.py`` or through pytest.
"""

import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, brute_fps, sqdist_rows
from voronoi_nns import (NnsIndex, QueryTable, build, dpc_delta, fps_order,
                         generate_queries, generate_surface_cloud, linear_nearest,
                         linear_nearest_batch, list_stats, nearest_batch, spatial_sort)
from voronoi_nns.applications import density_order
from voronoi_nns.bench import (CSV_COLUMNS, NONDETERMINISTIC_COLUMNS, BenchConfig,
                               report_csv, run_bench)
from voronoi_nns.estimators import make_order
from voronoi_nns.geometry import Aabb

pytestmark = pytest.mark.acceptance

STRATEGIES = ("identity", "spatial", "fps")
KINDS = ("uniform_cube", "sphere", "jittered_line")
BUDGET_S = {1: 120, 2: 10, 3: 60, 4: 30, 5: 60, 6: 120, 7: 60, 8: 10}


def report(num, ok, detail, elapsed=None):
    if elapsed is not None:
        budget = BUDGET_S[num]
        ok = ok and elapsed < budget
        detail = f"{detail}; {elapsed:.1f}s of {budget}s"
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def box_queries(P, m, seed, scale=2.0):
    return generate_queries(Aabb.of(P), scale, m, seed)


def oracle(index, Q, ks=None):
    """Linear scan in insertion order, so ties resolve like the index does."""
    t = index.table
    if ks is None:
        return t.inv_perm[linear_nearest_batch(t.points_by_insertion, Q)]
    return t.inv_perm[np.array([linear_nearest(t.points_by_insertion, q, k)
                                for q, k in zip(Q, ks)], dtype=np.int64)]


# --- shared, lazily computed runs ------------------------------------------

@pytest.fixture(scope="session")
def exact_run():
    t0 = time.perf_counter()
    builds, bad, total = [], 0, 0
    for d in (2, 3):
        for kind in KINDS:
            for n in (10, 100, 10_000):
                P = generate_surface_cloud(kind, n, seed=n + d, dimension=d)
                Q = box_queries(P, 1000, seed=d)
                for s in STRATEGIES:
                    index = build(P, make_order(P, s), keep_triangulation=n <= 2000)
                    got, _ = nearest_batch(index, Q)
                    bad += int(np.count_nonzero(got != oracle(index, Q)))
                    total += Q.shape[0]
                    builds.append((f"{d}d/{kind}/{n}/{s}", index))
    return dict(builds=builds, bad=bad, total=total, elapsed=time.perf_counter() - t0)


@pytest.fixture(scope="session")
def prefix_run():
    t0 = time.perf_counter()
    builds, bad, total = [], 0, 0
    for d in (2, 3):
        P = generate_surface_cloud("uniform_cube", 2000, seed=20 + d, dimension=d)
        rng = np.random.default_rng(d)
        for s in STRATEGIES:
            index = build(P, make_order(P, s), keep_triangulation=True)
            Q = box_queries(P, 1000, seed=30 + d)
            ks = rng.integers(1, 2001, size=1000)
            got, _ = nearest_batch(index, Q, ks)
            bad += int(np.count_nonzero(got != oracle(index, Q, ks)))
            total += 1000
            builds.append((f"{d}d/prefix/{s}", index))
    return dict(builds=builds, bad=bad, total=total, elapsed=time.perf_counter() - t0)


@pytest.fixture(scope="session")
def dpc_run():
    t0 = time.perf_counter()
    n = 2000
    budget = 0.05 * n * (n - 1) / 2
    builds, mismatches, ratios = [], 0, []
    for trial in range(10):
        rng = np.random.default_rng(100 + trial)
        P = rng.random((n, 2))
        rho = rng.random(n)
        res = dpc_delta(P, rho)
        order = density_order(rho)
        delta = np.empty(n)
        higher = np.full(n, -1)
        delta[order[0]] = np.sqrt(sqdist_rows(P, P[order[0]]).max())
        for r in range(1, n):
            d2 = sqdist_rows(P[order[:r]], P[order[r]])
            j = int(np.argmin(d2))
            higher[order[r]] = order[j]
            delta[order[r]] = np.sqrt(d2[j])
        mismatches += int(np.count_nonzero(res.nearest_higher != higher))
        mismatches += int(np.count_nonzero(res.delta != delta))
        ratios.append(res.distance_evaluations / budget)
        builds.append((f"dpc/{trial}", res.index))
    return dict(builds=builds, bad=mismatches, ratio=max(ratios),
                elapsed=time.perf_counter() - t0)


@pytest.fixture(scope="session")
def growth_run():
    t0 = time.perf_counter()
    means, builds = {}, []
    for n in (1_000, 10_000, 100_000):
        P = generate_surface_cloud("uniform_cube", n, seed=6, dimension=3)
        index = build(P, fps_order(P))
        _, stats = nearest_batch(index, box_queries(P, 10_000, seed=7))
        means[n] = float(stats["comparisons"].mean())
        builds.append((f"cube/{n}/fps", index))
    return dict(builds=builds, means=means, elapsed=time.perf_counter() - t0)


@pytest.fixture(scope="session")
def sphere_run():
    t0 = time.perf_counter()
    P = generate_surface_cloud("sphere", 100_000, seed=8, dimension=3)
    Q = box_queries(P, 10_000, seed=9)
    out = {}
    for label, order in (("fps", fps_order(P)), ("spatial", spatial_sort(P, seed=8))):
        index = build(P, order)
        got, stats = nearest_batch(index, Q[:100])
        out[label] = (index, float(nearest_batch(index, Q)[1]["comparisons"].mean()))
        assert np.array_equal(got, oracle(index, Q[:100]))
    return dict(builds=[(f"sphere/100000/{k}", v[0]) for k, v in out.items()],
                fps=out["fps"][1], spatial=out["spatial"][1],
                fps_index=out["fps"][0], elapsed=time.perf_counter() - t0)


@pytest.fixture(scope="session")
def chain_run():
    t0 = time.perf_counter()
    n = 10_000
    P = generate_surface_cloud("jittered_line", n, seed=10, dimension=3)
    index = build(P)
    rng = np.random.default_rng(11)
    Q = np.column_stack([rng.uniform(1.0, 2.0, 1000), rng.uniform(-1e-3, 1e-3, (1000, 2))])
    got, stats = nearest_batch(index, Q)
    exact = np.array_equal(got, oracle(index, Q))
    return dict(builds=[("line/10000/identity", index)], exact=exact, n=n,
                mean=float(stats["comparisons"].mean()), elapsed=time.perf_counter() - t0)


# --- criteria ------------------------------------------------------------------

def test_criterion_01_exactness(exact_run):
    r = exact_run
    report(1, r["bad"] == 0,
           f"{r['total'] - r['bad']}/{r['total']} answers match the linear scan "
           f"over {len(r['builds'])} builds", r["elapsed"])


def test_criterion_02_prefix_exactness(prefix_run):
    r = prefix_run
    report(2, r["bad"] == 0,
           f"{r['total'] - r['bad']}/{r['total']} prefix answers match", r["elapsed"])


def test_criterion_03_delaunay_validity(exact_run, prefix_run):
    t0 = time.perf_counter()
    failures, checked = [], 0
    for label, index in exact_run["builds"] + prefix_run["builds"]:
        if index.triangulation is None:
            continue
        ok, msg = index.triangulation.validate()
        checked += 1
        if not ok:
            failures.append(f"{label}: {msg}")
    report(3, not failures and checked > 0,
           f"{checked - len(failures)}/{checked} triangulations valid"
           + (f"; first failure {failures[0]}" if failures else ""),
           time.perf_counter() - t0)


def test_criterion_04_fps_equivalence():
    t0 = time.perf_counter()
    bad = 0
    for d in (2, 3):
        for trial in range(20):
            P = np.random.default_rng(1000 * d + trial).random((500, d))
            start = trial * 7 % 500
            order = fps_order(P, start_index=start)
            want, dist = brute_fps(P, start)
            same = (np.array_equal(order.permutation, want)
                    and np.array_equal(order.fps_min_distances, dist))
            bad += not same
    report(4, bad == 0, f"{40 - bad}/40 instances identical in order and distances",
           time.perf_counter() - t0)


def test_criterion_05_dpc(dpc_run):
    r = dpc_run
    report(5, r["bad"] == 0 and r["ratio"] < 1.0,
           f"{r['bad']} mismatches; worst distance evaluations = "
           f"{r['ratio']:.2f} x 0.05 n(n-1)/2", r["elapsed"])


def test_criterion_06_log_growth(growth_run):
    m = growth_run["means"]
    ratio = m[100_000] / m[1_000]
    report(6, ratio <= 3.0,
           "mean comparisons " + ", ".join(f"n={n}: {v:.1f}" for n, v in m.items())
           + f"; ratio {ratio:.2f} (limit 3.0)", growth_run["elapsed"])


def test_criterion_07_ordering_advantage(sphere_run):
    r = sphere_run
    report(7, r["fps"] < r["spatial"] and 20 <= r["fps"] <= 1000,
           f"fps {r['fps']:.1f} vs spatial {r['spatial']:.1f} mean comparisons",
           r["elapsed"])


def test_criterion_08_chain_worst_case(chain_run):
    r = chain_run
    report(8, r["exact"] and r["mean"] >= r["n"] / 10,
           f"mean comparisons {r['mean']:.0f} >= n/10 = {r['n'] // 10}; "
           f"answers exact: {r['exact']}", r["elapsed"])


def test_criterion_09_list_invariants(exact_run, prefix_run, dpc_run, growth_run,
                                      sphere_run, chain_run):
    runs = (exact_run, prefix_run, dpc_run, growth_run, sphere_run, chain_run)
    failures, checked = [], 0
    for run in runs:
        for label, index in run["builds"]:
            checked += 1
            try:
                index.table.check_invariants(index.encroachment_total)
            except AssertionError as exc:
                failures.append(f"{label}: {exc}")
    s = list_stats(sphere_run["fps_index"])
    report(9, not failures and 6 <= s.mean <= 30,
           f"{checked - len(failures)}/{checked} builds pass; sphere 1e5 fps list "
           f"mean {s.mean:.2f} (band 6..30), variance {s.variance:.1f}"
           + (f"; first failure {failures[0]}" if failures else ""))


def test_criterion_10_superset_safety():
    bases = []
    for d in (2, 3):
        P = generate_surface_cloud("uniform_cube", 1000, seed=40 + d, dimension=d)
        for s in STRATEGIES:
            index = build(P, make_order(P, s))
            Q = box_queries(P, 300, seed=d)
            ks = np.random.default_rng(d).integers(1, 1001, size=300)
            bases.append((index, Q, ks, nearest_batch(index, Q)[0],
                          nearest_batch(index, Q, ks)[0]))
    rng = np.random.default_rng(2024)
    changed = 0
    injected = 0
    for trial in range(100):
        index, Q, ks, full, prefix = bases[trial % len(bases)]
        t = index.table
        n = t.n
        lists = [t.query_list(i) for i in range(n)]
        for owner in rng.choice(n - 1, size=rng.integers(1, 100), replace=False):
            extra = rng.integers(owner + 1, n, size=rng.integers(1, 8))
            merged = np.union1d(lists[owner], extra)
            injected += merged.size - lists[owner].size
            lists[owner] = merged
        offsets = np.zeros(n + 1, dtype=np.int64)
        offsets[1:] = np.cumsum([a.size for a in lists])
        table = QueryTable(offsets, np.concatenate(lists).astype(np.int64), t.perm.copy(),
                           t.inv_perm.copy(), t.points_by_insertion.copy())
        table.check_invariants()
        fat = NnsIndex(table, index.dimension, index.strategy)
        changed += int(np.count_nonzero(nearest_batch(fat, Q)[0] != full))
        changed += int(np.count_nonzero(nearest_batch(fat, Q, ks)[0] != prefix))
    report(10, changed == 0,
           f"100 trials, {injected} injected entries, {changed} changed answers")


def _blank(csv_text):
    rows = [line.split(",") for line in csv_text.splitlines()]
    for c in NONDETERMINISTIC_COLUMNS:
        j = CSV_COLUMNS.index(c)
        for row in rows[1:]:
            row[j] = ""
    return "\n".join(",".join(r) for r in rows).encode()


def test_criterion_11_determinism(tmp_path):
    from voronoi_nns.cli import main
    outputs = []
    for run in range(2):
        texts = []
        for gen in ("sphere:10000", "uniform_cube:10000"):
            out = tmp_path / f"{run}-{gen.split(':')[0]}.csv"
            code = main(["bench", "--gen", gen, "--dim", "3", "--seed", "5",
                         "--queries", "10000", "--out", str(out)])
            assert code == 0
            texts.append(out.read_text())
        outputs.append(texts)
    same = all(_blank(a) == _blank(b) for a, b in zip(*outputs))
    rows = sum(len(t.splitlines()) - 1 for t in outputs[0])
    report(11, same, f"2 runs x {rows} rows byte-identical outside "
                     f"{', '.join(NONDETERMINISTIC_COLUMNS)}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
