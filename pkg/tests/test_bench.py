import numpy as np
import pytest

from voronoi_nns import bench
from voronoi_nns.bench import (CSV_COLUMNS, NONDETERMINISTIC_COLUMNS, BenchConfig,
                               parse_methods, report_csv, run_bench)


def strip(rows):
    out = []
    for line in report_csv(rows).splitlines()[1:]:
        cells = line.split(",")
        for c in NONDETERMINISTIC_COLUMNS:
            cells[CSV_COLUMNS.index(c)] = ""
        out.append(cells)
    return out


def test_parse_methods():
    assert parse_methods("fps, kd,ours-fps") == ["ours-fps", "kd"]
    assert parse_methods("all") == list(bench.METHODS)
    with pytest.raises(ValueError):
        parse_methods("octree")


def test_small_run_columns():
    cfg = BenchConfig(generator="uniform_cube:400", dimension=2, queries=300, seed=3)
    rows = run_bench(cfg)
    assert [r.strategy for r in rows][:3] == ["identity", "spatial", "fps"]
    assert [r.method for r in rows] == ["ours"] * 3 + ["kd", "grid", "linear"]
    for r in rows:
        assert r.n == 400 and r.dim == 2 and r.seed == 3
        assert r.comparisons_mean > 0 and r.query_us_p50 >= 0
    ours, linear = rows[0], rows[-1]
    assert ours.list_len_mean > 0 and not np.isnan(ours.jumps_mean)
    assert np.isnan(linear.list_len_mean) and linear.comparisons_mean == 400


def test_deterministic_columns_repeat():
    cfg = dict(generator="sphere:500", dimension=3, queries=400, seed=1)
    a = strip(run_bench(BenchConfig(**cfg)))
    b = strip(run_bench(BenchConfig(**cfg, threads=3)))
    assert a == b


def test_zero_queries_gives_blank_query_columns():
    rows = run_bench(BenchConfig(generator="sphere:100", queries=0, methods=["fps", "kd"]))
    text = report_csv(rows).splitlines()
    cells = text[1].split(",")
    for c in ("query_us_mean", "query_us_p50", "comparisons_mean", "jumps_mean"):
        assert cells[CSV_COLUMNS.index(c)] == ""


def test_config_validation():
    with pytest.raises(ValueError):
        BenchConfig()
    with pytest.raises(ValueError):
        BenchConfig(generator="sphere:10", input_path="x.xyz")
    with pytest.raises(ValueError):
        BenchConfig(generator="sphere:10", threads=0)


def test_far_queries_barely_change_query_table_work():
    rows = {}
    for scale in (1.0, 8.0):
        cfg = BenchConfig(generator="sphere:5000", dimension=3, queries=2000,
                          methods=["fps", "grid"], scale=scale)
        rows[scale] = run_bench(cfg)
    near, far = rows[1.0][0].comparisons_mean, rows[8.0][0].comparisons_mean
    assert 0.5 < far / near < 2.0
    # the grid has to sweep many empty rings for far queries
    assert rows[8.0][1].query_us_mean > rows[1.0][1].query_us_mean
