import io

import numpy as np
import pytest

from voronoi_nns import validation
from voronoi_nns.cli import main


def run(capsys, *argv, stdin=None):
    code = main(list(argv), stdin=stdin)
    out, err = capsys.readouterr()
    return code, out, err


def test_build_then_query(tmp_path, capsys):
    idx = tmp_path / "s.idx"
    code, _, _ = run(capsys, "build", "--gen", "sphere:500", "--strategy", "fps",
                     "--out", str(idx))
    assert code == 0 and idx.exists()
    from voronoi_nns import generate_surface_cloud, linear_nearest
    P = generate_surface_cloud("sphere", 500, 0, 3)
    queries = "0 0 1.5\n\n0.3 -0.2 0.1\n"
    code, out, _ = run(capsys, "query", "--index", str(idx), stdin=io.StringIO(queries))
    assert code == 0
    assert out.split() == [str(linear_nearest(P, [0, 0, 1.5])),
                           str(linear_nearest(P, [0.3, -0.2, 0.1]))]


def test_query_prefix_and_bad_input(tmp_path, capsys):
    idx = tmp_path / "c.idx"
    assert run(capsys, "build", "--gen", "uniform_cube:200", "--dim", "2",
               "--strategy", "spatial", "--out", str(idx))[0] == 0
    code, out, _ = run(capsys, "query", "--index", str(idx), "--prefix-k", "1",
                       stdin=io.StringIO("0.5 0.5\n0.9 0.1\n"))
    assert code == 0 and len(set(out.split())) == 1
    code, _, err = run(capsys, "query", "--index", str(idx), stdin=io.StringIO("1 2 3\n"))
    assert code == 3 and "stdin:1" in err
    code, _, _ = run(capsys, "query", "--index", str(tmp_path / "nope.idx"),
                     stdin=io.StringIO(""))
    assert code == 3


def test_fps_and_dpc(tmp_path, capsys):
    code, out, _ = run(capsys, "fps", "--gen", "uniform_cube:100", "--m", "5", "--start", "7")
    assert code == 0 and out.split()[0] == "7" and len(out.split()) == 5
    csv = tmp_path / "d.csv"
    csv.write_text("x,y,rho\n0,0,2\n3,4,1\n")
    code, out, _ = run(capsys, "dpc", "--input", str(csv))
    assert code == 0
    assert out.splitlines() == ["delta,nearest_higher", "5.0,-1", "5.0,0"]
    csv.write_text("x,y,rho\n0,0,2\n3,oops,1\n")
    assert run(capsys, "dpc", "--input", str(csv))[0] == 3


def test_validate(capsys):
    code, out, _ = run(capsys, "validate", "--gen", "jittered_line:300", "--queries", "200")
    assert code == 0
    assert "query-table/fps" in out and "kd-tree: 200 queries exact" in out


def test_validate_reports_mismatch(monkeypatch, capsys):
    real = validation.nearest_batch

    def broken(index, Q, k=None):
        ans, stats = real(index, Q, k)
        return (ans + 1) % index.n, stats

    monkeypatch.setattr(validation, "nearest_batch", broken)
    code, _, err = run(capsys, "validate", "--gen", "sphere:100", "--queries", "20")
    assert code == 2 and "oracle mismatch" in err


@pytest.mark.parametrize("argv", [
    [],
    ["bench", "--gen", "sphere:100", "--strategies", "ours-magic"],
    ["bench", "--gen", "sphere:100", "--scale", "0.5"],
    ["bench", "--gen", "torus:100"],
    ["build", "--gen", "sphere:10"],
    ["fps", "--gen", "sphere:10", "--m", "11"],
    ["fps", "--gen", "sphere:10", "--start", "10"],
    ["validate", "--gen", "sphere:10", "--dim", "4"],
])
def test_usage_errors_exit_1(capsys, argv):
    with pytest.raises(SystemExit) as info:
        code = main(argv)
        raise SystemExit(code)
    assert info.value.code == 1


def test_bench_writes_files(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code, _, _ = run(capsys, "bench", "--gen", "sphere:300", "--queries", "200",
                     "--strategies", "fps,kd,linear", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("dataset,n,dim,method,strategy")
    assert len(lines) == 4 and (tmp_path / "r.json").exists()


def test_bench_reads_files(tmp_path, capsys):
    pts = tmp_path / "p.xyz"
    np.savetxt(pts, np.random.default_rng(0).random((150, 2)))
    code, out, _ = run(capsys, "bench", "--input", str(pts), "--queries", "50",
                       "--strategies", "spatial,grid")
    assert code == 0
    rows = out.splitlines()[1:]
    assert all(r.startswith("p.xyz,150,2,") for r in rows)
    assert run(capsys, "bench", "--input", str(tmp_path / "x.xyz"))[0] == 3
