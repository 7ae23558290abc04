import json
import subprocess
import sys

import numpy as np
import pytest

from hcpy import cli
from hcpy.dethom import F_eval, SymmetricPencil, expanded_singular_points, format_pencil

CIRCLE = "variables: x y\n# circle and line\nx^2 + y^2 - 1\n3*x - 2*y\n"


@pytest.fixture
def circle_file(tmp_path):
    p = tmp_path / "circle.txt"
    p.write_text(CIRCLE)
    return p


def _run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_circle(circle_file, capsys):
    code, out, _ = _run(["solve", circle_file], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["n_paths"] == 2 and d["n_failed"] == 0
    assert len(d["solutions"]) == 2 and all(s["is_real"] for s in d["solutions"])
    xs = sorted(s["x"][0][0] for s in d["solutions"])
    assert np.allclose(xs, [-2 / np.sqrt(13), 2 / np.sqrt(13)])
    assert set(d) == {"seed", "gamma", "n_paths", "n_failed", "n_at_infinity",
                      "runtime_seconds", "solutions"}


def test_solve_output_file_and_round_trip(circle_file, tmp_path, capsys):
    out = tmp_path / "sol.json"
    code, stdout, _ = _run(["solve", circle_file, "--output", out, "--tol", "1e-9"], capsys)
    assert code == 0 and stdout == ""
    d = json.loads(out.read_text())
    text = json.dumps(d)
    assert json.dumps(json.loads(text)) == text


def test_solve_deterministic(circle_file, capsys):
    runs = []
    for _ in range(2):
        code, out, _ = _run(["solve", circle_file, "--seed", "42", "--threads", "1"], capsys)
        assert code == 0
        d = json.loads(out)
        d.pop("runtime_seconds")
        runs.append(json.dumps(d))
    assert runs[0] == runs[1]
    assert json.loads(runs[0])["seed"] == 42


def test_solve_without_endgame(circle_file, capsys):
    code, out, _ = _run(["solve", circle_file, "--no-endgame"], capsys)
    assert code == 0 and len(json.loads(out)["solutions"]) == 2


def test_parse_error_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.txt"
    p.write_text("variables: x y\nx^2 + y^2 - 1\n3*x -* 2*y\n")
    code, _, err = _run(["solve", p], capsys)
    assert code == 2
    assert "line 3" in err


def test_setup_errors(tmp_path, capsys):
    p = tmp_path / "rect.txt"
    p.write_text("variables: x y\nx + y\n")
    code, _, err = _run(["solve", p], capsys)
    assert code == 3 and "solve_with_start" in err
    code, _, _ = _run(["solve", tmp_path / "missing.txt"], capsys)
    assert code == 3
    code, _, _ = _run(["bench", "nosuch"], capsys)
    assert code == 3


def test_bench_heart(capsys):
    code, out, _ = _run(["bench", "heart"], capsys)
    assert code == 0
    row = [ln for ln in out.splitlines() if ln.startswith("heart")][0].split()
    assert row[1:5] == ["576", "4", "2", "0"]
    assert row[-1] == "PASS"


def test_bench_verdict_ignores_runtime(monkeypatch):
    from hcpy.solver import SolveOptions
    real = cli.solve

    def slow(F, opts):
        res = real(F, opts)
        res.runtime_seconds = 1e9
        return res

    monkeypatch.setattr(cli, "solve", slow)
    assert cli.bench_row("heart", SolveOptions())["pass"]


@pytest.fixture
def pencils(tmp_path):
    r = np.random.default_rng(21)
    A, B = SymmetricPencil.random(3, r), SymmetricPencil.random(3, r)
    (tmp_path / "A.txt").write_text(format_pencil(A))
    (tmp_path / "B.txt").write_text(format_pencil(B))
    return A, B, tmp_path


def test_starts_and_dethom(pencils, capsys):
    A, B, d = pencils
    code, _, _ = _run(["starts", d / "B.txt", "-o", d / "S.json"], capsys)
    assert code == 0
    S = cli.parse_starts((d / "S.json").read_text())
    assert len(S) == 4
    code, out, _ = _run(["dethom", d / "A.txt", d / "B.txt", d / "S.json"], capsys)
    assert code == 0
    res = json.loads(out)
    assert res["n_failed"] == 0 and len(res["points"]) == 4 and res["failures"] == []
    for p in res["points"]:
        x = np.array([complex(a, b) for a, b in p["x"]])
        assert np.max(np.abs(F_eval(A, x / np.linalg.norm(x)))) <= 1e-5
        assert p["residual"] <= 1e-5
        if p["is_real"]:
            assert isinstance(p["on_spectrahedron_boundary"], bool)
        else:
            assert p["on_spectrahedron_boundary"] is None


def test_dethom_constant_homotopy(pencils, capsys):
    A, _, d = pencils
    S = expanded_singular_points(A)
    (d / "SA.json").write_text(json.dumps([[[z.real, z.imag] for z in x] for x in S]))
    code, out, _ = _run(["dethom", d / "A.txt", d / "A.txt", d / "SA.json"], capsys)
    assert code == 0
    pts = [np.array([complex(a, b) for a, b in p["x"]]) for p in json.loads(out)["points"]]
    for s in S:
        assert min(np.max(np.abs(x / x[0] - s / s[0])) for x in pts) <= 1e-8


def test_dethom_bad_starts_listed(pencils, capsys):
    _, _, d = pencils
    (d / "bad.json").write_text(json.dumps([[[1, 0], [2, 0], [3, 0], [4, 1]]]))
    code, out, _ = _run(["dethom", d / "A.txt", d / "B.txt", d / "bad.json"], capsys)
    assert code == 0
    res = json.loads(out)
    assert res["n_failed"] == 1
    assert res["failures"] == [{"path_index": 0, "status": "failed_bad_start"}]


def test_dethom_input_errors(pencils, tmp_path, capsys):
    _, _, d = pencils
    (d / "junk.json").write_text("[[1, 2]]")
    code, _, _ = _run(["dethom", d / "A.txt", d / "B.txt", d / "junk.json"], capsys)
    assert code == 2
    (d / "bad.txt").write_text("n: 2\n\n1 2\n0 1\n")
    code, _, _ = _run(["dethom", d / "bad.txt", d / "B.txt", d / "junk.json"], capsys)
    assert code == 2
    (d / "two.txt").write_text(format_pencil(SymmetricPencil.random(2, np.random.default_rng(0))))
    code, _, _ = _run(["dethom", d / "two.txt", d / "B.txt", d / "junk.json"], capsys)
    assert code == 3


def test_module_entry_point(circle_file):
    out = subprocess.run([sys.executable, "-m", "hcpy", "solve", str(circle_file)],
                         capture_output=True, text=True, check=True)
    assert len(json.loads(out.stdout)["solutions"]) == 2
