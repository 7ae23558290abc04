"""Command-line front end.

    hcpy solve <file> [--seed N] [--threads N] [--tol T] [--no-endgame] [--output F]
    hcpy bench <name|all> [--seed N] [--threads N]
    hcpy starts <B> [--seed N] [--output F]
    hcpy dethom <A> <B> <starts> [--seed N] [--output F]

``solve`` writes the solution set as JSON. Exit codes: 0 ok, 2 parse error
(the message carries the line number), 3 setup error (unreadable file,
non-square system, bad options).
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from hcpy import dethom
from hcpy.poly import PolynomialSyntaxError, parse_system
from hcpy.solver import SolveOptions, solve
from hcpy.systems import BENCHMARKS, get_system

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_SETUP = 0, 1, 2, 3


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _options(args) -> SolveOptions:
    opts = SolveOptions(seed=args.seed, threads=getattr(args, "threads", 1) or 1)
    tol = getattr(args, "tol", None)
    if tol is not None:
        opts = replace(opts, tracker=replace(opts.tracker, corrector_tol=tol))
    if getattr(args, "no_endgame", False):
        opts = replace(opts, use_endgame=False)
    return opts


def cmd_solve(args) -> int:
    try:
        with open(args.file) as fh:
            text = fh.read()
    except OSError as err:
        print(f"error: cannot read {args.file}: {err.strerror}", file=sys.stderr)
        return EXIT_SETUP
    try:
        F = parse_system(text)
    except PolynomialSyntaxError as err:
        print(f"parse error in {args.file}: {err}", file=sys.stderr)
        return EXIT_PARSE
    try:
        res = solve(F, _options(args))
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SETUP
    _emit(res.to_json(indent=1), args.output)
    return EXIT_OK


def bench_row(name: str, opts: SolveOptions) -> dict:
    entry = BENCHMARKS[name]
    res = solve(entry.system(), opts)
    n_sol, n_real = len(res.solutions), len(res.real_solutions)
    ok = n_sol == entry.expected_complex_roots and n_real == entry.expected_real_roots
    return {"name": name, "paths": res.n_paths, "solutions": n_sol, "real": n_real,
            "failed": res.n_failed, "seconds": res.runtime_seconds,
            "expected": (entry.expected_complex_roots, entry.expected_real_roots),
            "pass": ok}


def cmd_bench(args) -> int:
    names = list(BENCHMARKS) if args.name == "all" else [args.name]
    unknown = [n for n in names if n not in BENCHMARKS]
    if unknown:
        print(f"error: unknown benchmark {unknown[0]!r}; choose from {', '.join(BENCHMARKS)} or all",
              file=sys.stderr)
        return EXIT_SETUP
    opts = _options(args)
    head = f"{'system':<10} {'paths':>6} {'sols':>6} {'real':>5} {'failed':>6} {'time/s':>8}  expected  verdict"
    print(head)
    print("-" * len(head))
    all_ok = True
    for name in names:
        r = bench_row(name, opts)
        all_ok &= r["pass"]
        exp = f"{r['expected'][0]}/{r['expected'][1]}"
        print(f"{name:<10} {r['paths']:>6} {r['solutions']:>6} {r['real']:>5} {r['failed']:>6} "
              f"{r['seconds']:>8.2f}  {exp:>8}  {'PASS' if r['pass'] else 'FAIL'}", flush=True)
    return EXIT_OK if all_ok else EXIT_FAIL


def _load_pencil(path):
    try:
        return dethom.load_pencil(path)
    except OSError as err:
        raise SystemExit(_fail(f"cannot read {path}: {err.strerror}", EXIT_SETUP))
    except ValueError as err:
        raise SystemExit(_fail(f"{path}: {err}", EXIT_PARSE))


def _fail(msg, code):
    print(f"error: {msg}", file=sys.stderr)
    return code


def _points_json(X):
    return [[[float(v.real), float(v.imag)] for v in x] for x in X]


def parse_starts(text: str) -> np.ndarray:
    """Starts file: a JSON list of points, each a list of 4 ``[re, im]`` pairs."""
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("starts file must hold a JSON list of points")
    pts = []
    for k, p in enumerate(data):
        try:
            z = [complex(float(a), float(b)) for a, b in p]
        except (TypeError, ValueError):
            raise ValueError(f"point {k} is not a list of [re, im] pairs") from None
        if len(z) != 4:
            raise ValueError(f"point {k} has {len(z)} coordinates, expected 4")
        pts.append(z)
    return np.array(pts, dtype=complex).reshape(-1, 4)


def cmd_starts(args) -> int:
    B = _load_pencil(args.pencil)
    X = dethom.expanded_singular_points(B, seed=args.seed)
    _emit(json.dumps(_points_json(X)), args.output)
    if len(X) != dethom.singular_point_count(B.n):
        print(f"warning: found {len(X)} of {dethom.singular_point_count(B.n)} singular points",
              file=sys.stderr)
    return EXIT_OK


def cmd_dethom(args) -> int:
    A = _load_pencil(args.target)
    B = _load_pencil(args.start)
    if A.n != B.n:
        return _fail(f"pencil sizes differ ({A.n} vs {B.n})", EXIT_SETUP)
    try:
        with open(args.starts) as fh:
            S = parse_starts(fh.read())
    except OSError as err:
        return _fail(f"cannot read {args.starts}: {err.strerror}", EXIT_SETUP)
    except ValueError as err:
        return _fail(f"{args.starts}: {err}", EXIT_PARSE)
    opts = _options(args)
    res = dethom.track_singular_points(A, B, S, opts)
    points = []
    for s in res.solutions:
        x = s.x / s.x[np.argmax(np.abs(s.x))]
        entry = {"x": _points_json([x])[0],
                 "residual": float(np.max(np.abs(dethom.F_eval(A, x / np.linalg.norm(x))))),
                 "is_real": bool(s.is_real), "path_index": int(s.path_index),
                 "on_spectrahedron_boundary": None}
        if s.is_real and abs(x[0]) > opts.infinity_tol:
            entry["on_spectrahedron_boundary"] = dethom.on_spectrahedron_boundary(A, x.real)
        points.append(entry)
    failures = [{"path_index": p.path_index, "status": p.status}
                for p in res.paths if p.status != "success"]
    out = {"seed": opts.seed,
           "gamma": None if res.gamma is None else [res.gamma.real, res.gamma.imag],
           "n": A.n, "n_paths": res.n_paths, "n_failed": res.n_failed,
           "runtime_seconds": res.runtime_seconds, "points": points, "failures": failures}
    _emit(json.dumps(out, indent=1), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hcpy", description="Polynomial homotopy continuation.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a polynomial system file")
    p.add_argument("file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--tol", type=float, default=None, help="Newton corrector tolerance")
    p.add_argument("--no-endgame", action="store_true")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run benchmark systems and check their root counts")
    p.add_argument("name", help=f"one of {', '.join(BENCHMARKS)} or all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("starts", help="singular points of a small symmetroid, as a starts file")
    p.add_argument("pencil")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_starts)

    p = sub.add_parser("dethom", help="track symmetroid singular points from pencil B to pencil A")
    p.add_argument("target", help="pencil file for A")
    p.add_argument("start", help="pencil file for B")
    p.add_argument("starts", help="JSON file with singular points of B")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_dethom)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "threads", 1) < 0:
            return _fail("--threads must be >= 0", EXIT_SETUP)
        return args.func(args)
    except SystemExit as ex:
        if isinstance(ex.code, int):
            return ex.code
        raise


if __name__ == "__main__":
    sys.exit(main())
