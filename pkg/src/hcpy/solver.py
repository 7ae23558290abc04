"""Solve square polynomial systems end to end.

``solve`` homogenizes the target and its total-degree start system, tracks
every start solution on a per-path affine patch, runs the endgame and
reports deduplicated finite solutions. ``solve_with_start`` runs the same
pipeline for any homotopy and user-supplied start solutions.
"""
from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from hcpy.endgame import EndgameOptions, run_endgames
from hcpy.homotopies import (
    AffinePatch,
    Homotopy,
    PatchedHomotopy,
    StraightLineHomotopy,
    random_gamma,
)
from hcpy.linalg import solve as linsolve
from hcpy.poly import PolySystem, homogenize
from hcpy.totaldegree import build_start_system, start_solution_array
from hcpy.tracker import (
    BatchOutcome,
    PathStatus,
    TrackerOptions,
    _inf_norm,
    _Segment,
    track_segments,
)


@dataclass(frozen=True)
class SolveOptions:
    seed: int = 0
    threads: int = 1
    tracker: TrackerOptions = field(default_factory=TrackerOptions)
    endgame: EndgameOptions = field(default_factory=EndgameOptions)
    real_tol: float = 1e-6
    dedup_tol: float = 1e-6
    infinity_tol: float = 1e-8
    # a path lost before the endgame with |x_0| below this (relative) is
    # counted as diverging to infinity rather than failed
    diverged_tol: float = 1e-2
    use_endgame: bool = True
    batch_size: int = 512

    def __post_init__(self):
        if min(self.real_tol, self.dedup_tol, self.infinity_tol) <= 0:
            raise ValueError("tolerances must be positive")
        if self.threads < 0 or self.batch_size < 1:
            raise ValueError("threads must be >= 0 and batch_size >= 1")


@dataclass
class Solution:
    x: np.ndarray
    residual: float
    winding_number: int
    is_real: bool
    is_singular: bool
    at_infinity: bool
    path_index: int
    condition: float = float("nan")
    multiplicity: int = 1

    def to_dict(self) -> dict:
        return {
            "x": [[float(v.real), float(v.imag)] for v in self.x],
            "residual": float(self.residual),
            "winding_number": int(self.winding_number),
            "is_real": bool(self.is_real),
            "is_singular": bool(self.is_singular),
            "at_infinity": bool(self.at_infinity),
            "path_index": int(self.path_index),
        }


@dataclass
class PathResult:
    """What happened to one path (before deduplication)."""

    path_index: int
    status: str  # tracker status, or "at_infinity" / "endgame_failed"
    endpoint: np.ndarray
    winding_number: int = 1
    solution: Solution | None = None


@dataclass
class SolveResult:
    solutions: list[Solution]
    n_paths: int
    n_failed: int
    n_at_infinity: int
    runtime_seconds: float
    seed: int
    gamma: complex | None
    paths: list[PathResult] = field(default_factory=list, repr=False)

    @property
    def n_success(self) -> int:
        return self.n_paths - self.n_failed - self.n_at_infinity

    @property
    def real_solutions(self) -> list[Solution]:
        return [s for s in self.solutions if s.is_real]

    @property
    def nonsingular_solutions(self) -> list[Solution]:
        return [s for s in self.solutions if not s.is_singular]

    def to_dict(self) -> dict:
        g = None if self.gamma is None else [float(self.gamma.real), float(self.gamma.imag)]
        return {
            "seed": self.seed,
            "gamma": g,
            "n_paths": self.n_paths,
            "n_failed": self.n_failed,
            "n_at_infinity": self.n_at_infinity,
            "runtime_seconds": self.runtime_seconds,
            "solutions": [s.to_dict() for s in self.solutions],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


# ---------------------------------------------------------------------------
# classification and deduplication
# ---------------------------------------------------------------------------

def classify(endpoint, endgame_winding: int, opts: SolveOptions, *,
             residual: float = 0.0, condition: float = float("nan"),
             path_index: int = -1, homogeneous: bool = True,
             at_infinity: bool | None = None) -> Solution:
    """Turn a path endpoint into a :class:`Solution`.

    With ``homogeneous=True`` the endpoint is ``(x0, x1, ..., xn)``; it is at
    infinity when ``|x0| <= infinity_tol * |x|_inf`` and is otherwise reported
    in affine coordinates ``x_i / x0``.
    """
    e = np.asarray(endpoint, dtype=complex)
    if homogeneous:
        if at_infinity is None:
            at_infinity = bool(abs(e[0]) <= opts.infinity_tol * np.max(np.abs(e)))
        y = e[1:] / e[0] if not at_infinity else e[1:]
    else:
        at_infinity = bool(at_infinity)
        y = e
    scale = 1.0 + np.max(np.abs(y), initial=0.0)
    is_real = bool(not at_infinity and np.max(np.abs(y.imag), initial=0.0) <= opts.real_tol * scale)
    cond_bad = not (condition <= opts.tracker.cond_limit) and not np.isnan(condition)
    return Solution(y, float(residual), int(endgame_winding), is_real,
                    bool(endgame_winding > 1 or cond_bad), at_infinity, int(path_index),
                    float(condition))


def deduplicate(solutions: list[Solution], dedup_tol: float) -> list[Solution]:
    """Greedy clustering in the inf-norm, relative to ``1 + |x|``.

    Each cluster is represented by its member with the smallest residual;
    ``multiplicity`` records the cluster size.
    """
    reps: list[Solution] = []
    pts: list[np.ndarray] = []
    for s in solutions:
        if pts:
            P = np.array(pts)
            d = np.max(np.abs(P - s.x), axis=1)
            hit = np.flatnonzero(d <= dedup_tol * (1 + np.max(np.abs(P), axis=1)))
        else:
            hit = []
        if len(hit):
            j = int(hit[0])
            old = reps[j]
            mult = old.multiplicity + 1
            if s.residual < old.residual:
                reps[j] = s
                pts[j] = s.x
            reps[j].multiplicity = mult
        else:
            s.multiplicity = 1
            reps.append(s)
            pts.append(s.x)
    return reps


# ---------------------------------------------------------------------------
# the pipeline
# ---------------------------------------------------------------------------

def _refine(h: Homotopy, x, fixed0: bool, iters: int = 3):
    """A few Newton steps on ``h(., 0)``; with ``fixed0`` the coordinate 0 is
    held at its value (affine chart). Returns the point, residual and the
    condition number of the Jacobian used."""
    x = np.array(x, dtype=complex)
    best = x.copy()
    H = h.evaluate(x[None], np.zeros(1))[0]
    best_res = float(np.max(np.abs(H)))
    cond = float("nan")
    for _ in range(iters):
        H, J = h.evaluate_and_jacobian(x[None], np.zeros(1))
        H, J = H[0], J[0]
        if fixed0:
            J = J[:, 1:]
        cond = float(np.linalg.cond(J)) if np.all(np.isfinite(J)) else float("inf")
        if J.shape[0] < J.shape[1]:
            break
        dx, c = linsolve(J, H)
        if not np.all(np.isfinite(dx)):
            break
        if fixed0:
            x[1:] -= dx
        else:
            x -= dx
        res = float(np.max(np.abs(h.evaluate(x[None], np.zeros(1))[0])))
        if res < best_res:
            best, best_res = x.copy(), res
        else:
            break
    return best, best_res, cond


_CHART_BREAKS = (0.6, 0.3, 0.15)


def _track_main(h, X, t_end, topts, affine):
    """Track from t = 1 to ``t_end``. On a patched homotopy the run is split
    at a few values of t and every path's chart is re-centred at its current
    point in between, so coordinates in the chart stay bounded."""
    B = len(X)
    knots = [1.0] + [b for b in _CHART_BREAKS if b > t_end] + [t_end]
    if not isinstance(h, PatchedHomotopy):
        knots = [1.0, t_end]
    x = X.copy()
    status = np.full(B, PathStatus.SUCCESS, dtype=np.int64)
    t = np.ones(B, dtype=complex)
    steps = np.zeros(B, dtype=np.int64)
    rejected = np.zeros(B, dtype=np.int64)
    live = np.arange(B)
    V = np.broadcast_to(h.patch.v, X.shape).copy() if len(knots) > 2 else None
    for a, b in zip(knots[:-1], knots[1:]):
        if live.size == 0:
            break
        n = live.size
        seg = _Segment(np.full(n, a, complex), np.full(n, b, complex),
                       np.full(n, b - a, complex), linear=True)
        hl = h.restrict(live) if V is None else PatchedHomotopy(h.inner, AffinePatch(V[live]))
        out = track_segments(hl, x[live], seg, topts, affine=affine)
        x[live] = out.x
        t[live] = out.t
        steps[live] += out.steps
        rejected[live] += out.rejected
        status[live] = out.status
        live = live[out.status == PathStatus.SUCCESS]
        if V is not None and b != t_end:
            xn = x[live] / np.linalg.norm(x[live], axis=1, keepdims=True)
            V[live] = np.conj(xn)
            x[live] = xn
    if V is not None:
        # back to the original charts
        s_ = np.sum(np.broadcast_to(h.patch.v, X.shape) * x, axis=1)
        fine = np.abs(s_) > 1e-12 * _inf_norm(x)
        x[fine] /= s_[fine, None]
    return BatchOutcome(x, t, status, steps, rejected)


def _run_chunk(H: PatchedHomotopy | Homotopy, X, idx, opts: SolveOptions, homogeneous: bool,
               x0_infinity: bool):
    """Track the paths ``idx`` to the endgame radius and through the endgame.

    ``x0_infinity`` says that coordinate 0 is a homogenizing variable, so a
    vanishing x0 means the path goes to infinity.

    Returns (status codes, endpoints, winding numbers, at-infinity flags)."""
    topts = opts.tracker
    hc = H.restrict(idx)
    Xc = X[idx]
    B = len(idx)
    status = np.full(B, PathStatus.SUCCESS, dtype=np.int64)
    ends = Xc.copy()
    winding = np.ones(B, dtype=np.int64)
    at_inf = np.zeros(B, dtype=bool)
    res0 = _inf_norm(hc.evaluate(Xc, np.ones(B)))
    good = np.flatnonzero(res0 <= 10 * topts.corrector_tol)
    status[res0 > 10 * topts.corrector_tol] = PathStatus.FAILED_BAD_START
    t_end = opts.endgame.endgame_radius if opts.use_endgame else 0.0
    out = _track_main(hc.restrict(good), Xc[good], t_end, topts, affine=not homogeneous)
    status[good] = out.status
    ends[good] = out.x
    if x0_infinity:
        lost = good[out.status != PathStatus.SUCCESS]
        e = ends[lost]
        gone = np.abs(e[:, 0]) <= opts.diverged_tol * _inf_norm(e)
        status[lost[gone]] = PathStatus.DIVERGED
    if not opts.use_endgame:
        return status, ends, winding, at_inf
    ok = good[out.status == PathStatus.SUCCESS]
    if ok.size:
        eg = run_endgames(hc.restrict(ok), ends[ok], t_end, opts.endgame, topts,
                          homogeneous=x0_infinity)
        ends[ok] = eg.x0
        winding[ok] = eg.winding
        heading_out = eg.at_infinity | (eg.valuation > opts.endgame.infinity_valuation)
        at_inf[ok] = eg.at_infinity
        lost = ~eg.converged & ~eg.at_infinity
        # a path that loses its footing while clearly heading to infinity is
        # reported at infinity rather than failed
        if x0_infinity:
            e = eg.x0
            gone = np.abs(e[:, 0]) <= opts.diverged_tol * _inf_norm(e)
            rescued = lost & (heading_out | gone)
        else:
            rescued = np.zeros_like(lost)
        at_inf[ok[rescued]] = True
        status[ok[lost & ~rescued]] = PathStatus.FAILED_MIN_STEP
    return status, ends, winding, at_inf


def _pipeline(h: Homotopy, starts, opts: SolveOptions, *, projective: bool,
              dehomogenize: bool, gamma, t0: float) -> SolveResult:
    starts = np.atleast_2d(np.asarray(starts, dtype=complex)) if len(starts) else np.zeros((0, h.nvariables), complex)
    P = starts.shape[0]
    if P == 0:
        return SolveResult([], 0, 0, 0, time.perf_counter() - t0, opts.seed, gamma)
    if projective:
        patch, X = AffinePatch.orthogonal_to(starts)
        H = PatchedHomotopy(h, patch)
    else:
        X, H = starts.copy(), h
    chunks = [np.arange(lo, min(lo + opts.batch_size, P)) for lo in range(0, P, opts.batch_size)]
    nthreads = opts.threads or os.cpu_count() or 1
    work = lambda idx: _run_chunk(H, X, idx, opts, projective, projective and dehomogenize)  # noqa: E731
    if nthreads == 1 or len(chunks) == 1:
        parts = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            parts = list(pool.map(work, chunks))
    status = np.concatenate([p[0] for p in parts])
    ends = np.concatenate([p[1] for p in parts])
    winding = np.concatenate([p[2] for p in parts])
    at_inf = np.concatenate([p[3] for p in parts])

    paths: list[PathResult] = []
    finite: list[Solution] = []
    n_failed = n_inf = 0
    for i in range(P):
        st = PathStatus(status[i])
        if st == PathStatus.DIVERGED and projective:
            n_inf += 1
            paths.append(PathResult(i, st.label, ends[i], int(winding[i])))
            continue
        if st != PathStatus.SUCCESS:
            n_failed += 1
            paths.append(PathResult(i, st.label, ends[i], int(winding[i])))
            continue
        e = ends[i]
        if dehomogenize:
            inf = bool(at_inf[i]) or abs(e[0]) <= opts.infinity_tol * np.max(np.abs(e))
            if inf or not np.all(np.isfinite(e)):
                n_inf += 1
                paths.append(PathResult(i, "at_infinity", e, int(winding[i])))
                continue
            e = e / e[0]
            xr, res, cond = _refine(h, e, fixed0=True, iters=3 if winding[i] == 1 else 0)
            sol = classify(xr, int(winding[i]), opts, residual=res, condition=cond,
                           path_index=i, homogeneous=True, at_infinity=False)
        else:
            if at_inf[i] and projective:
                n_inf += 1
                paths.append(PathResult(i, "at_infinity", e, int(winding[i])))
                continue
            hh = H.restrict([i]) if projective else h
            xr, _, cond = _refine(hh, e, fixed0=False, iters=3 if winding[i] == 1 else 0)
            res = float(np.max(np.abs(h.evaluate(xr[None], np.zeros(1))[0])))
            sol = classify(xr, int(winding[i]), opts, residual=res, condition=cond,
                           path_index=i, homogeneous=False, at_infinity=False)
        finite.append(sol)
        paths.append(PathResult(i, "success", e, int(winding[i]), sol))
    sols = deduplicate(finite, opts.dedup_tol)
    return SolveResult(sols, P, n_failed, n_inf, time.perf_counter() - t0, opts.seed, gamma, paths)


def total_degree_homotopy(F: PolySystem, gamma: complex):
    """The straight-line homotopy from the total-degree start system, in
    homogeneous coordinates, with its homogeneous start solutions."""
    start = build_start_system(F)
    h = StraightLineHomotopy(homogenize(F), homogenize(start.system), gamma)
    S = start_solution_array(start, np.arange(start.count))
    S = np.concatenate([np.ones((S.shape[0], 1), complex), S], axis=1)
    return h, S


def solve(F: PolySystem, opts: SolveOptions = SolveOptions()) -> SolveResult:
    """Approximate all isolated solutions of the square system ``F``."""
    t0 = time.perf_counter()
    if not F.is_square:
        raise ValueError(
            f"solve needs a square system, got {len(F)} equations in {F.nvars} unknowns; "
            "use solve_with_start with your own homotopy and start solutions"
        )
    gamma = random_gamma(np.random.default_rng(opts.seed))
    h, S = total_degree_homotopy(F, gamma)
    return _pipeline(h, S, opts, projective=True, dehomogenize=True, gamma=gamma, t0=t0)


def solve_with_start(h: Homotopy, start_solutions, opts: SolveOptions = SolveOptions(), *,
                     projective: bool = False, dehomogenize: bool = False) -> SolveResult:
    """Track user-supplied start solutions of ``h(., 1)`` to ``t = 0``.

    ``projective=True`` means ``h`` works in homogeneous coordinates; every
    path then gets its own affine patch. ``dehomogenize=True`` additionally
    treats coordinate 0 as the homogenizing variable (infinity detection,
    affine output). Overdetermined homotopies are corrected in the
    least-squares sense automatically.
    """
    t0 = time.perf_counter()
    gamma = getattr(h, "gamma", None)
    return _pipeline(h, list(start_solutions) if not isinstance(start_solutions, np.ndarray) else start_solutions,
                     opts, projective=projective, dehomogenize=dehomogenize, gamma=gamma, t0=t0)
