"""Endgame near t = 0: Cauchy loops plus geometric-radius stabilization.

Every path first gets a direct finish: it is tracked straight from ``t = r``
to ``t = 0`` and kept if the Jacobian there is well conditioned, which
settles all regular endpoints cheaply.

The rest go through Cauchy loops. Each radius ``r_k = r * lambda^k`` is
probed with a loop: the path is continued around ``t = r_k e^{i theta}``
until it closes up after ``c`` circuits (``c`` is the winding number). The
mean of the loop samples approximates ``x(0)``. Estimates from consecutive
radii that agree within ``stabilization_tol`` are accepted. A loop whose
mean is far smaller than its samples is not trusted and the path moves to
the next radius instead.

For homotopies in homogeneous coordinates (homogenizing variable at index
0) the power-series valuation of ``x_0`` relative to the dominant coordinate
is estimated from ``t * x'(t) / x(t)`` at every radius. While it is clearly
positive the loops are skipped, and once it has stayed positive and steady
over a few radii the path is declared to go to infinity. An accepted loop
estimate with vanishing ``x_0`` also counts as infinite.

Affine charts are re-centred at the current point before each leg, so
chart coordinates stay bounded even when the path leaves the starting chart.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from hcpy.homotopies import AffinePatch, Homotopy, PatchedHomotopy
from hcpy.tracker import (
    PathStatus,
    TrackerOptions,
    _inf_norm,
    _Segment,
    _velocity,
    track_segments,
)


class EndgameError(RuntimeError):
    pass


@dataclass(frozen=True)
class EndgameOptions:
    endgame_radius: float = 0.1
    loop_samples_per_circle: int = 16
    max_winding: int = 12
    geometric_factor: float = 0.5
    stabilization_tol: float = 1e-6
    # valuation above which a path is treated as heading to infinity
    infinity_valuation: float = 0.04
    # consecutive radii with a stable positive valuation needed to stop
    infinity_checks: int = 3
    # largest change between consecutive valuation estimates deemed stable
    valuation_tol: float = 0.01
    # a settled loop estimate with |x_0| below this (relative) is at infinity
    infinity_confirm_tol: float = 1e-5
    # first try to track straight to t = 0; accept when the Jacobian there
    # has condition number below direct_cond
    direct_finish: bool = True
    direct_cond: float = 1e8
    # ... and at most this many times the condition number at t = r; it
    # stays bounded on a regular path but blows up at a singular endpoint
    direct_growth: float = 1e5
    direct_max_steps: int = 100

    def __post_init__(self):
        if not 0 < self.endgame_radius < 1:
            raise ValueError("endgame_radius must lie in (0, 1)")
        if self.max_winding < 1 or self.loop_samples_per_circle < 3:
            raise ValueError("need max_winding >= 1 and at least 3 samples per circle")
        if not 0 < self.geometric_factor < 1:
            raise ValueError("geometric_factor must lie in (0, 1)")


@dataclass
class EndgameResult:
    x0: np.ndarray
    winding_number: int
    converged: bool
    samples_used: int
    at_infinity: bool = False
    radius: float = 0.0
    tracking_failed: bool = False


@dataclass
class EndgameBatch:
    x0: np.ndarray
    winding: np.ndarray
    converged: np.ndarray
    samples: np.ndarray
    at_infinity: np.ndarray
    radius: np.ndarray
    failed: np.ndarray
    valuation: np.ndarray

    def result(self, i: int) -> EndgameResult:
        return EndgameResult(self.x0[i], int(self.winding[i]), bool(self.converged[i]),
                             int(self.samples[i]), bool(self.at_infinity[i]),
                             float(self.radius[i]), bool(self.failed[i]))


def cauchy_endpoint(samples) -> np.ndarray:
    """Mean of the loop samples: the trapezoidal rule for
    ``(1 / 2 pi i) \\oint x(t) / t dt`` on a circle around 0."""
    samples = np.asarray(samples, dtype=complex)
    if samples.shape[0] == 0:
        raise ValueError("no samples")
    return samples.mean(axis=0)


def _close(a, b, tol):
    return _inf_norm(a - b) <= tol * np.maximum(1.0, _inf_norm(b))


def _align(a, b):
    """Rescale the projective points ``a`` to match ``b`` in the coordinate
    where ``b`` is largest."""
    j = np.argmax(np.abs(b), axis=1)
    rows = np.arange(len(b))
    with np.errstate(divide="ignore", invalid="ignore"):
        return a * (b[rows, j] / a[rows, j])[:, None]


_RADIAL, _LOOP = 0, 1


def _valuation(h, x, r, cond_limit):
    """Valuation of x_0 relative to the largest other coordinate."""
    v, bad = _velocity(h, x, r.astype(complex), np.ones(len(r), dtype=complex), cond_limit)
    m = 1 + np.argmax(np.abs(x[:, 1:]), axis=1)
    rows = np.arange(len(r))
    with np.errstate(divide="ignore", invalid="ignore"):
        nu = np.real(r * v[:, 0] / x[:, 0]) - np.real(r * v[rows, m] / x[rows, m])
    nu[bad | ~np.isfinite(nu)] = np.nan
    return nu


def _condition_at(h, x, t):
    """Condition number of the Jacobian at ``(x, t)``; a patched homotopy is
    measured in the chart centred at ``x``."""
    if isinstance(h, PatchedHomotopy):
        xn = x / np.linalg.norm(x, axis=1, keepdims=True)
        J = h.inner.jacobian(xn, t)
        J = np.concatenate([J, np.conj(xn)[:, None, :]], axis=1)
    else:
        J = h.jacobian(x, t)
    ok = np.all(np.isfinite(J), axis=(1, 2))
    c = np.full(len(x), np.inf)
    if ok.any():
        c[ok] = np.linalg.cond(J[ok])
    return c


def direct_finish(h: Homotopy, X, r, tracker_opts: TrackerOptions = TrackerOptions(),
                  cond_max: float = 1e8, max_steps: int = 100, growth: float = 1e5):
    """Track each row of ``X`` straight from ``t = r`` to ``t = 0``.

    Returns the endpoints and a mask of the paths that arrived at a point
    with a well-conditioned Jacobian: condition number at most ``cond_max``
    and at most ``growth`` times its value at the start. Those are regular
    endpoints and need no loops; paths to singular points or to infinity
    fail here cheaply.
    """
    X = np.asarray(X, dtype=complex)
    B = len(X)
    r = np.broadcast_to(np.asarray(r, dtype=float), (B,)).astype(complex)
    seg = _Segment(r, np.zeros(B, complex), -r, linear=True)
    topts = replace(tracker_opts, max_steps=min(tracker_opts.max_steps, max_steps))
    c_r = _condition_at(h, X, r)
    out = track_segments(h, X, seg, topts, first_step=0.25, max_step=0.25)
    ok = out.status == PathStatus.SUCCESS
    c_0 = _condition_at(h, out.x[ok], np.zeros(int(ok.sum())))
    ok[ok] = (c_0 <= cond_max) & (c_0 <= growth * c_r[ok])
    return out.x, ok


def run_endgames(h: Homotopy, X, r, opts: EndgameOptions = EndgameOptions(),
                 tracker_opts: TrackerOptions = TrackerOptions(), *,
                 homogeneous: bool = False, record: bool = False) -> EndgameBatch:
    """Batched endgame for the points ``X`` (rows) lying on their paths at ``t = r``."""
    X = np.array(X, dtype=complex)
    B, k = X.shape
    N = opts.loop_samples_per_circle
    lam = opts.geometric_factor
    stol = opts.stabilization_tol
    ctol = max(tracker_opts.corrector_tol * 10, min(stol, 1e-4))
    x = X.copy()
    radius = np.broadcast_to(np.asarray(r, dtype=float), (B,)).copy()
    phase = np.full(B, _RADIAL)
    fresh = np.ones(B, dtype=bool)  # at the start of a radius, not yet processed
    leg = np.zeros(B, dtype=np.int64)
    circuits = np.zeros(B, dtype=np.int64)
    loop_start = x.copy()
    acc = np.zeros((B, k), dtype=complex)
    peak = np.zeros(B)
    nsamp = np.zeros(B, dtype=np.int64)
    prev = np.full((B, k), np.nan + 0j)
    est = x.copy()
    winding = np.ones(B, dtype=np.int64)
    samples_used = np.zeros(B, dtype=np.int64)
    converged = np.zeros(B, dtype=bool)
    at_inf = np.zeros(B, dtype=bool)
    failed = np.zeros(B, dtype=bool)
    done = np.zeros(B, dtype=bool)
    nu_hist = np.full((B, opts.infinity_checks), np.nan)
    trace = [] if record else None
    # on a patched homotopy the chart is re-centred at the current point
    # before every radial leg and loop, so it never runs off to infinity
    charts = isinstance(h, PatchedHomotopy)
    if charts:
        v0 = np.broadcast_to(h.patch.v, (B, k))
        V = v0.copy()

    def _on(rows):
        return PatchedHomotopy(h.inner, AffinePatch(V[rows])) if charts else h.restrict(rows)

    def _recentre(rows):
        if charts and rows.size:
            xn = x[rows] / np.linalg.norm(x[rows], axis=1, keepdims=True)
            V[rows] = np.conj(xn)
            x[rows] = xn

    _recentre(np.arange(B))
    # the condition number only flags a singular endpoint once the chart row
    # fixes the scale; affine paths always go through the loops
    if opts.direct_finish and charts:
        xf, ok = direct_finish(_on(np.arange(B)), x, radius, tracker_opts, opts.direct_cond,
                               opts.direct_max_steps, opts.direct_growth)
        est[ok] = xf[ok]
        converged[ok] = True
        done[ok] = True

    while True:
        # decisions at the start of each radius
        idx = np.flatnonzero(~done & fresh)
        if idx.size:
            fresh[idx] = False
            skip = np.zeros(idx.size, dtype=bool)
            if homogeneous:
                nu = _valuation(_on(idx), x[idx], radius[idx], tracker_opts.cond_limit)
                nu_hist[idx] = np.concatenate([nu_hist[idx, 1:], nu[:, None]], axis=1)
                hist = nu_hist[idx]
                stable = (np.all(hist > opts.infinity_valuation, axis=1)
                          & (np.max(np.abs(np.diff(hist, axis=1)), axis=1) < opts.valuation_tol))
                hit = idx[stable]
                at_inf[hit] = True
                done[hit] = True
                est[hit] = x[hit]
                skip = (nu > opts.infinity_valuation)[~stable]
                idx = idx[~stable]
            start = idx[~skip]
            _recentre(start)
            phase[idx[skip]] = _RADIAL
            phase[start] = _LOOP
            leg[start] = 0
            circuits[start] = 0
            loop_start[start] = x[start]
            acc[start] = 0
            peak[start] = 0
            nsamp[start] = 0
        live = np.flatnonzero(~done)
        if live.size == 0:
            break
        # one leg for every live path
        is_loop = phase[live] == _LOOP
        _recentre(live[~is_loop])
        r_l = radius[live]
        th0 = 2 * np.pi * leg[live] / N
        th1 = 2 * np.pi * (leg[live] + 1) / N
        t0 = np.where(is_loop, r_l * np.exp(1j * th0), r_l)
        t1 = np.where(is_loop, r_l * np.exp(1j * th1), r_l * lam)
        t1 = np.where(is_loop & (leg[live] + 1 == N), r_l + 0j, t1)
        delta = np.where(is_loop, 1j * 2 * np.pi / N, np.log(lam) + 0j)
        seg = _Segment(t0, t1, delta, linear=False)
        out = track_segments(_on(live), x[live], seg, tracker_opts,
                             first_step=1.0, max_step=1.0)
        ok = out.status == PathStatus.SUCCESS
        # a loop that fails usually passed near another branch point: retry
        # on a smaller circle; a failing radial leg ends the path
        lost_loop = live[~ok & is_loop]
        x[lost_loop] = loop_start[lost_loop]
        phase[lost_loop] = _RADIAL
        bad = live[~ok & ~is_loop]
        failed[bad] = True
        done[bad] = True
        est[bad] = x[bad]
        good = live[ok]
        x[good] = out.x[ok]
        if trace is not None:
            trace.append((live[ok], out.t[ok], out.x[ok]))
        loop_ok = is_loop[ok]
        # radial legs: move to the next radius
        rad = good[~loop_ok]
        radius[rad] *= lam
        fresh[rad] = True
        under = rad[radius[rad] < tracker_opts.min_step]
        done[under] = True
        est[under] = np.where(np.isnan(prev[under]), x[under], prev[under])
        # loop legs: accumulate samples, close circuits
        lp = good[loop_ok]
        acc[lp] += x[lp]
        peak[lp] = np.maximum(peak[lp], _inf_norm(x[lp]))
        nsamp[lp] += 1
        leg[lp] += 1
        wrap = lp[leg[lp] == N]
        leg[wrap] = 0
        circuits[wrap] += 1
        closed = wrap[_close(x[wrap], loop_start[wrap], ctol)]
        e = acc[closed] / nsamp[closed, None]
        winding[closed] = circuits[closed]
        samples_used[closed] += nsamp[closed]
        # a mean far smaller than the samples means the path is leaving the
        # chart (a Laurent rather than a power series): the mean is useless
        trust = _inf_norm(e) >= 0.5 * peak[closed] if charts else np.ones(closed.size, bool)
        phase[closed[~trust]] = _RADIAL
        prev[closed[~trust]] = np.nan
        closed, e = closed[trust], e[trust]
        have_prev = ~np.isnan(prev[closed, 0])
        e_cmp = _align(e, prev[closed]) if charts else e
        agree = have_prev & _close(e_cmp, prev[closed], stol)
        fin = closed[agree]
        done[fin] = True
        est[fin] = e[agree]
        # a settled estimate with x_0 = 0 is a point at infinity
        vanish = np.zeros(fin.size, dtype=bool)
        if homogeneous:
            vanish = np.abs(e[agree, 0]) <= opts.infinity_confirm_tol * _inf_norm(e[agree])
        converged[fin[~vanish]] = True
        at_inf[fin[vanish]] = True
        cont = closed[~agree]
        prev[cont] = e[~agree]
        phase[cont] = _RADIAL
        # loops that refuse to close within max_winding: shrink and retry
        give_up = wrap[(circuits[wrap] >= opts.max_winding) & ~np.isin(wrap, closed) & ~done[wrap]]
        samples_used[give_up] += nsamp[give_up]
        x[give_up] = loop_start[give_up]
        phase[give_up] = _RADIAL
    if charts:
        # back to the caller's chart where that chart contains the point
        s_ = np.sum(v0 * est, axis=1)
        fine = np.abs(s_) > 1e-12 * _inf_norm(est)
        est[fine] /= s_[fine, None]
    batch = EndgameBatch(est, winding, converged, samples_used, at_inf, radius, failed,
                         nu_hist[:, -1])
    if record:
        batch.trace = trace
    return batch


def run_endgame(h: Homotopy, x_r, r: float, opts: EndgameOptions = EndgameOptions(),
                tracker_opts: TrackerOptions = TrackerOptions(), *,
                homogeneous: bool = False) -> EndgameResult:
    """Endgame for one path point ``x_r`` at ``t = r``."""
    return run_endgames(h, np.asarray(x_r, dtype=complex)[None], r, opts, tracker_opts,
                        homogeneous=homogeneous).result(0)


def cauchy_loop(h: Homotopy, x_r, r: float, opts: EndgameOptions = EndgameOptions(),
                tracker_opts: TrackerOptions = TrackerOptions()):
    """Loop around ``t = r e^{i theta}`` until the path closes.

    Returns the winding number ``c`` and the ``c * loop_samples_per_circle``
    samples taken at the nodes ``theta = 2 pi j / N`` (the last one back at
    ``theta = 0``). Raises :class:`EndgameError` if tracking fails or the
    path has not closed after ``max_winding`` circuits.
    """
    x = np.asarray(x_r, dtype=complex)[None]
    N = opts.loop_samples_per_circle
    ctol = max(tracker_opts.corrector_tol * 10, min(opts.stabilization_tol, 1e-4))
    start = x.copy()
    samples = []
    for c in range(1, opts.max_winding + 1):
        for j in range(N):
            t0 = r * np.exp(2j * np.pi * j / N)
            t1 = r if j + 1 == N else r * np.exp(2j * np.pi * (j + 1) / N)
            seg = _Segment(np.array([t0]), np.array([t1], dtype=complex),
                           np.array([2j * np.pi / N]), linear=False)
            out = track_segments(h, x, seg, tracker_opts, first_step=1.0, max_step=1.0)
            if out.status[0] != PathStatus.SUCCESS:
                raise EndgameError(f"loop tracking failed ({PathStatus(out.status[0]).label})")
            x = out.x
            samples.append(x[0].copy())
        if _close(x, start, ctol)[0]:
            return c, np.array(samples)
    raise EndgameError(f"path did not close within {opts.max_winding} circuits")
