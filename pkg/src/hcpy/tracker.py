"""Predictor-corrector path tracking.

Paths are advanced by a classical Runge-Kutta step on the Davidenko
equation ``J dx/dt = -dH/dt`` followed by Newton correction. Many paths are
tracked in lockstep as one batch, but each keeps its own step size, status
and step counter, and every arithmetic operation acts on paths
independently, so a path's result does not depend on its batch mates.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from hcpy.homotopies import Homotopy
from hcpy.linalg import solve


class SingularJacobianError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class TrackerOptions:
    corrector_tol: float = 1e-7
    max_corrector_iters: int = 3
    initial_step: float = 0.1
    min_step: float = 1e-14
    max_steps: int = 10_000
    step_grow: float = 2.0
    step_shrink: float = 0.5
    cond_limit: float = 1e12

    def __post_init__(self):
        if not 0 < self.min_step < self.initial_step <= 1:
            raise ValueError("need 0 < min_step < initial_step <= 1")
        if not self.step_shrink < 1 < self.step_grow:
            raise ValueError("need step_shrink < 1 < step_grow")
        if self.corrector_tol <= 0 or self.max_corrector_iters < 1 or self.max_steps < 1:
            raise ValueError("tolerances and iteration limits must be positive")


class PathStatus(enum.IntEnum):
    ACTIVE = 0
    SUCCESS = 1
    FAILED_MIN_STEP = 2
    FAILED_MAX_STEPS = 3
    FAILED_SINGULAR_JACOBIAN = 4
    DIVERGED = 5
    FAILED_BAD_START = 6

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass
class PathOutcome:
    status: PathStatus
    x_end: np.ndarray
    t_end: complex
    residual: float
    steps: int
    rejected: int = 0

    @property
    def success(self) -> bool:
        return self.status == PathStatus.SUCCESS


def _inf_norm(v):
    return np.max(np.abs(v), axis=-1) if v.shape[-1] else np.zeros(v.shape[:-1])


# ---------------------------------------------------------------------------
# Davidenko right-hand side, predictor and corrector
# ---------------------------------------------------------------------------

def _velocity(h: Homotopy, x, t, dtds, cond_limit):
    _, Hx, Ht = h.evaluate_all(x, t)
    v, cond = solve(Hx, -Ht * dtds[..., None])
    bad = ~(cond <= cond_limit) | ~np.all(np.isfinite(v), axis=-1)
    return v, bad


def davidenko_rhs(h: Homotopy, x, t, cond_limit: float = TrackerOptions.cond_limit):
    """``dx/dt`` along the solution curve through ``(x, t)``.

    Solves ``H_x v = -H_t`` (least squares when ``H`` has more equations than
    unknowns). Raises :class:`SingularJacobianError` if the Jacobian's
    condition estimate exceeds ``cond_limit``.
    """
    x = np.asarray(x, dtype=complex)
    t = np.broadcast_to(np.asarray(t, dtype=complex), x.shape[:-1])
    v, bad = _velocity(h, x, t, np.ones_like(t), cond_limit)
    if np.any(bad):
        raise SingularJacobianError("Jacobian is singular or too ill-conditioned")
    return v


def _rk4(h, x, s, ds, seg, cond_limit):
    def f(xx, ss):
        t, dtds = seg.at(ss)
        return _velocity(h, xx, t, dtds, cond_limit)

    half = ds[..., None] / 2
    k1, b1 = f(x, s)
    k2, b2 = f(x + half * k1, s + ds / 2)
    k3, b3 = f(x + half * k2, s + ds / 2)
    k4, b4 = f(x + ds[..., None] * k3, s + ds)
    xp = x + ds[..., None] / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return xp, b1 | b2 | b3 | b4


def rk4_predict(h: Homotopy, x, t, dt, cond_limit: float = TrackerOptions.cond_limit):
    """One classical Runge-Kutta step of size ``dt`` on the Davidenko ODE."""
    x = np.asarray(x, dtype=complex)
    lead = x.shape[:-1]
    t = np.broadcast_to(np.asarray(t, dtype=complex), lead)
    dt = np.broadcast_to(np.asarray(dt, dtype=complex), lead)
    seg = _Segment(t, t + dt, dt, linear=True)
    xp, bad = _rk4(h, x, np.zeros(lead), np.ones(lead), seg, cond_limit)
    if np.any(bad):
        raise SingularJacobianError("Jacobian is singular or too ill-conditioned")
    return xp


@dataclass
class NewtonResult:
    x: np.ndarray
    iterations: np.ndarray
    update_norm: np.ndarray
    converged: np.ndarray
    singular: np.ndarray
    residual: np.ndarray | None = None


def _newton(h, x, t, tol, max_iters, cond_limit):
    """Batched Newton iteration; freezes members once they converge or fail."""
    x = x.copy()
    B = x.shape[0]
    iters = np.zeros(B, dtype=np.int64)
    last = np.full(B, np.inf)
    converged = np.zeros(B, dtype=bool)
    failed = np.zeros(B, dtype=bool)
    singular = np.zeros(B, dtype=bool)
    live = np.arange(B)
    for it in range(1, max_iters + 1):
        if live.size == 0:
            break
        hl = h.restrict(live)
        xl = x[live]
        H, Hx = hl.evaluate_and_jacobian(xl, t[live])
        dx, cond = solve(Hx, H)
        sing = ~(cond <= cond_limit) | ~np.all(np.isfinite(dx), axis=-1)
        xn = xl - dx
        nrm = _inf_norm(dx)
        scale = np.maximum(1.0, _inf_norm(xn))
        conv = ~sing & (nrm <= tol * scale)
        # an update that fails to halve means we are not in the quadratic basin
        stalled = ~sing & ~conv & (it > 1) & (nrm > 0.5 * last[live])
        ok = ~sing
        x[live[ok]] = xn[ok]
        iters[live] = it
        last[live] = np.where(sing, last[live], nrm)
        singular[live[sing]] = True
        failed[live[sing | stalled]] = True
        converged[live[conv]] = True
        live = live[~(conv | sing | stalled)]
    return x, iters, last, converged & ~failed, singular


def newton_correct(h: Homotopy, x, t, opts: TrackerOptions = TrackerOptions()) -> NewtonResult:
    """Newton's method ``x <- x - J^+ H(x, t)`` at fixed ``t``.

    Uses an exact solve for square Jacobians and the least-squares step for
    tall ones. Convergence means the last update satisfies
    ``|dx|_inf <= corrector_tol * max(1, |x|_inf)`` within
    ``max_corrector_iters`` iterations.
    """
    x = np.asarray(x, dtype=complex)
    lead = x.shape[:-1]
    X = x.reshape(-1, x.shape[-1])
    T = np.broadcast_to(np.asarray(t, dtype=complex), lead).reshape(-1)
    xo, it, nrm, conv, sing = _newton(h, X, T, opts.corrector_tol,
                                      opts.max_corrector_iters, opts.cond_limit)
    res = _inf_norm(h.evaluate(xo, T))
    return NewtonResult(xo.reshape(x.shape), it.reshape(lead), nrm.reshape(lead),
                        conv.reshape(lead), sing.reshape(lead), res.reshape(lead))


# ---------------------------------------------------------------------------
# Batched tracking engine
# ---------------------------------------------------------------------------

class _Segment:
    """Per-path parametrisation ``t(s)`` of ``s in [0, 1]``.

    Linear: ``t = t0 + s * delta``. Exponential: ``t = t0 * exp(s * delta)``,
    which keeps ``|t|`` fixed along an arc when ``delta`` is imaginary and
    shrinks ``t`` geometrically when ``delta`` is real. ``t(1)`` is pinned to
    ``t1`` exactly.
    """

    def __init__(self, t0, t1, delta, linear: bool):
        self.t0 = np.asarray(t0, dtype=complex)
        self.t1 = np.asarray(t1, dtype=complex)
        self.delta = np.asarray(delta, dtype=complex)
        self.linear = linear

    def at(self, s):
        if self.linear:
            t = self.t0 + s * self.delta
            dtds = self.delta
        else:
            t = self.t0 * np.exp(s * self.delta)
            dtds = t * self.delta
        t = np.where(s >= 1.0, self.t1, t)
        return t, np.broadcast_to(dtds, t.shape)

    def speed(self):
        """|dt/ds| at s = 0."""
        return np.abs(self.delta) if self.linear else np.abs(self.t0 * self.delta)

    def take(self, idx):
        return _Segment(self.t0[idx], self.t1[idx], self.delta[idx], self.linear)


@dataclass
class BatchOutcome:
    x: np.ndarray
    t: np.ndarray
    status: np.ndarray
    steps: np.ndarray
    rejected: np.ndarray


def track_segments(h: Homotopy, X, seg: _Segment, opts: TrackerOptions, *,
                   first_step=None, max_step=None, affine: bool = False) -> BatchOutcome:
    """Track every row of ``X`` along its own segment from s=0 to s=1.

    Step sizes are in units of ``s``; by default they are derived from the
    ``t``-unit options (``initial_step`` doubles as the largest step).
    """
    X = np.array(X, dtype=complex)
    B = X.shape[0]
    speed = np.maximum(seg.speed(), 1e-300)
    ds_max = np.minimum(1.0, opts.initial_step / speed) if max_step is None else np.broadcast_to(max_step, (B,)).astype(float)
    ds = ds_max.copy() if first_step is None else np.minimum(ds_max, first_step)
    ds_min = np.minimum(opts.min_step / speed, 0.5 * ds_max)
    s = np.zeros(B)
    status = np.zeros(B, dtype=np.int64)
    steps = np.zeros(B, dtype=np.int64)
    rejected = np.zeros(B, dtype=np.int64)
    tol = opts.corrector_tol
    active = np.arange(B)
    while active.size:
        ha = h.restrict(active)
        sa = seg.take(active)
        xa = X[active]
        cur = s[active]
        step = np.minimum(ds[active], 1.0 - cur)
        last = step >= 1.0 - cur
        snew = np.where(last, 1.0, cur + step)
        xp, bad_pred = _rk4(ha, xa, cur, step, sa, opts.cond_limit)
        tnew, _ = sa.at(snew)
        xp_ok = np.where(bad_pred[:, None], xa, xp)
        xc, iters, _, conv, sing = _newton(ha, xp_ok, tnew, tol, opts.max_corrector_iters,
                                           opts.cond_limit)
        acc = conv & ~bad_pred
        singular = bad_pred | sing
        steps[active] += 1
        ia = active[acc]
        X[ia] = xc[acc]
        s[ia] = snew[acc]
        easy = acc & (iters <= 2)
        ds[active[easy]] = np.minimum(ds[active[easy]] * opts.step_grow, ds_max[active[easy]])
        rj = active[~acc]
        rejected[rj] += 1
        ds[rj] *= opts.step_shrink
        done = acc & last
        status[active[done]] = PathStatus.SUCCESS
        under = ~acc & (ds[active] < ds_min[active])
        status[active[under & singular]] = PathStatus.FAILED_SINGULAR_JACOBIAN
        status[active[under & ~singular]] = PathStatus.FAILED_MIN_STEP
        if affine:
            big = acc & ~done & (_inf_norm(xc) > 1e14)
            status[active[big]] = PathStatus.DIVERGED
        out_of_steps = (status[active] == PathStatus.ACTIVE) & (steps[active] >= opts.max_steps)
        status[active[out_of_steps]] = PathStatus.FAILED_MAX_STEPS
        active = active[status[active] == PathStatus.ACTIVE]
    t_end, _ = seg.at(s)
    return BatchOutcome(X, t_end, status, steps, rejected)


def track_many(h: Homotopy, X, t_from=1.0, t_to=0.0, opts: TrackerOptions = TrackerOptions(),
               *, affine: bool = False) -> list[PathOutcome]:
    """Track each row of ``X`` from ``t_from`` to ``t_to`` along a straight
    segment. Rows whose start residual exceeds ``10 * corrector_tol`` are
    reported as ``failed_bad_start`` without tracking."""
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    B = X.shape[0]
    t0 = np.broadcast_to(np.asarray(t_from, dtype=complex), (B,))
    t1 = np.broadcast_to(np.asarray(t_to, dtype=complex), (B,))
    res0 = _inf_norm(h.evaluate(X, t0))
    good = np.flatnonzero(res0 <= 10 * opts.corrector_tol)
    seg = _Segment(t0[good], t1[good], t1[good] - t0[good], linear=True)
    out = track_segments(h.restrict(good), X[good], seg, opts, affine=affine)
    results: list[PathOutcome] = []
    k = 0
    for i in range(B):
        if k < good.size and good[k] == i:
            st = PathStatus(out.status[k])
            xe, te = out.x[k], out.t[k]
            res = float(_inf_norm(h.restrict([i]).evaluate(xe[None], te[None]))[0])
            results.append(PathOutcome(st, xe, complex(te), res, int(out.steps[k]), int(out.rejected[k])))
            k += 1
        else:
            results.append(PathOutcome(PathStatus.FAILED_BAD_START, X[i], complex(t0[i]),
                                       float(res0[i]), 0))
    return results


def track(h: Homotopy, x_start, t_from=1.0, t_to=0.0,
          opts: TrackerOptions = TrackerOptions(), *, affine: bool = False) -> PathOutcome:
    """Track a single path; see :func:`track_many`."""
    return track_many(h, np.asarray(x_start, dtype=complex)[None], t_from, t_to, opts,
                      affine=affine)[0]
