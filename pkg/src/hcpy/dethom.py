"""Singular points of symmetroids through a determinant homotopy.

A pencil is a 4-tuple of real symmetric matrices (A0, A1, A2, A3). Its
symmetroid is the surface ``f(x) = det(x0 A0 + x1 A1 + x2 A2 + x3 A3) = 0``
in P^3; the singular points are the zeros of ``F = (f, df/dx0, ..., df/dx3)``.

``DeterminantHomotopy`` evaluates ``F`` of the blended pencil
``(1 - t) A + t B`` and its derivatives from matrix identities,

    df/dx_i       = det(A(x)) tr(A(x)^-1 A_i)
    d2f/dx_i dx_j = det(A(x)) [tr(P_i) tr(P_j) - tr(P_i P_j)],  P_i = A(x)^-1 A_i

without ever expanding ``f`` into monomials. Both are evaluated in adjugate
form from an SVD ``A(x) = U S V^H``: with ``M~ = U^H M V`` and ``phase =
det(U) det(V^H)``,

    D det[M]       = phase * sum_k M~_kk prod_{m != k} s_m
    D2 det[M1, M2] = phase * sum_{k != l} (M1~_kk M2~_ll - M1~_kl M2~_lk) prod_{m != k, l} s_m

so nothing blows up where ``A(x)`` loses rank, which is exactly where the
paths end (rank n - 2 at the nodes of the symmetroid).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from hcpy.homotopies import Homotopy, random_gamma
from hcpy.poly import Polynomial, PolySystem, differentiate, variables
from hcpy.solver import SolveOptions, solve, solve_with_start


@dataclass(frozen=True)
class SymmetricPencil:
    """Four real symmetric n x n matrices, stored as an array ``(4, n, n)``."""

    mats: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mats, dtype=float)
        if m.ndim != 3 or m.shape[0] != 4 or m.shape[1] != m.shape[2] or m.shape[1] < 1:
            raise ValueError("a pencil is four square matrices of the same size")
        for i, a in enumerate(m):
            if np.max(np.abs(a - a.T)) > 1e-12:
                raise ValueError(f"matrix A{i} is not symmetric")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "mats", m)

    @property
    def n(self) -> int:
        return self.mats.shape[1]

    @classmethod
    def from_matrices(cls, A0, A1, A2, A3) -> "SymmetricPencil":
        return cls(np.array([A0, A1, A2, A3], dtype=float))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "SymmetricPencil":
        g = rng.standard_normal((4, n, n))
        return cls((g + np.transpose(g, (0, 2, 1))) / 2)

    def __getitem__(self, i):
        return self.mats[i]


def pencil_value(p: SymmetricPencil, x) -> np.ndarray:
    """``x0 A0 + x1 A1 + x2 A2 + x3 A3`` (complex symmetric, not Hermitian).

    ``x`` may be a stack of points ``(..., 4)``.
    """
    x = np.asarray(x, dtype=complex)
    if x.shape[-1] != 4:
        raise ValueError("a pencil is evaluated at points with 4 coordinates")
    return np.einsum("...i,ijk->...jk", x, p.mats)


# ---------------------------------------------------------------------------
# adjugate-form derivatives of det
# ---------------------------------------------------------------------------

def _leave_out_products(s):
    """``q1[k] = prod_{m != k} s_m`` and ``q2[k, l] = prod_{m != k, l} s_m``
    (zero on the diagonal), for a stack of vectors ``s`` ``(B, n)``."""
    B, n = s.shape
    eye = np.eye(n, dtype=bool)
    q1 = np.prod(np.where(eye[None], 1.0, s[:, None, :]), axis=2)
    if n < 2:
        return q1, np.zeros((B, n, n))
    drop = eye[:, None, :] | eye[None, :, :]  # (k, l, m): m in {k, l}
    q2 = np.prod(np.where(drop[None], 1.0, s[:, None, None, :]), axis=3)
    q2[:, eye] = 0.0
    return q1, q2


class PencilWorkspace:
    """Factorization of the pencil value at a stack of points.

    Holds the SVD ``C = U diag(s) V^H`` of ``C = A(x)`` for every point and
    the leave-one/two-out singular value products; the derivative routines
    reuse it. Build a new one whenever ``x`` (or ``t``) changes.
    """

    def __init__(self, C):
        C = np.asarray(C, dtype=complex)
        self.C = C
        U, s, Vh = np.linalg.svd(C)
        self.U, self.s, self.Vh = U, s, Vh
        self.phase = np.linalg.det(U) * np.linalg.det(Vh)
        self.q1, self.q2 = _leave_out_products(s)

    @classmethod
    def at(cls, p: SymmetricPencil, x) -> "PencilWorkspace":
        x = np.atleast_2d(np.asarray(x, dtype=complex))
        return cls(pencil_value(p, x))

    def project(self, M):
        """``U^H M V`` for direction matrices ``M`` of shape ``(B, r, n, n)``
        or ``(r, n, n)``."""
        Uh = np.conj(np.swapaxes(self.U, -1, -2))
        V = np.conj(np.swapaxes(self.Vh, -1, -2))
        return np.einsum("bij,b...jk,bkl->b...il", Uh, np.broadcast_to(M, (len(self.s),) + M.shape[-3:]), V)

    def det(self):
        return self.phase * np.prod(self.s, axis=1)

    def first(self, Mt):
        """D det[M] for projected directions ``Mt`` ``(B, r, n, n)`` -> ``(B, r)``."""
        d = np.diagonal(Mt, axis1=-2, axis2=-1)
        return self.phase[:, None] * np.einsum("brk,bk->br", d, self.q1)

    def second(self, Mt, Nt):
        """D2 det[M_i, N_j] for projected directions -> ``(B, r, r')``."""
        dm = np.diagonal(Mt, axis1=-2, axis2=-1)
        dn = np.diagonal(Nt, axis1=-2, axis2=-1)
        a = np.einsum("bik,bkl,bjl->bij", dm, self.q2, dn)
        b = np.einsum("bikl,bjlk,bkl->bij", Mt, Nt, self.q2)
        return self.phase[:, None, None] * (a - b)


def _points(x):
    x = np.asarray(x, dtype=complex)
    if x.shape[-1] != 4:
        raise ValueError("symmetroid points have 4 homogeneous coordinates")
    return x


def f_eval(p: SymmetricPencil, x):
    """``det(A(x))``; works on stacks of points."""
    x = _points(x)
    return np.linalg.det(pencil_value(p, x))


def f_gradient(p: SymmetricPencil, x, ws: PencilWorkspace | None = None):
    """``df/dx_i = det(A(x)) tr(A(x)^-1 A_i)``, in adjugate form."""
    x = _points(x)
    lead = x.shape[:-1]
    ws = ws or PencilWorkspace.at(p, x.reshape(-1, 4))
    g = ws.first(ws.project(p.mats))
    return g.reshape(lead + (4,))


def f_hessian(p: SymmetricPencil, x, ws: PencilWorkspace | None = None):
    """``d2f/dx_i dx_j = det(A) [tr(P_i) tr(P_j) - tr(P_i P_j)]``, in adjugate form."""
    x = _points(x)
    lead = x.shape[:-1]
    ws = ws or PencilWorkspace.at(p, x.reshape(-1, 4))
    Mt = ws.project(p.mats)
    return ws.second(Mt, Mt).reshape(lead + (4, 4))


def F_eval(p: SymmetricPencil, x, ws: PencilWorkspace | None = None):
    """``(f, df/dx0, ..., df/dx3)``; its zeros are the singular points of the symmetroid."""
    x = _points(x)
    lead = x.shape[:-1]
    ws = ws or PencilWorkspace.at(p, x.reshape(-1, 4))
    g = ws.first(ws.project(p.mats))
    return np.concatenate([ws.det()[:, None], g], axis=1).reshape(lead + (5,))


# ---------------------------------------------------------------------------
# the homotopy
# ---------------------------------------------------------------------------

class DeterminantHomotopy(Homotopy):
    """``H(x, t) = F_{(1 - t) A + gamma t B}(x)``: 5 equations in 4 homogeneous unknowns.

    ``target`` is A (reached at ``t = 0``), ``start`` is B (``t = 1``).
    ``gamma = 1`` is the plain straight line between the pencils. With real
    pencils and real t, conjugate paths can meet on that line; a random unit
    ``gamma`` moves the path off the real locus. ``gamma B`` has the same
    symmetroid as B, so the start points do not change.
    Track it with an affine patch appended; the Newton corrector then works
    in the least-squares sense on the 6 x 4 system.
    """

    nequations = 5
    nvariables = 4

    def __init__(self, target: SymmetricPencil, start: SymmetricPencil, gamma: complex = 1.0):
        if target.n != start.n:
            raise ValueError("target and start pencils must have the same size")
        if not np.isclose(abs(gamma), 1.0, rtol=0, atol=1e-12):
            raise ValueError("gamma must have unit modulus")
        self.target = target
        self.start = start
        self.gamma = complex(gamma)
        self.n = target.n
        self._delta = self.gamma * start.mats - target.mats

    def _blend(self, t):
        """Per-point blended matrices ``(B, 4, n, n)``."""
        t = np.asarray(t, dtype=complex)[:, None, None, None]
        return self.target.mats[None] + t * self._delta[None]

    def evaluate_all(self, x, t):
        x = self._check(x)
        lead = x.shape[:-1]
        X = x.reshape(-1, 4)
        T = np.broadcast_to(np.asarray(t, dtype=complex), lead).reshape(-1)
        Ci = self._blend(T)
        C = np.einsum("bi,bijk->bjk", X, Ci)
        ws = PencilWorkspace(C)
        Mt = ws.project(Ci)
        Dt = ws.project(self._delta)
        Et = np.einsum("bi,bijk->bjk", X, Dt)[:, None]  # dC/dt
        g = ws.first(Mt)
        h = ws.second(Mt, Mt)
        H = np.concatenate([ws.det()[:, None], g], axis=1)
        Hx = np.concatenate([g[:, None, :], h], axis=1)
        ft = ws.first(Et)
        gt = ws.second(Et, Mt)[:, 0, :] + ws.first(Dt)
        Ht = np.concatenate([ft, gt], axis=1)
        return H.reshape(lead + (5,)), Hx.reshape(lead + (5, 4)), Ht.reshape(lead + (5,))


def dethom_eval(h: DeterminantHomotopy, x, t):
    return h.evaluate(x, t)


def dethom_jacobian(h: DeterminantHomotopy, x, t):
    return h.jacobian(x, t)


def dethom_dt(h: DeterminantHomotopy, x, t):
    return h.dt(x, t)


# ---------------------------------------------------------------------------
# counting and classification
# ---------------------------------------------------------------------------

def singular_point_count(n: int) -> int:
    """Number of isolated singular points of a generic symmetroid of degree n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.comb(n + 1, 3)


def monomial_count(n: int) -> int:
    """Number of monomials in ``x0..x3, t`` of the expanded homotopy
    ``F_{(1-t)A+tB}`` for generic pencils of size n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return (n + 1) * math.comb(n + 3, n) + 4 * (n + 1) * math.comb(n + 2, n - 1)


def on_spectrahedron_boundary(p: SymmetricPencil, x, tol: float = 1e-8,
                              infinity_tol: float = 1e-8) -> bool:
    """True iff ``A0 + z1 A1 + z2 A2 + z3 A3`` with ``z = x[1:] / x0`` is
    positive semidefinite up to ``tol`` relative to its norm.

    For a singular point of the symmetroid (``det = 0``) this is membership
    in the boundary of the spectrahedron.
    """
    x = np.asarray(x)
    if np.iscomplexobj(x):
        if np.max(np.abs(x.imag)) > tol * max(1.0, np.max(np.abs(x))):
            raise ValueError("point is not real")
        x = x.real
    x = x.astype(float)
    if abs(x[0]) <= infinity_tol * np.max(np.abs(x)):
        raise ValueError("x0 vanishes: the point is outside the affine chart x0 != 0")
    z = np.concatenate([[1.0], x[1:] / x[0]])
    A = np.einsum("i,ijk->jk", z, p.mats)
    w = np.linalg.eigvalsh(A)
    return bool(w[0] >= -tol * max(np.max(np.abs(w)), 1e-300))


# ---------------------------------------------------------------------------
# expanded (monomial) form, for small n
# ---------------------------------------------------------------------------

def _det_poly(M):
    """Determinant of a square matrix of polynomials, by permutation expansion."""
    n = len(M)
    total = 0
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = 1
        for i in range(n):
            term = term * M[i][perm[i]]
        total = total + (-term if inv % 2 else term)
    return total


def expanded_system(p: SymmetricPencil) -> PolySystem:
    """``F_A`` as five explicit polynomials in ``x0..x3`` (small n only)."""
    xs = variables(4)
    M = [[sum((float(p.mats[i, r, c]) * xs[i] for i in range(4)), Polynomial.constant(0, 4))
          for c in range(p.n)] for r in range(p.n)]
    f = _det_poly(M)
    return PolySystem([f] + [differentiate(f, i) for i in range(4)], ["x0", "x1", "x2", "x3"])


def expanded_homotopy(target: SymmetricPencil, start: SymmetricPencil,
                      gamma: complex = 1.0) -> PolySystem:
    """``H(x, t)`` as five explicit polynomials in ``x0..x3, t`` (t is variable 4)."""
    if target.n != start.n:
        raise ValueError("pencil sizes differ")
    xs = variables(5)
    t = xs[4]
    n = target.n
    M = []
    for r in range(n):
        row = []
        for c in range(n):
            e = Polynomial.constant(0, 5)
            for i in range(4):
                a, b = float(target.mats[i, r, c]), complex(gamma) * float(start.mats[i, r, c])
                e = e + (a + (b - a) * t) * xs[i]
            row.append(e)
        M.append(row)
    f = _det_poly(M)
    return PolySystem([f] + [differentiate(f, i) for i in range(4)],
                      ["x0", "x1", "x2", "x3", "t"])


def expanded_singular_points(p: SymmetricPencil, seed: int = 0, opts=None) -> np.ndarray:
    """Singular points of the symmetroid from the expanded system (small n).

    The gradient equations imply ``f = 0`` (Euler), so three random linear
    combinations of them are solved in the chart ``x0 = 1`` with the
    total-degree solver; spurious roots are removed by the residual of all
    five equations. Returns homogeneous points ``(m, 4)`` with ``x0 = 1``.
    """
    F = expanded_system(p)
    rng = np.random.default_rng(seed)
    R = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    grads = F.polys[1:]
    aff = []
    for row in R:
        g = sum((complex(c) * q for c, q in zip(row, grads)), Polynomial.constant(0, 4))
        # substitute x0 = 1
        d = {}
        for c, e in g.terms:
            key = e[1:]
            d[key] = d.get(key, 0) + c
        aff.append(Polynomial(d, 3))
    opts = opts or SolveOptions(seed=seed)
    res = solve(PolySystem(aff, ["x1", "x2", "x3"]), opts)
    pts = []
    for s in res.solutions:
        x = np.concatenate([[1.0 + 0j], s.x])
        scale = max(1.0, float(np.max(np.abs(x)))) ** p.n
        r = np.max(np.abs(F.evaluate(x[None])[0])) / scale
        if r <= 1e-8:
            pts.append(x)
    return np.array(pts).reshape(-1, 4)


# ---------------------------------------------------------------------------
# pencil files
# ---------------------------------------------------------------------------

def parse_pencil(text: str) -> SymmetricPencil:
    """Parse a pencil file: a header ``n: <int>`` followed by four n x n
    matrices, one row per line, matrices separated by blank lines. Lines
    starting with ``#`` are ignored."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if not ln.startswith("#")]
    while lines and not lines[0]:
        lines.pop(0)
    if not lines or not lines[0].lower().startswith("n:"):
        raise ValueError("pencil file must start with 'n: <int>'")
    try:
        n = int(lines[0][2:].strip())
    except ValueError:
        raise ValueError(f"bad size header {lines[0]!r}") from None
    if n < 1:
        raise ValueError("n must be >= 1")
    blocks, cur = [], []
    for ln in lines[1:]:
        if ln:
            cur.append(ln)
        elif cur:
            blocks.append(cur)
            cur = []
    if cur:
        blocks.append(cur)
    if len(blocks) != 4:
        raise ValueError(f"expected 4 matrices, found {len(blocks)}")
    mats = []
    for k, block in enumerate(blocks):
        if len(block) != n:
            raise ValueError(f"matrix A{k} has {len(block)} rows, expected {n}")
        rows = []
        for ln in block:
            try:
                row = [float(v) for v in ln.split()]
            except ValueError:
                raise ValueError(f"matrix A{k}: non-numeric entry in {ln!r}") from None
            if len(row) != n:
                raise ValueError(f"matrix A{k}: row {ln!r} has {len(row)} entries, expected {n}")
            rows.append(row)
        mats.append(rows)
    return SymmetricPencil(np.array(mats))


def format_pencil(p: SymmetricPencil) -> str:
    out = [f"n: {p.n}", ""]
    for a in p.mats:
        out += [" ".join(repr(float(v)) for v in row) for row in a]
        out.append("")
    return "\n".join(out)


def load_pencil(path) -> SymmetricPencil:
    with open(path) as fh:
        return parse_pencil(fh.read())


# ---------------------------------------------------------------------------
# tracking
# ---------------------------------------------------------------------------

def track_singular_points(target: SymmetricPencil, start: SymmetricPencil, starts, opts=None,
                          gamma: complex | None = None):
    """Track singular points of the start symmetroid to the target one.

    ``gamma`` defaults to a random unit number drawn from ``opts.seed``.

    ``starts`` are homogeneous points ``(m, 4)`` with ``F_start ~ 0``. Returns
    the :class:`~hcpy.solver.SolveResult` of the tracking run; its solutions
    are homogeneous points of the target (no dehomogenization), and paths whose
    start does not satisfy the start system come back as failures.
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=complex))
    if starts.shape[-1] != 4:
        raise ValueError("start points need 4 homogeneous coordinates")
    opts = opts or SolveOptions()
    if gamma is None:
        gamma = random_gamma(np.random.default_rng(opts.seed))
    h = DeterminantHomotopy(target, start, gamma)
    return solve_with_start(h, starts, opts, projective=True, dehomogenize=False)
