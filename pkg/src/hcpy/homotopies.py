"""Homotopies H(x, t) and the interface the path tracker relies on.

Every homotopy evaluates on stacks of points: ``x`` has shape ``(..., k)``
and ``t`` is a scalar or an array broadcastable to ``x.shape[:-1]``. ``t``
may be complex (the endgame walks around circles in the t-plane). The
start system sits at ``t = 1`` and the target at ``t = 0``.
"""
from __future__ import annotations

import numpy as np

from hcpy.poly import PolySystem


class Homotopy:
    """Base class for homotopies.

    Subclasses set ``nequations`` / ``nvariables`` and implement
    :meth:`evaluate_all`, which returns ``(H, dH/dx, dH/dt)``. The other
    accessors derive from it, so combined and separate calls agree exactly.
    Override them when a cheaper route exists.
    """

    nequations: int
    nvariables: int

    def evaluate_all(self, x, t):
        raise NotImplementedError

    def evaluate(self, x, t):
        return self.evaluate_all(x, t)[0]

    def jacobian(self, x, t):
        return self.evaluate_all(x, t)[1]

    def dt(self, x, t):
        return self.evaluate_all(x, t)[2]

    def evaluate_and_jacobian(self, x, t):
        H, Hx, _ = self.evaluate_all(x, t)
        return H, Hx

    def restrict(self, index):
        """The same homotopy for the batch members selected by ``index``.

        Only homotopies carrying per-path data (like a per-path patch) need
        to do anything here.
        """
        return self

    def _check(self, x):
        x = np.asarray(x, dtype=complex)
        if x.shape[-1] != self.nvariables:
            raise ValueError(f"expected {self.nvariables} coordinates, got {x.shape[-1]}")
        return x


def _tcol(t, x):
    t = np.asarray(t)
    return np.broadcast_to(t, x.shape[:-1])[..., None]


def random_gamma(rng: np.random.Generator) -> complex:
    """A point drawn uniformly from the unit circle."""
    return complex(np.exp(2j * np.pi * rng.random()))


class StraightLineHomotopy(Homotopy):
    """``H(x, t) = (1 - t) F(x) + gamma t G(x)``."""

    def __init__(self, target: PolySystem, start: PolySystem, gamma: complex = 1.0):
        if target.nvars != start.nvars or len(target) != len(start):
            raise ValueError("start and target systems must have matching shapes")
        if not np.isclose(abs(gamma), 1.0, rtol=0, atol=1e-12):
            raise ValueError("gamma must have unit modulus")
        self.target = target
        self.start = start
        self.gamma = complex(gamma)
        self.nequations = len(target)
        self.nvariables = target.nvars

    def evaluate(self, x, t):
        x = self._check(x)
        t = _tcol(t, x)
        return (1 - t) * self.target.evaluate(x) + (self.gamma * t) * self.start.evaluate(x)

    def dt(self, x, t):
        x = self._check(x)
        return self.gamma * self.start.evaluate(x) - self.target.evaluate(x)

    def evaluate_all(self, x, t):
        x = self._check(x)
        F, JF = self.target.evaluate_and_jacobian(x)
        G, JG = self.start.evaluate_and_jacobian(x)
        t = _tcol(t, x)
        a = 1 - t
        b = self.gamma * t
        H = a * F + b * G
        Hx = a[..., None] * JF + b[..., None] * JG
        Ht = self.gamma * G - F
        return H, Hx, Ht


class AffinePatch:
    """The affine chart ``v . x = 1`` (plain bilinear product, no conjugation).

    ``v`` has shape ``(k,)`` or ``(npaths, k)`` for one patch per path.
    """

    def __init__(self, v):
        v = np.asarray(v, dtype=complex)
        if not np.all(np.any(v != 0, axis=-1)):
            raise ValueError("patch vector must be nonzero")
        self.v = v

    @classmethod
    def orthogonal_to(cls, x) -> tuple["AffinePatch", np.ndarray]:
        """Patch ``conj(x / |x|)`` together with the rescaled point lying on it."""
        x = np.asarray(x, dtype=complex)
        xn = x / np.linalg.norm(x, axis=-1, keepdims=True)
        return cls(np.conj(xn)), xn

    def __call__(self, x):
        return np.sum(self.v * x, axis=-1) - 1

    def take(self, index) -> "AffinePatch":
        return self if self.v.ndim == 1 else AffinePatch(self.v[index])


class PatchedHomotopy(Homotopy):
    """Append the patch equation ``v . x - 1 = 0`` to a homotopy in
    homogeneous coordinates."""

    def __init__(self, inner: Homotopy, patch):
        self.inner = inner
        self.patch = patch if isinstance(patch, AffinePatch) else AffinePatch(patch)
        if self.patch.v.shape[-1] != inner.nvariables:
            raise ValueError("patch length does not match the homotopy")
        self.nequations = inner.nequations + 1
        self.nvariables = inner.nvariables

    def evaluate(self, x, t):
        x = self._check(x)
        H = self.inner.evaluate(x, t)
        return np.concatenate([H, self.patch(x)[..., None]], axis=-1)

    def dt(self, x, t):
        x = self._check(x)
        Ht = self.inner.dt(x, t)
        return np.concatenate([Ht, np.zeros(Ht.shape[:-1] + (1,), complex)], axis=-1)

    def evaluate_all(self, x, t):
        x = self._check(x)
        H, Hx, Ht = self.inner.evaluate_all(x, t)
        lead = x.shape[:-1]
        H = np.concatenate([H, self.patch(x)[..., None]], axis=-1)
        row = np.broadcast_to(self.patch.v, lead + (self.nvariables,))[..., None, :]
        Hx = np.concatenate([Hx, row], axis=-2)
        Ht = np.concatenate([Ht, np.zeros(lead + (1,), complex)], axis=-1)
        return H, Hx, Ht

    def restrict(self, index):
        return PatchedHomotopy(self.inner.restrict(index), self.patch.take(index))
