import numpy as np
import pytest
from hypothesis import given, strategies as st

from hcpy.homotopies import AffinePatch, Homotopy, PatchedHomotopy, StraightLineHomotopy
from hcpy.linalg import solve
from hcpy.poly import homogenize, parse_system
from hcpy.totaldegree import build_start_system
from hcpy.tracker import (
    PathStatus,
    SingularJacobianError,
    TrackerOptions,
    davidenko_rhs,
    newton_correct,
    rk4_predict,
    track,
    track_many,
)


def power_homotopy(k):
    """``x^k - t``."""
    F = parse_system(f"variables: x\nx^{k}\n")
    G = parse_system(f"variables: x\nx^{k} - 1\n")
    return StraightLineHomotopy(F, G, 1.0)


class Overdetermined(Homotopy):
    """``[x - 1, 2 (x - 1)]``, constant in t."""

    nequations, nvariables = 2, 1

    def evaluate_all(self, x, t):
        x = self._check(x)
        H = np.stack([x[..., 0] - 1, 2 * (x[..., 0] - 1)], axis=-1)
        J = np.broadcast_to(np.array([[1.0], [2.0]], complex), x.shape[:-1] + (2, 1))
        return H, J, np.zeros_like(H)


def test_options_validation():
    with pytest.raises(ValueError):
        TrackerOptions(min_step=0.5, initial_step=0.1)
    with pytest.raises(ValueError):
        TrackerOptions(step_grow=0.9)
    with pytest.raises(ValueError):
        TrackerOptions(max_corrector_iters=0)


def test_davidenko_examples():
    assert np.allclose(davidenko_rhs(power_homotopy(1), np.array([0.3]), 0.3), [1.0])
    assert np.allclose(davidenko_rhs(power_homotopy(2), np.array([0.5]), 0.25), [1.0])


@given(st.integers(0, 2**32 - 1))
def test_davidenko_defining_residual(seed):
    r = np.random.default_rng(seed)
    F = parse_system("variables: x y\nx^2 + y^2 - 1\n3*x - 2*y\n")
    h = StraightLineHomotopy(F, build_start_system(F).system, np.exp(2j * np.pi * r.random()))
    x = r.normal(size=2) + 1j * r.normal(size=2)
    t = r.random()
    v = davidenko_rhs(h, x, t)
    _, J, Ht = h.evaluate_all(x, t)
    assert np.max(np.abs(J @ v + Ht)) <= 1e-10 * max(1.0, np.max(np.abs(Ht)))


def test_davidenko_singular():
    with pytest.raises(SingularJacobianError):
        davidenko_rhs(power_homotopy(2), np.array([0.0]), 0.5)


def test_rk4_examples():
    h1 = power_homotopy(1)
    assert np.allclose(rk4_predict(h1, np.array([1.0]), 1.0, -0.5), [0.5], atol=1e-15)
    assert np.array_equal(rk4_predict(h1, np.array([0.7]), 0.7, 0.0), [0.7])
    xp = rk4_predict(power_homotopy(2), np.array([1.0]), 1.0, -0.36)
    assert abs(xp[0] - 0.8) <= 1e-4


def test_newton_examples():
    h = power_homotopy(2)
    opts = TrackerOptions(corrector_tol=1e-10, max_corrector_iters=4)
    res = newton_correct(h, np.array([1.1]), 1.0, opts)
    assert res.converged and res.iterations <= 4
    assert abs(res.x[0] - 1) <= 1e-10
    res = newton_correct(h, np.array([1.0]), 1.0, opts)
    assert res.converged and res.iterations <= 1 and res.update_norm <= 1e-15
    res = newton_correct(Overdetermined(), np.array([1.2]), 0.0, opts)
    assert res.converged and abs(res.x[0] - 1) <= 1e-12


def test_newton_quadratic_convergence():
    F = parse_system("variables: x y\nx^2 + y^2 - 1\n3*x - 2*y\n")
    h = StraightLineHomotopy(F, F)
    s = 1 / np.sqrt(13)
    root = np.array([2 * s, 3 * s])
    x = root + np.array([1e-2, -2e-2])
    errs = []
    for _ in range(4):
        x = newton_correct(h, x, 0.0, TrackerOptions(max_corrector_iters=1)).x
        errs.append(np.max(np.abs(x - root)))
    e = [v for v in errs if v > 1e-14]
    for a, b in zip(e, e[1:]):
        if a < 1e-3:
            assert b <= 10 * a * a


def test_track_circle_line(circle_line):
    start = build_start_system(circle_line)
    h = StraightLineHomotopy(circle_line, start.system, np.exp(0.7j))
    out = track(h, np.array([1.0, 1.0]))
    assert out.success and out.residual <= 1e-7
    s = 1 / np.sqrt(13)
    assert min(np.max(np.abs(out.x_end - sgn * np.array([2 * s, 3 * s]))) for sgn in (1, -1)) <= 1e-7


def test_track_linear():
    out = track(power_homotopy(1), np.array([1.0]))
    assert out.success and abs(out.x_end[0]) <= 1e-10 and out.t_end == 0


def test_track_singular_start_never_false_success():
    F = parse_system("variables: x\nx^2\n")
    h = StraightLineHomotopy(F, F)
    out = track(h, np.array([0.0]))
    assert out.status != PathStatus.SUCCESS


def test_bad_start_reported():
    out = track_many(power_homotopy(2), np.array([[1.0], [3.0]]))
    assert out[0].success
    assert out[1].status == PathStatus.FAILED_BAD_START


def test_projective_tracking_and_patch(circle_line):
    start = build_start_system(circle_line)
    h = StraightLineHomotopy(homogenize(circle_line), homogenize(start.system), np.exp(1.3j))
    S = np.array([[1, 1, 1], [1, -1, 1]], dtype=complex)
    patch, X = AffinePatch.orthogonal_to(S)
    opts = TrackerOptions()
    out = track_many(PatchedHomotopy(h, patch), X, opts=opts)
    for i, o in enumerate(out):
        assert o.success
        assert abs(patch.v[i] @ o.x_end - 1) <= 1e-12
        assert o.residual <= 10 * opts.corrector_tol


def test_determinism(circle_line):
    start = build_start_system(circle_line)
    h = StraightLineHomotopy(circle_line, start.system, np.exp(0.7j))
    a = track(h, np.array([1.0, 1.0]))
    b = track(h, np.array([1.0, 1.0]))
    assert np.array_equal(a.x_end, b.x_end) and a.steps == b.steps


def test_step_budget():
    out = track(power_homotopy(3), np.array([1.0]), opts=TrackerOptions(max_steps=3))
    assert out.status == PathStatus.FAILED_MAX_STEPS
    assert out.steps + out.rejected <= 3


def test_linalg_least_squares_and_singular():
    A = np.array([[1.0, 0], [0, 1], [1, 1]])
    b = np.array([1.0, 2, 3])
    x, cond = solve(A, b)
    assert np.allclose(x, [1, 2]) and np.isfinite(cond)
    x, cond = solve(np.zeros((2, 2)), np.ones(2))
    assert not np.isfinite(cond)
    with pytest.raises(ValueError):
        solve(np.ones((1, 2)), np.ones(1))
