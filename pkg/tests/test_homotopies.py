import numpy as np
import pytest
from hypothesis import given, strategies as st

from hcpy.homotopies import AffinePatch, PatchedHomotopy, StraightLineHomotopy, random_gamma
from hcpy.poly import Polynomial, PolySystem, homogenize, parse_system
from hcpy.totaldegree import build_start_system


def _lin():
    F = parse_system("variables: x\nx\n")
    G = parse_system("variables: x\nx - 1\n")
    return F, G


def test_straightline_examples():
    F, G = _lin()
    h = StraightLineHomotopy(F, G, 1.0)
    assert np.allclose(h.evaluate(np.array([2.0]), 0.5), [1.5])
    assert np.allclose(h.dt(np.array([2.0]), 0.3), [-1.0])


def test_endpoint_identities_are_exact(circle_line):
    G = build_start_system(circle_line).system
    g = random_gamma(np.random.default_rng(3))
    h = StraightLineHomotopy(circle_line, G, g)
    x = np.array([0.3 + 0.1j, -1.2 + 2j])
    assert np.array_equal(h.evaluate(x, 0.0), circle_line.evaluate(x))
    assert np.array_equal(h.evaluate(x, 1.0), g * G.evaluate(x))
    assert np.array_equal(h.jacobian(x, 0.0), circle_line.jacobian(x))


def test_gamma_i_zero_start():
    F = parse_system("variables: x y\nx*y - 2\nx + y^2\n")
    G = PolySystem([Polynomial.constant(0, 2)] * 2)
    h = StraightLineHomotopy(F, G, 1j)
    x = np.array([1.5, -0.5j])
    assert np.allclose(h.dt(x, 0.4), -F.evaluate(x))


def test_gamma_must_be_unit():
    F, G = _lin()
    with pytest.raises(ValueError):
        StraightLineHomotopy(F, G, 2.0)


def test_shape_mismatch():
    F, _ = _lin()
    G = parse_system("variables: x y\nx\ny\n")
    with pytest.raises(ValueError):
        StraightLineHomotopy(F, G)
    h = StraightLineHomotopy(F, F)
    with pytest.raises(ValueError):
        h.evaluate(np.zeros(2), 0.5)


def test_patched_eval_and_row(rng):
    F = homogenize(parse_system("variables: x y\nx^2 + y^2 - 1\n3*x - 2*y\n"))
    h = StraightLineHomotopy(F, F, 1.0)
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    p = PatchedHomotopy(h, AffinePatch(v))
    x = rng.normal(size=3) + 1j * rng.normal(size=3)
    H, J, _ = p.evaluate_all(x, 0.2)
    assert np.isclose(H[-1], v @ x - 1, rtol=0, atol=1e-15)
    assert np.array_equal(J[-1], v)
    e1 = AffinePatch(np.array([1, 0, 0]))
    assert PatchedHomotopy(h, e1).evaluate(np.array([1, 5, 7]), 0.5)[-1] == 0


def test_patched_zero_on_solution():
    F = homogenize(parse_system("variables: x y\nx^2 + y^2 - 1\n3*x - 2*y\n"))
    s = 1 / np.sqrt(13)
    x = np.array([1, 2 * s, 3 * s], dtype=complex)
    patch, xn = AffinePatch.orthogonal_to(x)
    p = PatchedHomotopy(StraightLineHomotopy(F, F), patch)
    assert np.max(np.abs(p.evaluate(xn, 0.0))) < 1e-15


def test_patch_must_be_nonzero():
    with pytest.raises(ValueError):
        AffinePatch(np.zeros(3))


def _fd_check(h, x, t, tol=1e-5, eps=1e-6):
    H, J, Ht = h.evaluate_all(x, t)
    n = len(x)
    for j in range(n):
        e = np.zeros(n, complex)
        e[j] = eps
        fd = (h.evaluate(x + e, t) - h.evaluate(x - e, t)) / (2 * eps)
        assert np.max(np.abs(fd - J[:, j])) <= tol * max(1.0, np.max(np.abs(J)))
    fd = (h.evaluate(x, t + eps) - h.evaluate(x, t - eps)) / (2 * eps)
    assert np.max(np.abs(fd - Ht)) <= tol * max(1.0, np.max(np.abs(Ht)))


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_derivatives_match_finite_differences(seed, t):
    r = np.random.default_rng(seed)
    F = parse_system("variables: x y z\nx^2*y - z + 1\ny*z^2 - x\nx*y*z - 2\n")
    G = build_start_system(F).system
    h = StraightLineHomotopy(homogenize(F), homogenize(G), random_gamma(r))
    v = r.normal(size=4) + 1j * r.normal(size=4)
    p = PatchedHomotopy(h, v)
    x = (r.normal(size=4) + 1j * r.normal(size=4)) / 2
    _fd_check(h, x, t)
    _fd_check(p, x, t)


@given(st.integers(0, 2**32 - 1))
def test_combined_equals_separate(seed):
    r = np.random.default_rng(seed)
    F = parse_system("variables: x y\nx^3 - y + 2\nx*y - 1\n")
    h = StraightLineHomotopy(F, build_start_system(F).system, random_gamma(r))
    x = r.normal(size=2) + 1j * r.normal(size=2)
    t = r.random()
    H, J = h.evaluate_and_jacobian(x, t)
    assert np.array_equal(H, h.evaluate(x, t))
    assert np.array_equal(J, h.jacobian(x, t))


def test_batched_evaluation_matches_single(rng):
    F = parse_system("variables: x y\nx^3 - y + 2\nx*y - 1\n")
    h = StraightLineHomotopy(F, build_start_system(F).system, 1j)
    X = rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))
    T = rng.random(5)
    H, J, Ht = h.evaluate_all(X, T)
    for i in range(5):
        a, b, c = h.evaluate_all(X[i], T[i])
        assert np.allclose(H[i], a) and np.allclose(J[i], b) and np.allclose(Ht[i], c)
