import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hcpy.poly import (
    Polynomial,
    PolySystem,
    PolynomialSyntaxError,
    degree,
    dehomogenize,
    differentiate,
    evaluate,
    format_system,
    homogenize,
    jacobian,
    parse_polynomial,
    parse_system,
    to_string,
)

XY = ["x", "y"]


def test_parse_examples():
    f = parse_polynomial("x^2 + y^2 - 1", XY)
    assert len(f) == 3 and degree(f) == 2
    g = parse_polynomial("3*x - 2*y", XY)
    assert len(g) == 2 and degree(g) == 1
    z = parse_polynomial("x - x", ["x"])
    assert len(z) == 0 and z.is_zero and degree(z) == 0


def test_parse_complex_and_merging():
    f = parse_polynomial("(1+2i)*x*y + x*y - 0.5*y^3", XY)
    d = f.as_dict()
    assert d[(1, 1)] == 2 + 2j
    assert d[(0, 3)] == -0.5


@pytest.mark.parametrize("text", ["x +* y", "x^", "2*z", "x^-1", "(1+2i", ""])
def test_parse_errors(text):
    with pytest.raises(PolynomialSyntaxError):
        parse_polynomial(text, XY)


def test_parse_system_reports_line():
    with pytest.raises(PolynomialSyntaxError) as err:
        parse_system("variables: x y\n# comment\nx + y\nx +* y\n")
    assert err.value.line == 4
    assert "line 4" in str(err.value)


def test_parse_system_needs_header():
    with pytest.raises(PolynomialSyntaxError):
        parse_system("x + y\n")


def test_evaluate_examples():
    f = parse_polynomial("x^2 + y^2 - 1", XY)
    assert evaluate(f, [1, 0]) == 0
    assert evaluate(f, [2, 3]) == 12
    g = parse_polynomial("3*x - 2*y", XY)
    s = 1 / math.sqrt(13)
    assert abs(evaluate(g, [2 * s, 3 * s])) < 1e-15


def test_evaluate_dimension_mismatch():
    f = parse_polynomial("x + y", XY)
    with pytest.raises(ValueError):
        evaluate(f, [1, 2, 3])


def test_differentiate_examples():
    f = parse_polynomial("x^2 + y^2 - 1", XY)
    assert differentiate(f, 0) == parse_polynomial("2*x", XY)
    g = parse_polynomial("3*x - 2*y", XY)
    assert differentiate(g, 1) == Polynomial.constant(-2, 2)
    assert differentiate(Polynomial.constant(7, 2), 0).is_zero
    with pytest.raises(IndexError):
        differentiate(f, 2)


def test_jacobian_example(circle_line):
    J = jacobian(circle_line, np.array([1, 0]))
    assert np.allclose(J, [[2, 0], [3, -2]])


def test_linear_jacobian_constant():
    F = parse_system("variables: x y z\nx + 2*y - z\n3*y + 1\nx - z + 4\n")
    J1 = jacobian(F, np.array([1, 2, 3]))
    J2 = jacobian(F, np.array([-5, 0.5j, 7]))
    assert np.array_equal(J1, J2)


def test_homogenize_examples():
    F = parse_system("variables: x y\nx^2 + y^2 - 1\n3*x - 2*y\ny - 1\n")
    H = homogenize(F)
    names = ["x0", "x", "y"]
    assert H[0] == parse_polynomial("x^2 + y^2 - x0^2", names)
    assert H[1] == parse_polynomial("3*x - 2*y", names)
    assert H[2] == parse_polynomial("y - x0", names)
    assert all(p.is_homogeneous for p in H)


def test_degree_examples():
    assert degree(parse_polynomial("x^2 + y^2 - 1", XY)) == 2
    assert degree(parse_polynomial("3*x - 2*y", XY)) == 1
    assert degree(Polynomial.constant(7, 2)) == 0


def test_invariants_of_construction():
    f = Polynomial([(1, (1, 0)), (2, (1, 0)), (0, (0, 1)), (5, (0, 0))], 2)
    assert f.as_dict() == {(1, 0): 3, (0, 0): 5}
    with pytest.raises(ValueError):
        Polynomial({(1,): 1}, 2)
    with pytest.raises(ValueError):
        Polynomial({(-1, 0): 1}, 2)
    with pytest.raises(ValueError):
        PolySystem([Polynomial.constant(1, 1), Polynomial.constant(1, 2)])


def test_to_string_round_trip(circle_line):
    F = parse_system("variables: x y\n(1+2i)*x^2*y - y + 2.5\n-x + (0-1i)*y^3\n")
    G = parse_system(format_system(F))
    assert G == F
    assert to_string(circle_line[1], XY) == "3.0*x - 2.0*y"


# --- random polynomials -----------------------------------------------------

@st.composite
def polys(draw, max_vars=6, max_deg=8, nterms=30):
    nvars = draw(st.integers(1, max_vars))
    seed = draw(st.integers(0, 2**32 - 1))
    r = np.random.default_rng(seed)
    terms = {}
    for _ in range(nterms):
        e = r.multinomial(int(r.integers(0, max_deg + 1)), np.ones(nvars + 1) / (nvars + 1))[:nvars]
        terms[tuple(int(v) for v in e)] = complex(r.normal(), r.normal())
    return Polynomial(terms, nvars), r


@given(polys())
def test_scheme_matches_naive(data):
    f, r = data
    for _ in range(10):
        x = (r.normal(size=f.nvars) + 1j * r.normal(size=f.nvars)) / np.sqrt(2)
        a = f.evaluate(x)
        b = f.evaluate_naive(x)
        scale = sum(abs(c) * np.prod(np.abs(x) ** np.array(e)) for c, e in f.terms)
        assert abs(a - b) <= 1e-10 * max(scale, 1e-300)


@given(st.integers(0, 2**32 - 1))
def test_jacobian_finite_differences(seed):
    r = np.random.default_rng(seed)
    n = int(r.integers(1, 5))
    fs = []
    for _ in range(n):
        terms = {tuple(int(v) for v in r.integers(0, 4, size=n)): complex(r.normal(), r.normal())
                 for _ in range(6)}
        fs.append(Polynomial(terms, n))
    F = PolySystem(fs)
    x = r.uniform(-1, 1, n) + 1j * r.uniform(-1, 1, n)
    J = F.jacobian(x)
    h = 1e-6
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        fd = (F.evaluate(x + e) - F.evaluate(x - e)) / (2 * h)
        assert np.max(np.abs(fd - J[:, j])) <= 1e-5 * max(1.0, np.max(np.abs(J)))


@given(polys(max_vars=4, max_deg=6, nterms=12))
def test_homogenize_then_dehomogenize(data):
    f, _ = data
    F = PolySystem([f])
    assert dehomogenize(homogenize(F)) == F


@given(polys(max_vars=4, max_deg=6, nterms=12), st.integers(0, 3))
def test_derivative_commutes_with_evaluation(data, i):
    f, r = data
    i = i % f.nvars
    x = r.uniform(-1, 1, f.nvars) + 1j * r.uniform(-1, 1, f.nvars)
    h = 1e-6
    e = np.zeros(f.nvars)
    e[i] = h
    fd = (f.evaluate(x + e) - f.evaluate(x - e)) / (2 * h)
    d = differentiate(f, i).evaluate(x)
    assert abs(fd - d) <= 1e-5 * max(1.0, abs(d))
