"""Sparse multivariate polynomials with complex coefficients.

Polynomials are immutable. Terms are kept in graded-lexicographic order
(highest total degree first). Evaluation goes through a greedy Horner
scheme compiled to a small instruction tape; the same tape yields the
gradient by forward differentiation, so a system and its Jacobian come out
of one pass.
"""
from __future__ import annotations

import re
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from hcpy._kernels import (
    OP_ADD,
    OP_CONST,
    OP_MULPOW,
    OP_STORE,
    run_tape,
)

Monomial = tuple  # tuple of non-negative ints, one per variable


class PolynomialSyntaxError(ValueError):
    """Malformed polynomial text.

    ``pos`` is the 0-based column of the offending character and ``line`` the
    1-based line number when parsing a whole file (``None`` otherwise).
    """

    def __init__(self, message: str, pos: int | None = None, line: int | None = None):
        self.msg = message
        self.pos = pos
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if pos is not None:
            where.append(f"column {pos + 1}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


def _grlex_key(exps: Monomial):
    return (sum(exps), exps)


class Polynomial:
    """A polynomial in ``nvars`` variables.

    Parameters
    ----------
    terms : mapping or iterable
        Either ``{exponents: coefficient}`` or an iterable of
        ``(coefficient, exponents)`` pairs. Repeated monomials are summed and
        exact zeros are dropped.
    nvars : int
        Number of ambient variables.
    """

    __slots__ = ("nvars", "_terms", "__dict__")

    def __init__(self, terms: Mapping | Iterable = (), nvars: int = 1):
        if nvars < 1:
            raise ValueError("nvars must be positive")
        acc: dict[Monomial, complex] = {}
        items = terms.items() if isinstance(terms, Mapping) else ((e, c) for c, e in terms)
        for exps, coeff in items:
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars:
                raise ValueError(f"monomial {exps} does not have {nvars} entries")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            acc[exps] = acc.get(exps, 0j) + complex(coeff)
        self.nvars = nvars
        self._terms = tuple(
            (acc[e], e) for e in sorted(acc, key=_grlex_key, reverse=True) if acc[e] != 0
        )

    # -- construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, c, nvars: int) -> "Polynomial":
        return cls({(0,) * nvars: c}, nvars)

    @classmethod
    def variable(cls, i: int, nvars: int) -> "Polynomial":
        if not 0 <= i < nvars:
            raise IndexError(f"variable index {i} out of range for {nvars} variables")
        e = [0] * nvars
        e[i] = 1
        return cls({tuple(e): 1.0}, nvars)

    # -- basic properties -----------------------------------------------------
    @property
    def terms(self) -> list[tuple[complex, Monomial]]:
        return list(self._terms)

    def as_dict(self) -> dict[Monomial, complex]:
        return {e: c for c, e in self._terms}

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        return degree(self)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for _, e in self._terms}) <= 1

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, float, complex)):
            other = Polynomial.constant(other, self.nvars)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self):
        return hash((self.nvars, self._terms))

    def __repr__(self) -> str:
        return f"Polynomial({to_string(self)!r}, nvars={self.nvars})"

    # -- arithmetic -----------------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError("polynomials live in different numbers of variables")
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return Polynomial.constant(other, self.nvars)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        d = self.as_dict()
        for c, e in other._terms:
            d[e] = d.get(e, 0j) + c
        return Polynomial(d, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({e: -c for c, e in self._terms}, self.nvars)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        d: dict[Monomial, complex] = {}
        for c1, e1 in self._terms:
            for c2, e2 in other._terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                d[e] = d.get(e, 0j) + c1 * c2
        return Polynomial(d, self.nvars)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = Polynomial.constant(1.0, self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- calculus and evaluation ---------------------------------------------
    def differentiate(self, i: int) -> "Polynomial":
        return differentiate(self, i)

    @cached_property
    def scheme(self) -> "EvaluationScheme":
        return EvaluationScheme(self)

    def evaluate(self, x) -> complex | np.ndarray:
        return evaluate(self, x)

    __call__ = evaluate

    def evaluate_naive(self, x) -> complex | np.ndarray:
        """Term-by-term summation; reference for the Horner scheme."""
        x = np.asarray(x, dtype=complex)
        if x.shape[-1] != self.nvars:
            raise ValueError(f"expected {self.nvars} coordinates, got {x.shape[-1]}")
        out = np.zeros(x.shape[:-1], dtype=complex)
        for c, e in self._terms:
            out = out + c * np.prod(x ** np.array(e), axis=-1)
        return out[()] if out.ndim == 0 else out


def variables(nvars: int) -> list[Polynomial]:
    """The coordinate functions ``x_0, ..., x_{nvars-1}``."""
    return [Polynomial.variable(i, nvars) for i in range(nvars)]


def degree(f: Polynomial) -> int:
    """Total degree; the zero polynomial has degree 0."""
    return max((sum(e) for _, e in f._terms), default=0)


def differentiate(f: Polynomial, i: int) -> Polynomial:
    if not 0 <= i < f.nvars:
        raise IndexError(f"variable index {i} out of range for {f.nvars} variables")
    d = {}
    for c, e in f._terms:
        if e[i] > 0:
            e2 = list(e)
            e2[i] -= 1
            d[tuple(e2)] = c * e[i]
    return Polynomial(d, f.nvars)


def evaluate(f: Polynomial, x) -> complex | np.ndarray:
    """Evaluate ``f`` at ``x`` (shape ``(..., nvars)``) via its Horner scheme."""
    return f.scheme(x)


# ---------------------------------------------------------------------------
# Horner evaluation schemes
# ---------------------------------------------------------------------------

def _horner_code(terms: list[tuple[Monomial, complex]], nvars: int) -> list[tuple]:
    const = 0j
    rest = []
    for e, c in terms:
        if any(e):
            rest.append((e, c))
        else:
            const += c
    if not rest:
        return [(OP_CONST, const)]
    counts = [0] * nvars
    for e, _ in rest:
        for v in range(nvars):
            if e[v]:
                counts[v] += 1
    v = counts.index(max(counts))
    with_v = [(e, c) for e, c in rest if e[v]]
    without = [(e, c) for e, c in rest if not e[v]]
    m = min(e[v] for e, _ in with_v)
    quotient = [(e[:v] + (e[v] - m,) + e[v + 1:], c) for e, c in with_v]
    code = _horner_code(quotient, nvars) + [(OP_MULPOW, v, m)]
    if without:
        code += _horner_code(without, nvars) + [(OP_ADD,)]
    if const != 0:
        code += [(OP_CONST, const), (OP_ADD,)]
    return code


class _Tape:
    """Flat instruction arrays consumed by :func:`hcpy._kernels.run_tape`."""

    def __init__(self, code: list[tuple], nvars: int, nout: int):
        n = len(code)
        self.ops = np.empty(n, dtype=np.int64)
        self.ia = np.zeros(n, dtype=np.int64)
        self.ib = np.zeros(n, dtype=np.int64)
        consts = []
        depth = maxdepth = 0
        maxdeg = 1
        for j, ins in enumerate(code):
            op = ins[0]
            self.ops[j] = op
            if op == OP_CONST:
                self.ia[j] = len(consts)
                consts.append(ins[1])
                depth += 1
            elif op == OP_MULPOW:
                self.ia[j], self.ib[j] = ins[1], ins[2]
                maxdeg = max(maxdeg, ins[2])
            elif op == OP_ADD:
                depth -= 1
            elif op == OP_STORE:
                self.ia[j] = ins[1]
                depth -= 1
            maxdepth = max(maxdepth, depth)
        self.consts = np.array(consts, dtype=complex)
        self.nvars = nvars
        self.nout = nout
        self.maxdeg = maxdeg
        self.depth = max(maxdepth, 1)

    def __len__(self):
        return len(self.ops)

    def run(self, x, jacobian: bool):
        x = np.asarray(x, dtype=complex)
        if x.shape[-1] != self.nvars:
            raise ValueError(f"expected {self.nvars} coordinates, got {x.shape[-1]}")
        lead = x.shape[:-1]
        X = np.ascontiguousarray(x.reshape(-1, self.nvars))
        vals, jac = run_tape(self.ops, self.ia, self.ib, self.consts, self.nout,
                             self.maxdeg, self.depth, X, jacobian)
        vals = vals.reshape(lead + (self.nout,))
        if jacobian:
            return vals, jac.reshape(lead + (self.nout, self.nvars))
        return vals, None


class EvaluationScheme:
    """Greedy variable-factored Horner plan for one polynomial.

    The variable occurring in the most remaining terms is factored out (by
    its smallest exponent among those terms) and both parts are treated
    recursively, e.g. ``x^3 + x^2 y + x + 1 -> x(x(x + y) + 1) + 1``.
    """

    def __init__(self, f: Polynomial):
        self.nvars = f.nvars
        code = _horner_code([(e, c) for c, e in f._terms], f.nvars) + [(OP_STORE, 0)]
        self._tape = _Tape(code, f.nvars, 1)

    @property
    def instructions(self) -> list[tuple]:
        """Human-readable instruction list (without the final store)."""
        t = self._tape
        out = []
        for op, a, b in zip(t.ops[:-1], t.ia[:-1], t.ib[:-1]):
            if op == OP_CONST:
                out.append(("const", complex(t.consts[a])))
            elif op == OP_MULPOW:
                out.append(("mulpow", int(a), int(b)))
            else:
                out.append(("add",))
        return out

    def __len__(self):
        return len(self._tape) - 1

    def __call__(self, x):
        vals, _ = self._tape.run(x, False)
        vals = vals[..., 0]
        return vals[()] if vals.ndim == 0 else vals

    def value_and_gradient(self, x):
        vals, jac = self._tape.run(x, True)
        return vals[..., 0], jac[..., 0, :]


# ---------------------------------------------------------------------------
# Systems
# ---------------------------------------------------------------------------

class PolySystem:
    """An ordered list of polynomials sharing the same variables.

    ``names`` optionally records variable names (used for printing and by the
    file parser).
    """

    def __init__(self, polys: Sequence[Polynomial], names: Sequence[str] | None = None):
        polys = list(polys)
        if not polys:
            raise ValueError("a polynomial system needs at least one polynomial")
        nvars = polys[0].nvars
        if any(p.nvars != nvars for p in polys):
            raise ValueError("all polynomials must share the same number of variables")
        if names is not None and len(names) != nvars:
            raise ValueError("variable names do not match the number of variables")
        self.polys = tuple(polys)
        self.nvars = nvars
        self.names = tuple(names) if names is not None else tuple(f"x{i + 1}" for i in range(nvars))

    def __len__(self):
        return len(self.polys)

    def __iter__(self):
        return iter(self.polys)

    def __getitem__(self, i):
        return self.polys[i]

    def __eq__(self, other):
        return isinstance(other, PolySystem) and self.polys == other.polys

    def __repr__(self):
        body = ", ".join(to_string(p, self.names) for p in self.polys)
        return f"PolySystem([{body}])"

    @property
    def degrees(self) -> list[int]:
        return [degree(p) for p in self.polys]

    @property
    def is_square(self) -> bool:
        return len(self.polys) == self.nvars

    @cached_property
    def _tape(self) -> _Tape:
        code = []
        for i, p in enumerate(self.polys):
            code += _horner_code([(e, c) for c, e in p._terms], self.nvars)
            code.append((OP_STORE, i))
        return _Tape(code, self.nvars, len(self.polys))

    def evaluate(self, x) -> np.ndarray:
        return self._tape.run(x, False)[0]

    __call__ = evaluate

    def jacobian(self, x) -> np.ndarray:
        return self._tape.run(x, True)[1]

    def evaluate_and_jacobian(self, x) -> tuple[np.ndarray, np.ndarray]:
        return self._tape.run(x, True)

    def jacobian_polys(self) -> list[list[Polynomial]]:
        return [[differentiate(p, j) for j in range(self.nvars)] for p in self.polys]

    def coefficient_scale(self) -> float:
        return max((abs(c) for p in self.polys for c, _ in p._terms), default=0.0)


def jacobian(F: PolySystem, x) -> np.ndarray:
    return F.jacobian(x)


def homogenize(F: PolySystem) -> PolySystem:
    """Insert a homogenizing variable at index 0.

    Each term of ``F_i`` is multiplied by ``x0^(deg F_i - deg term)``.
    """
    out = []
    for p in F.polys:
        d = degree(p)
        out.append(Polynomial({(d - sum(e),) + e: c for c, e in p._terms}, F.nvars + 1))
    return PolySystem(out, ("x0",) + F.names)


def dehomogenize(F: PolySystem) -> PolySystem:
    """Set the variable at index 0 to one and drop it."""
    out = []
    for p in F.polys:
        d: dict[Monomial, complex] = {}
        for c, e in p._terms:
            d[e[1:]] = d.get(e[1:], 0j) + c
        out.append(Polynomial(d, F.nvars - 1))
    return PolySystem(out, F.names[1:])


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<complex>\([^()]*\))
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<pow>\^|\*\*)
  | (?P<op>[*+\-])
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    pos = 0
    toks = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise PolynomialSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            toks.append((kind, m.group(), pos))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


def _parse_complex(tok: str, pos: int) -> complex:
    body = tok[1:-1].replace(" ", "")
    if not body:
        raise PolynomialSyntaxError("empty parenthesised coefficient", pos)
    if body[-1] in "iI":
        body = body[:-1] + "j"
        if body in ("j", "+j", "-j"):
            body = body.replace("j", "1j")
        elif body[-2:-1] in ("+", "-"):
            body = body[:-1] + "1j"
    try:
        return complex(body)
    except ValueError:
        raise PolynomialSyntaxError(f"bad complex coefficient {tok!r}", pos) from None


def parse_polynomial(text: str, variables: Sequence[str]) -> Polynomial:
    """Parse one polynomial, e.g. ``"x^2 + (1-2i)*x*y - 3"``.

    Terms are joined by ``+``/``-``; a term is a product of factors, each a
    real number, a parenthesised complex number ``(a+bi)``, or a variable with
    an optional ``^k`` (``**k`` is accepted too).
    """
    names = list(variables)
    index = {name: i for i, name in enumerate(names)}
    nvars = max(len(names), 1)
    toks = _tokenize(text)
    k = 0
    acc: dict[Monomial, complex] = {}

    def peek():
        return toks[k]

    expect_term = True
    sign = 1.0
    if peek()[0] == "end":
        raise PolynomialSyntaxError("empty polynomial", 0)
    while True:
        kind, val, pos = peek()
        if expect_term:
            if kind == "op" and val in "+-":
                sign = sign * (-1.0 if val == "-" else 1.0)
                k += 1
                continue
            coeff = complex(sign)
            exps = [0] * nvars
            first = True
            while True:
                kind, val, pos = peek()
                if not first:
                    if kind == "op" and val == "*":
                        k += 1
                        kind, val, pos = peek()
                    else:
                        break
                if kind == "number":
                    coeff *= float(val)
                    k += 1
                elif kind == "complex":
                    coeff *= _parse_complex(val, pos)
                    k += 1
                elif kind == "name":
                    if val not in index:
                        raise PolynomialSyntaxError(f"unknown variable {val!r}", pos)
                    k += 1
                    power = 1
                    if peek()[0] == "pow":
                        k += 1
                        kind2, val2, pos2 = peek()
                        if kind2 != "number" or not val2.isdigit():
                            raise PolynomialSyntaxError("exponent must be a non-negative integer", pos2)
                        power = int(val2)
                        k += 1
                    exps[index[val]] += power
                else:
                    what = "end of input" if kind == "end" else repr(val)
                    raise PolynomialSyntaxError(f"expected a coefficient or variable, found {what}", pos)
                first = False
            e = tuple(exps)
            acc[e] = acc.get(e, 0j) + coeff
            expect_term = False
            sign = 1.0
        else:
            if kind == "end":
                break
            if kind == "op" and val in "+-":
                expect_term = True
                continue
            raise PolynomialSyntaxError(f"unexpected {val!r}", pos)
    return Polynomial(acc, nvars)


def parse_system(text: str) -> PolySystem:
    """Parse a system file: a ``variables: x y z`` header, then one
    polynomial per line. Lines starting with ``#`` and blank lines are skipped.
    """
    names = None
    polys = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if names is None:
            if not line.lower().startswith("variables:"):
                raise PolynomialSyntaxError("missing 'variables:' header", 0, lineno)
            names = line.split(":", 1)[1].split()
            if not names:
                raise PolynomialSyntaxError("no variables declared", 0, lineno)
            if len(set(names)) != len(names):
                raise PolynomialSyntaxError("duplicate variable name", 0, lineno)
            continue
        try:
            polys.append(parse_polynomial(line, names))
        except PolynomialSyntaxError as err:
            raise PolynomialSyntaxError(err.msg, err.pos, lineno) from None
    if names is None:
        raise PolynomialSyntaxError("missing 'variables:' header", 0, 1)
    if not polys:
        raise PolynomialSyntaxError("no polynomials given", 0, None)
    return PolySystem(polys, names)


def _fmt_coeff(c: complex) -> str:
    if c.imag == 0:
        return repr(c.real)
    return f"({c.real!r}{c.imag:+}i)"


def to_string(f: Polynomial, names: Sequence[str] | None = None) -> str:
    """Render ``f`` in the text format accepted by :func:`parse_polynomial`.

    Coefficients are printed with ``repr`` so parsing the text gives back the
    same polynomial exactly.
    """
    if names is None:
        names = [f"x{i + 1}" for i in range(f.nvars)]
    if f.is_zero:
        return "0"
    out = ""
    for c, e in f._terms:
        mono = [name if k == 1 else f"{name}^{k}" for name, k in zip(names, e) if k]
        neg = c.imag == 0 and c.real < 0
        a = complex(-c.real, 0) if neg else c
        if mono and a == 1:
            body = "*".join(mono)
        else:
            body = "*".join([_fmt_coeff(a)] + mono)
        if not out:
            out = "-" + body if neg else body
        else:
            out += (" - " if neg else " + ") + body
    return out


def format_system(F: PolySystem) -> str:
    lines = ["variables: " + " ".join(F.names)]
    lines += [to_string(p, F.names) for p in F.polys]
    return "\n".join(lines) + "\n"
