"""Total-degree start systems ``x_i^{d_i} - 1`` and their roots of unity."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from hcpy.poly import Polynomial, PolySystem, degree

MAX_START_SOLUTIONS = 10**7


@dataclass(frozen=True)
class TotalDegreeStart:
    degrees: tuple[int, ...]
    system: PolySystem

    @property
    def count(self) -> int:
        return math.prod(self.degrees)


def _check_square(F: PolySystem):
    if not F.is_square:
        raise ValueError(
            f"system has {len(F)} equations in {F.nvars} unknowns; total-degree "
            "start systems need a square system (use solve_with_start otherwise)"
        )


def build_start_system(F: PolySystem) -> TotalDegreeStart:
    _check_square(F)
    degs = []
    for i, p in enumerate(F.polys):
        if p.is_zero:
            raise ValueError(f"equation {i} is the zero polynomial")
        if degree(p) == 0:
            raise ValueError(f"equation {i} is a nonzero constant; the system has no solutions")
        degs.append(degree(p))
    n = F.nvars
    polys = []
    for i, d in enumerate(degs):
        e = [0] * n
        e[i] = d
        polys.append(Polynomial({tuple(e): 1.0, (0,) * n: -1.0}, n))
    return TotalDegreeStart(tuple(degs), PolySystem(polys, F.names))


def bezout_number(F: PolySystem) -> int:
    _check_square(F)
    return math.prod(F.degrees)


def _roots_of_unity(d: int) -> np.ndarray:
    k = np.arange(d)
    return np.exp(2j * np.pi * k / d)


def start_solution_array(s: TotalDegreeStart, indices) -> np.ndarray:
    """Start solutions for the given flat indices, as an array ``(len, n)``.

    Flat index ``i`` decodes to ``(k_1, ..., k_n)`` with ``k_1`` varying
    fastest; the point is ``(exp(2 pi i k_1/d_1), ..., exp(2 pi i k_n/d_n))``.
    """
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= s.count):
        raise IndexError("start solution index out of range")
    out = np.empty(idx.shape + (len(s.degrees),), dtype=complex)
    rem = idx.copy()
    for j, d in enumerate(s.degrees):
        out[..., j] = _roots_of_unity(d)[rem % d]
        rem //= d
    return out


def start_solutions(s: TotalDegreeStart, start: int = 0, stop: int | None = None,
                    cap: int = MAX_START_SOLUTIONS) -> Iterator[np.ndarray]:
    """Lazily yield start solutions ``start <= i < stop`` (default: all).

    Disjoint ``[start, stop)`` ranges can be handed to different workers.
    """
    if s.count > cap:
        raise OverflowError(f"{s.count} start solutions exceed the cap of {cap}")
    stop = s.count if stop is None else min(stop, s.count)
    chunk = 4096
    for lo in range(start, stop, chunk):
        yield from start_solution_array(s, np.arange(lo, min(lo + chunk, stop)))
