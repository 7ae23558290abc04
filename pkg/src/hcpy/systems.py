"""Benchmark systems: cyclic-n, katsura-n and the shipped heart / ipp2 files."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from hcpy.poly import PolySystem, parse_system, variables


def cyclic(n: int) -> PolySystem:
    """The cyclic n-roots system.

    For k = 1..n-1: sum_i prod_{j=i}^{i+k-1} x_{j mod n} = 0, and
    x_1 x_2 ... x_n - 1 = 0.
    """
    xs = variables(n)
    polys = []
    for k in range(1, n):
        f = 0
        for i in range(n):
            term = 1
            for j in range(i, i + k):
                term = term * xs[j % n]
            f = f + term
        polys.append(f)
    prod = 1
    for x in xs:
        prod = prod * x
    polys.append(prod - 1)
    return PolySystem(polys, [f"z{i}" for i in range(n)])


def katsura(n: int) -> PolySystem:
    """The katsura-n system in the n+1 unknowns x_0..x_n.

    sum_{l=-n}^{n} x_l = 1 and, for m = 0..n-1,
    sum_{l=-n}^{n} x_l x_{m-l} = x_m, with x_{-l} = x_l and x_l = 0 for |l| > n.
    """
    xs = variables(n + 1)

    def u(l):
        l = abs(l)
        return xs[l] if l <= n else 0

    polys = [sum((u(l) for l in range(-n, n + 1)), 0) - 1]
    for m in range(n):
        f = 0
        for l in range(-n, n + 1):
            a, b = u(l), u(m - l)
            if isinstance(a, int) or isinstance(b, int):
                continue
            f = f + a * b
        polys.append(f - xs[m])
    return PolySystem(polys, [f"x{i}" for i in range(n + 1)])


def load_data_system(name: str) -> PolySystem:
    text = resources.files("hcpy").joinpath("data", f"{name}.txt").read_text()
    return parse_system(text)


@dataclass(frozen=True)
class BenchmarkEntry:
    name: str
    expected_complex_roots: int
    expected_real_roots: int
    bezout: int

    def system(self) -> PolySystem:
        return get_system(self.name)


BENCHMARKS = {
    "cyclic7": BenchmarkEntry("cyclic7", 924, 56, 5040),
    "ipp2": BenchmarkEntry("ipp2", 16, 0, 1024),
    "heart": BenchmarkEntry("heart", 4, 2, 576),
    "katsura11": BenchmarkEntry("katsura11", 2048, 326, 2048),
}


def get_system(name: str) -> PolySystem:
    if name.startswith("cyclic"):
        return cyclic(int(name[len("cyclic"):]))
    if name.startswith("katsura"):
        return katsura(int(name[len("katsura"):]))
    return load_data_system(name)
