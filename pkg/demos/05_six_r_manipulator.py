"""Inverse position problem of a general six-revolute robot arm.

Each joint axis is a unit vector z_i. Consecutive axes meet at fixed twist
angles, and the hand position is a fixed combination of the axes and their
cross products. With z1 = e3 and the last axis given, the unknowns are
z2 = (x21, x22, cos a1) and z3, z4, z5: 11 quadratic equations, Bezout
number 1024, but only 16 solutions. With random complex link data none of
them is real.

The ``ipp2`` benchmark is this system with one fixed draw of data; here we
rebuild it from the geometry.
"""
import numpy as np

from hcpy import PolySystem, SolveOptions, get_system, solve
from hcpy.poly import Polynomial, variables
from hcpy.totaldegree import bezout_number


def six_r_system(seed):
    rng = np.random.default_rng(seed)

    def rc():
        return complex(np.round(rng.normal(), 4), np.round(rng.normal(), 4))

    alpha = [rc() for _ in range(5)]
    c, s = np.cos(alpha), np.sin(alpha)
    a_len = [rc() for _ in range(5)]
    d_len = [rc() for _ in range(6)]
    w = np.array([rc(), rc(), rc()])
    z6 = w / np.sqrt(np.sum(w * w))
    p = np.array([rc(), rc(), rc()])

    V = variables(11)
    one = Polynomial.constant(1.0, 11)
    zero = 0 * one
    Z = [[zero, zero, one], [V[0], V[1], c[0] * one], V[2:5], V[5:8], V[8:11],
         [complex(q) * one for q in z6]]

    def dot(u, v):
        return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]

    def cross(u, v):
        return [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]

    eqs = [dot(z, z) - one for z in Z[1:5]]
    eqs += [dot(Z[i], Z[i + 1]) - c[i] * one for i in range(1, 5)]
    pos = [zero] * 3
    for i in range(6):
        pos = [pos[j] + d_len[i] * Z[i][j] for j in range(3)]
    for i in range(5):
        cr = cross(Z[i], Z[i + 1])
        pos = [pos[j] + (a_len[i] / s[i]) * cr[j] for j in range(3)]
    eqs += [pos[j] - complex(p[j]) * one for j in range(3)]
    names = ["x21", "x22", "x31", "x32", "x33", "x41", "x42", "x43", "x51", "x52", "x53"]
    return PolySystem(eqs, names)


F = six_r_system(20240611)
print(f"{len(F)} equations, Bezout number {bezout_number(F)}")

# the bundled benchmark was built from this seed
ipp2 = get_system("ipp2")
x = np.random.default_rng(0).normal(size=11) + 1j * np.random.default_rng(1).normal(size=11)
print("matches bundled ipp2:", np.allclose(F.evaluate(x), ipp2.evaluate(x)))

res = solve(F, SolveOptions(seed=0))
print(f"{len(res.solutions)} finite solutions, {len(res.real_solutions)} real, "
      f"{res.n_at_infinity} paths at infinity, {res.n_failed} failed, {res.runtime_seconds:.1f} s")

# every solution is a set of unit axes with the prescribed twists
x = res.solutions[0].x
z3 = x[2:5]
print("check |z3|^2 =", np.round(np.sum(z3 * z3), 10))
