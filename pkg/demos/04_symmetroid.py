"""Singular points of a symmetroid, tracked with the determinant homotopy.

Four real symmetric n x n matrices A0..A3 define the surface

    det(x0 A0 + x1 A1 + x2 A2 + x3 A3) = 0

in projective 3-space. For generic data its singular points are the
C(n+1, 3) points where the matrix drops rank by two. Writing f and its
gradient out as polynomials gets expensive fast (see the monomial counts
below), so the determinant homotopy evaluates them from the matrices.
"""
import numpy as np

from hcpy import SolveOptions
from hcpy.dethom import (
    F_eval,
    SymmetricPencil,
    expanded_singular_points,
    monomial_count,
    on_spectrahedron_boundary,
    pencil_value,
    singular_point_count,
    track_singular_points,
)

for n in (3, 5, 10, 20):
    print(f"n = {n:>2}: {singular_point_count(n):>5} singular points, "
          f"{monomial_count(n):>7} monomials in the expanded homotopy")

rng = np.random.default_rng(2024)
n = 3
A = SymmetricPencil.random(n, rng)
B = SymmetricPencil.random(n, rng)

# %% start points: the nodes of S_B, from the expanded system (fine at n = 3)
S = expanded_singular_points(B, seed=0)
print(f"\n{len(S)} singular points of S_B found from the expanded equations")

# %% track them to S_A with H(x, t) = F_{(1-t) A + gamma t B}(x)
res = track_singular_points(A, B, S, SolveOptions(seed=0))
print(f"tracked {res.n_paths} paths, {res.n_failed} failed, {res.runtime_seconds:.2f} s")
for s in res.solutions:
    x = s.x / s.x[0]
    resid = np.max(np.abs(F_eval(A, x / np.linalg.norm(x))))
    sv = np.linalg.svd(pencil_value(A, x), compute_uv=False)
    line = f"  z = {np.round(x[1:], 4)}  |F_A| = {resid:.1e}  singular values {np.round(sv, 4)}"
    if s.is_real:
        line += f"  on spectrahedron: {on_spectrahedron_boundary(A, x.real)}"
    print(line)

# %% a pencil whose spectrahedron is nonempty: A0 = I is an interior point
I = np.eye(n)
C = SymmetricPencil.from_matrices(I, A[1], A[2], A[3])
SC = expanded_singular_points(C, seed=1)
real = [x for x in SC if np.max(np.abs(x.imag)) < 1e-8]
flags = [on_spectrahedron_boundary(C, x.real) for x in real]
print(f"\nwith A0 = I: {len(real)} real nodes, {sum(flags)} of them on the spectrahedron")
