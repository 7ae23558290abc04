"""Walk through a solve by hand: a circle cut by a line.

    x^2 + y^2 - 1 = 0
    3x - 2y       = 0

The two intersection points are +-(2, 3) / sqrt(13). We build the start
system, the homotopy and the tracker ourselves, then let ``solve`` do the
same in one call.
"""
import numpy as np

from hcpy import SolveOptions, parse_system, solve
from hcpy.homotopies import StraightLineHomotopy, random_gamma
from hcpy.totaldegree import bezout_number, build_start_system, start_solutions
from hcpy.tracker import track

F = parse_system("""
variables: x y
x^2 + y^2 - 1
3*x - 2*y
""")
print("target system:", F)
print("Bezout number:", bezout_number(F))

# %% start system: x^2 - 1, y - 1, with solutions (1, 1) and (-1, 1)
start = build_start_system(F)
print("start system: ", start.system)
starts = list(start_solutions(start))
print("start points: ", [tuple(np.round(s.real, 3)) for s in starts])

# %% straight-line homotopy H = (1 - t) F + gamma t G, tracked from t = 1 to 0
gamma = random_gamma(np.random.default_rng(1))
H = StraightLineHomotopy(F, start.system, gamma)
print(f"gamma = {gamma:.4f}")
for s in starts:
    out = track(H, s)
    print(f"  {tuple(np.round(s.real, 3))} -> {np.round(out.x_end, 8)}  "
          f"({out.status.label}, {out.steps} steps, residual {out.residual:.1e})")

# %% the same through the solver (projective coordinates, endgame, classification)
res = solve(F, SolveOptions(seed=1))
print(f"\nsolve: {len(res.solutions)} solutions in {res.runtime_seconds:.3f} s")
for sol in res.solutions:
    print("  x =", np.round(sol.x.real, 8), "real" if sol.is_real else "complex")
print("expected: +-", np.round(np.array([2, 3]) / np.sqrt(13), 8))
