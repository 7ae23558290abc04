"""Singular endpoints and the Cauchy endgame.

Along ``x^k - t = 0`` the path ``x(t) = t^(1/k)`` is not analytic at t = 0;
going once around a small circle in t moves to the next branch, and only
after k circuits does the path close. The mean of the loop samples is a
trapezoidal rule for the Cauchy integral and recovers x(0) even though the
Jacobian is singular there.
"""
import numpy as np

from hcpy import SolveOptions, parse_system, solve
from hcpy.endgame import EndgameOptions, cauchy_endpoint, cauchy_loop, run_endgame
from hcpy.homotopies import StraightLineHomotopy


def power(k):
    F = parse_system(f"variables: x\nx^{k}\n")
    G = parse_system(f"variables: x\nx^{k} - 1\n")
    return StraightLineHomotopy(F, G, 1.0)


r = 1e-3
print("one loop family per k at radius", r)
for k in range(1, 7):
    x_r = np.array([r ** (1 / k)])
    c, samples = cauchy_loop(power(k), x_r, r)
    print(f"  k = {k}: closes after {c} circuits, {len(samples)} samples, "
          f"mean {abs(cauchy_endpoint(samples)[0]):.1e}  (|x(r)| = {abs(x_r[0]):.1e})")

# %% the full endgame shrinks the radius until two loop means agree
res = run_endgame(power(3), np.array([0.1 ** (1 / 3)]), 0.1, EndgameOptions())
print(f"\nendgame on x^3 - t: winding {res.winding_number}, x(0) ~ {abs(res.x0[0]):.1e}, "
      f"stopped at radius {res.radius:.3g} after {res.samples_used} samples")

# %% in a solve, singular roots come back flagged
F = parse_system("variables: x y\nx^2\ny - 1\n")
out = solve(F, SolveOptions(seed=0))
for s in out.solutions:
    print(f"\nx^2 = 0, y = 1: x = {np.round(s.x, 6)}, winding {s.winding_number}, "
          f"singular {s.is_singular}, paths merged {s.multiplicity}")
