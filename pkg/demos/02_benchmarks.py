"""Root counts for the benchmark systems.

Runs the total-degree solver on cyclic7, ipp2, heart and katsura11 and
compares the number of finite and real solutions with the known counts.
Pass system names on the command line to run a subset:

    python demos/02_benchmarks.py heart ipp2
"""
import sys
import time

from hcpy import BENCHMARKS, SolveOptions, get_system, solve
from hcpy.totaldegree import bezout_number

names = sys.argv[1:] or list(BENCHMARKS)

print(f"{'system':<10} {'vars':>4} {'D':>6} {'finite':>7} {'real':>5} "
      f"{'failed':>6} {'at inf':>6} {'time/s':>7}  expected")
for name in names:
    F = get_system(name)
    entry = BENCHMARKS[name]
    t0 = time.perf_counter()
    res = solve(F, SolveOptions(seed=0))
    dt = time.perf_counter() - t0
    ok = (len(res.solutions), len(res.real_solutions)) == (entry.expected_complex_roots,
                                                           entry.expected_real_roots)
    print(f"{name:<10} {F.nvars:>4} {bezout_number(F):>6} {len(res.solutions):>7} "
          f"{len(res.real_solutions):>5} {res.n_failed:>6} {res.n_at_infinity:>6} {dt:>7.1f}  "
          f"{entry.expected_complex_roots}/{entry.expected_real_roots} {'ok' if ok else 'MISMATCH'}")

# Most of the 5040 cyclic7 paths and 1008 of the 1024 ipp2 paths end at
# infinity: the total-degree start system overcounts the roots. The endgame
# decides those paths from the growth rate of the homogenizing coordinate.
