"""Batched linear solves used by the corrector and the predictor."""
import numpy as np

from hcpy._kernels import lu_solve, qr_solve


def solve(A, b):
    """Solve ``A x = b`` for each matrix in a stack.

    Square systems use partial-pivot LU; tall systems get the least-squares
    solution from a column-pivoted QR. Returns ``(x, cond)`` where ``cond`` is
    the diagonal-ratio condition estimate of the factorization. Square
    systems are row-equilibrated first, which leaves ``x`` unchanged but
    keeps badly scaled equations from posing as near-singularity. Singular
    members yield NaN solutions and ``cond = inf`` instead of raising.
    """
    A = np.asarray(A, dtype=complex)
    b = np.asarray(b, dtype=complex)
    m, n = A.shape[-2:]
    if b.shape[-1] != m:
        raise ValueError(f"right-hand side has length {b.shape[-1]}, expected {m}")
    if m < n:
        raise ValueError("underdetermined systems are not supported")
    lead = A.shape[:-2]
    A2 = np.ascontiguousarray(A.reshape((-1, m, n)))
    b2 = np.ascontiguousarray(np.broadcast_to(b, lead + (m,)).reshape((-1, m)))
    if m == n:
        w = np.max(np.abs(A2), axis=2)
        w[~(w > 0) | ~np.isfinite(w)] = 1.0
        A2 = A2 / w[:, :, None]
        b2 = b2 / w
    x, cond = (lu_solve if m == n else qr_solve)(A2, b2)
    return x.reshape(lead + (n,)), cond.reshape(lead)
