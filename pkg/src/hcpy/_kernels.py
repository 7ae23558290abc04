"""Compiled inner loops: polynomial tape evaluation and small batched solves.

All kernels loop over a leading batch axis and treat every batch member
independently, so a result never depends on what else is in the batch.
"""
import numpy as np
from numba import njit

OP_CONST = 0
OP_MULPOW = 1
OP_ADD = 2
OP_STORE = 3


@njit(cache=True, nogil=True)
def run_tape(ops, ia, ib, consts, nout, maxdeg, depth, X, want_jac):
    B, k = X.shape
    n = ops.shape[0]
    vals = np.zeros((B, nout), dtype=np.complex128)
    if want_jac:
        jac = np.zeros((B, nout, k), dtype=np.complex128)
    else:
        jac = np.zeros((1, 1, 1), dtype=np.complex128)
    pw = np.empty((k, maxdeg + 1), dtype=np.complex128)
    sv = np.empty(depth, dtype=np.complex128)
    sg = np.empty((depth, k), dtype=np.complex128)
    for b in range(B):
        for v in range(k):
            pw[v, 0] = 1.0
            for e in range(1, maxdeg + 1):
                pw[v, e] = pw[v, e - 1] * X[b, v]
        sp = 0
        for j in range(n):
            op = ops[j]
            if op == OP_CONST:
                sv[sp] = consts[ia[j]]
                if want_jac:
                    for q in range(k):
                        sg[sp, q] = 0.0
                sp += 1
            elif op == OP_MULPOW:
                v = ia[j]
                e = ib[j]
                top = sp - 1
                val = sv[top]
                p = pw[v, e]
                if want_jac:
                    for q in range(k):
                        sg[top, q] *= p
                    sg[top, v] += val * e * pw[v, e - 1]
                sv[top] = val * p
            elif op == OP_ADD:
                sp -= 1
                sv[sp - 1] += sv[sp]
                if want_jac:
                    for q in range(k):
                        sg[sp - 1, q] += sg[sp, q]
            else:
                sp -= 1
                vals[b, ia[j]] = sv[sp]
                if want_jac:
                    for q in range(k):
                        jac[b, ia[j], q] = sg[sp, q]
    return vals, jac


@njit(cache=True, nogil=True)
def lu_solve(A, rhs):
    """Partial-pivot LU solve for a batch of square systems.

    Returns the solutions and the ratio max|u_ii| / min|u_ii| of the
    pivots (``inf`` and a NaN solution for an exactly singular matrix).
    """
    B, n, _ = A.shape
    x = np.empty((B, n), dtype=np.complex128)
    cond = np.empty(B)
    M = np.empty((n, n), dtype=np.complex128)
    r = np.empty(n, dtype=np.complex128)
    for b in range(B):
        for i in range(n):
            r[i] = rhs[b, i]
            for j in range(n):
                M[i, j] = A[b, i, j]
        singular = False
        for c in range(n):
            p = c
            best = abs(M[c, c])
            for i in range(c + 1, n):
                a = abs(M[i, c])
                if a > best:
                    best = a
                    p = i
            if best == 0.0 or not np.isfinite(best):
                singular = True
                break
            if p != c:
                for j in range(n):
                    tmp = M[c, j]
                    M[c, j] = M[p, j]
                    M[p, j] = tmp
                tmp = r[c]
                r[c] = r[p]
                r[p] = tmp
            piv = M[c, c]
            for i in range(c + 1, n):
                f = M[i, c] / piv
                if f != 0:
                    for j in range(c + 1, n):
                        M[i, j] -= f * M[c, j]
                    r[i] -= f * r[c]
        if singular:
            for i in range(n):
                x[b, i] = np.nan
            cond[b] = np.inf
            continue
        dmax = 0.0
        dmin = np.inf
        for i in range(n - 1, -1, -1):
            s = r[i]
            for j in range(i + 1, n):
                s -= M[i, j] * x[b, j]
            x[b, i] = s / M[i, i]
            a = abs(M[i, i])
            dmax = max(dmax, a)
            dmin = min(dmin, a)
        cond[b] = dmax / dmin
    return x, cond


@njit(cache=True, nogil=True)
def qr_solve(A, rhs):
    """Least-squares solve of tall systems by column-pivoted Householder QR.

    Returns the solutions and |r_00| / |r_kk| as a condition estimate.
    """
    B, m, n = A.shape
    x = np.empty((B, n), dtype=np.complex128)
    cond = np.empty(B)
    R = np.empty((m, n), dtype=np.complex128)
    y = np.empty(m, dtype=np.complex128)
    v = np.empty(m, dtype=np.complex128)
    z = np.empty(n, dtype=np.complex128)
    perm = np.empty(n, dtype=np.int64)
    for b in range(B):
        for i in range(m):
            y[i] = rhs[b, i]
            for j in range(n):
                R[i, j] = A[b, i, j]
        for j in range(n):
            perm[j] = j
        singular = False
        for c in range(n):
            # pivot on the largest remaining column
            best = -1.0
            p = c
            for j in range(c, n):
                s = 0.0
                for i in range(c, m):
                    s += R[i, j].real ** 2 + R[i, j].imag ** 2
                if s > best:
                    best = s
                    p = j
            if p != c:
                for i in range(m):
                    tmp = R[i, c]
                    R[i, c] = R[i, p]
                    R[i, p] = tmp
                t = perm[c]
                perm[c] = perm[p]
                perm[p] = t
            norm = np.sqrt(best)
            if norm == 0.0 or not np.isfinite(norm):
                singular = True
                break
            x0 = R[c, c]
            phase = x0 / abs(x0) if abs(x0) > 0 else 1.0 + 0j
            alpha = -phase * norm
            vv = 0.0
            for i in range(c, m):
                v[i] = R[i, c]
            v[c] -= alpha
            for i in range(c, m):
                vv += v[i].real ** 2 + v[i].imag ** 2
            if vv > 0:
                for j in range(c + 1, n):
                    s = 0j
                    for i in range(c, m):
                        s += np.conj(v[i]) * R[i, j]
                    s = 2.0 * s / vv
                    for i in range(c, m):
                        R[i, j] -= s * v[i]
                s = 0j
                for i in range(c, m):
                    s += np.conj(v[i]) * y[i]
                s = 2.0 * s / vv
                for i in range(c, m):
                    y[i] -= s * v[i]
            R[c, c] = alpha
            for i in range(c + 1, m):
                R[i, c] = 0.0
        if singular:
            for j in range(n):
                x[b, j] = np.nan
            cond[b] = np.inf
            continue
        for i in range(n - 1, -1, -1):
            s = y[i]
            for j in range(i + 1, n):
                s -= R[i, j] * z[j]
            z[i] = s / R[i, i]
        for j in range(n):
            x[b, perm[j]] = z[j]
        cond[b] = abs(R[0, 0]) / abs(R[n - 1, n - 1])
    return x, cond
