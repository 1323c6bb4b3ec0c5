"""Exact rational linear algebra: elimination, kernels, span arithmetic.

Matrices are sequences of row vectors of Fractions.  Everything here is
dense Gaussian elimination; problem sizes are small by design.
"""

from __future__ import annotations

from fractions import Fraction

from .rational import ZERO, ONE, is_zero_vec, primitive_signed


def rref(rows, ncols=None):
    """Reduced row echelon form.  Returns (reduced nonzero rows, pivot columns)."""
    R = [list(r) for r in rows]
    if ncols is None:
        ncols = len(R[0]) if R else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(R)):
            if R[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        inv = ONE / R[r][c]
        R[r] = [x * inv for x in R[r]]
        for i in range(len(R)):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == len(R):
            break
    return [tuple(row) for row in R[:r]], pivots


def rank(rows) -> int:
    return len(rref(rows)[0])


def kernel_basis(rows, ncols):
    """Basis of the null space {x : A x = 0} for A given by `rows`."""
    red, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [ZERO] * ncols
        v[fc] = ONE
        for i, pc in enumerate(pivots):
            v[pc] = -red[i][fc]
        basis.append(tuple(v))
    return basis


def solve_linear(A, b):
    """One particular solution of A x = b, or None if inconsistent."""
    n = len(A[0]) if A else 0
    aug = [list(row) + [bv] for row, bv in zip(A, b)]
    red, pivots = rref(aug, n + 1)
    for row in red:
        if is_zero_vec(row[:n]) and row[n] != 0:
            return None
    x = [ZERO] * n
    for i, pc in enumerate(pivots):
        x[pc] = red[i][n]
    return tuple(x)


def span_basis(vectors):
    """Reduced basis (rref rows) of the span of the given vectors."""
    vs = [v for v in vectors if not is_zero_vec(v)]
    if not vs:
        return []
    red, _ = rref(vs, len(vs[0]))
    return [tuple(r) for r in red if not is_zero_vec(r)]


def intersect_spans(U, W, dim):
    """Basis of span(U) ∩ span(W); U, W are lists of vectors in R^dim."""
    if not U or not W:
        return []
    rows = []
    for k in range(dim):
        rows.append(tuple(u[k] for u in U) + tuple(-w[k] for w in W))
    combos = kernel_basis(rows, len(U) + len(W))
    out = []
    for c in combos:
        v = [ZERO] * dim
        for j, u in enumerate(U):
            for k in range(dim):
                v[k] += c[j] * u[k]
        if not is_zero_vec(v):
            out.append(primitive_signed(v))
    return span_basis(out)


def symmetric_diagonalize(Q):
    """Congruence diagonalization of a symmetric rational matrix.

    Returns (S, d) with S a list of column vectors and d the diagonal values
    such that S^T Q S = diag(d); the quadratic form at S[:,k] equals d[k].
    """
    n = len(Q)
    A = [list(row) for row in Q]
    S = [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]  # columns S[j]
    S = [list(col) for col in zip(*S)]

    def col_op(dst, src, f):
        # e_dst <- e_dst + f * e_src, applied to A (rows+cols) and S
        for k in range(n):
            A[dst][k] += f * A[src][k]
        for k in range(n):
            A[k][dst] += f * A[k][src]
        for k in range(n):
            S[dst][k] += f * S[src][k]

    def swap(i, j):
        A[i], A[j] = A[j], A[i]
        for row in A:
            row[i], row[j] = row[j], row[i]
        S[i], S[j] = S[j], S[i]

    for k in range(n):
        if A[k][k] == 0:
            pivot = next((j for j in range(k + 1, n) if A[j][j] != 0), None)
            if pivot is not None:
                swap(k, pivot)
            else:
                off = next((j for j in range(k + 1, n) if A[k][j] != 0), None)
                if off is not None:
                    col_op(k, off, ONE)  # q(e_k + e_off) = 2 A[k][off] != 0
        if A[k][k] == 0:
            continue
        for j in range(k + 1, n):
            if A[k][j] != 0:
                col_op(j, k, -A[k][j] / A[k][k])
    d = [A[k][k] for k in range(n)]
    return [tuple(col) for col in S], d
