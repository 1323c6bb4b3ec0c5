"""Exact two-phase primal simplex over the rationals.

Solves  min/max c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq  with free
variables, entirely in Fraction arithmetic.  Bland's rule guarantees
termination.  Infeasible systems come with a Farkas certificate that is
re-derivable and checkable by exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .rational import ZERO, ONE, dot

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LPResult:
    status: str
    x: tuple[Fraction, ...] | None = None
    value: Fraction | None = None


@dataclass
class FeasibilityResult:
    """Outcome of an exact feasibility check.

    For infeasible systems, `farkas_ineq` (>= 0 entrywise) and `farkas_eq`
    (signed) certify emptiness:  farkas_ineq . A_ub + farkas_eq . A_eq = 0
    while  farkas_ineq . b_ub + farkas_eq . b_eq < 0.
    """

    feasible: bool
    witness: tuple[Fraction, ...] | None = None
    farkas_ineq: tuple[Fraction, ...] | None = None
    farkas_eq: tuple[Fraction, ...] | None = None


def _pivot(T, basis, r, c):
    inv = ONE / T[r][c]
    T[r] = [e * inv for e in T[r]]
    row = T[r]
    for i in range(len(T)):
        if i != r:
            f = T[i][c]
            if f != 0:
                T[i] = [a - f * b for a, b in zip(T[i], row)]
    if r < len(basis):
        basis[r] = c


def _run_simplex(T, basis, ncols):
    """Minimize the last row of T in place (Bland's rule). Returns status."""
    m = len(basis)
    obj_i = len(T) - 1
    while True:
        obj = T[obj_i]
        enter = -1
        for j in range(ncols):
            if obj[j] < 0:
                enter = j
                break
        if enter < 0:
            return OPTIMAL
        leave = -1
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[leave]
                ):
                    best = ratio
                    leave = i
        if leave < 0:
            return UNBOUNDED
        _pivot(T, basis, leave, enter)


def solve_standard(M, q, c):
    """min c.y  s.t.  M y = q, y >= 0.  Returns LPResult in y-space."""
    m = len(M)
    n = len(c)
    M = [list(row) for row in M]
    q = list(q)
    for i in range(m):
        if q[i] < 0:
            M[i] = [-a for a in M[i]]
            q[i] = -q[i]

    # phase 1: artificial variables n..n+m-1, minimize their sum
    T = [M[i] + [ONE if j == i else ZERO for j in range(m)] + [q[i]] for i in range(m)]
    basis = [n + i for i in range(m)]
    obj = [ZERO] * (n + m + 1)
    for j in range(n):
        obj[j] = -sum((T[i][j] for i in range(m)), ZERO)
    obj[-1] = -sum(q, ZERO)
    T.append(obj)
    status = _run_simplex(T, basis, n + m)
    assert status == OPTIMAL  # phase 1 is always bounded below by 0
    if T[-1][-1] != 0:  # optimum of sum of artificials is -T[-1][-1]
        return LPResult(INFEASIBLE)

    # drive remaining artificials out of the basis; drop redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= n:
            piv = next((j for j in range(n) if T[i][j] != 0), None)
            if piv is None:
                continue  # redundant constraint row
            _pivot(T, basis, i, piv)
        keep.append(i)
    rows = [[T[i][j] for j in range(n)] + [T[i][-1]] for i in keep]
    basis = [basis[i] for i in keep]

    # phase 2 objective: reduced costs of c w.r.t. the current basis
    obj = list(c) + [ZERO]
    for i, bi in enumerate(basis):
        f = obj[bi]
        if f != 0:
            obj = [a - f * b for a, b in zip(obj, rows[i])]
    T = rows + [obj]
    status = _run_simplex(T, basis, n)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    y = [ZERO] * n
    for i, bi in enumerate(basis):
        y[bi] = T[i][-1]
    return LPResult(OPTIMAL, tuple(y), dot(c, y))


def solve_lp(c, A_ub=(), b_ub=(), A_eq=(), b_eq=(), maximize=False):
    """LP with free variables and <=/= constraints.  Returns LPResult."""
    n = len(c)
    cc = [-v if maximize else v for v in c]
    nun = len(A_ub)
    # y = (x+, x-, slacks)
    M = []
    q = []
    for i, row in enumerate(A_ub):
        M.append(
            list(row)
            + [-a for a in row]
            + [ONE if j == i else ZERO for j in range(nun)]
        )
        q.append(b_ub[i])
    for row, rhs in zip(A_eq, b_eq):
        M.append(list(row) + [-a for a in row] + [ZERO] * nun)
        q.append(rhs)
    cost = list(cc) + [-v for v in cc] + [ZERO] * nun
    res = solve_standard(M, q, cost)
    if res.status != OPTIMAL:
        return res
    x = tuple(res.x[j] - res.x[n + j] for j in range(n))
    val = dot(c, x)
    return LPResult(OPTIMAL, x, val)


def feasibility(A_ub=(), b_ub=(), A_eq=(), b_eq=(), nvars=None):
    """Exact feasibility of {A_ub x <= b_ub, A_eq x = b_eq}; Farkas on failure."""
    if nvars is None:
        if len(A_ub):
            nvars = len(A_ub[0])
        elif len(A_eq):
            nvars = len(A_eq[0])
        else:
            nvars = 0
    res = solve_lp([ZERO] * nvars, A_ub, b_ub, A_eq, b_eq)
    if res.status == OPTIMAL:
        return FeasibilityResult(True, witness=res.x)

    # Farkas alternative: u >= 0, w free with u.A_ub + w.A_eq = 0 and
    # u.b_ub + w.b_eq = -1.  By LP duality exactly one system is feasible.
    nu, nw = len(A_ub), len(A_eq)
    Aeq2 = []
    beq2 = []
    for j in range(nvars):
        Aeq2.append([A_ub[i][j] for i in range(nu)] + [A_eq[k][j] for k in range(nw)])
        beq2.append(ZERO)
    Aeq2.append([b_ub[i] for i in range(nu)] + [b_eq[k] for k in range(nw)])
    beq2.append(-ONE)
    Aub2 = []
    bub2 = []
    for i in range(nu):
        Aub2.append([-ONE if t == i else ZERO for t in range(nu + nw)])
        bub2.append(ZERO)
    alt = solve_lp([ZERO] * (nu + nw), Aub2, bub2, Aeq2, beq2)
    assert alt.status == OPTIMAL, "Farkas alternative must be feasible"
    from .rational import primitive_signed

    uw = primitive_signed(alt.x)  # positive rescale to primitive integers
    u = tuple(uw[:nu])
    w = tuple(uw[nu:])
    return FeasibilityResult(False, farkas_ineq=u, farkas_eq=w)


def lex_min(A_ub, b_ub, A_eq, b_eq, nvars, order=None):
    """Lexicographic minimizer over the polyhedron in the given coordinate
    order (default 0..nvars-1).  Requires each stage to be bounded below."""
    if order is None:
        order = range(nvars)
    A_eq = [list(r) for r in A_eq]
    b_eq = list(b_eq)
    x = None
    for j in order:
        c = [ZERO] * nvars
        c[j] = ONE
        res = solve_lp(c, A_ub, b_ub, A_eq, b_eq)
        if res.status != OPTIMAL:
            raise ValueError(f"lex_min stage {j}: {res.status}")
        row = [ZERO] * nvars
        row[j] = ONE
        A_eq.append(row)
        b_eq.append(res.value)
        x = res.x
    return x
