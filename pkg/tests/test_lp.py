"""Exact LP: feasibility witnesses, Farkas certificates, optimization."""

import random
from fractions import Fraction

from cpwlkkt import lp

F = Fraction


def check_farkas(A_ub, b_ub, A_eq, b_eq, res):
    u, w = res.farkas_ineq, res.farkas_eq
    assert all(ui >= 0 for ui in u)
    n = len(A_ub[0]) if A_ub else len(A_eq[0])
    for j in range(n):
        s = sum(u[i] * A_ub[i][j] for i in range(len(A_ub)))
        s += sum(w[k] * A_eq[k][j] for k in range(len(A_eq)))
        assert s == 0
    rhs = sum(u[i] * b_ub[i] for i in range(len(A_ub)))
    rhs += sum(w[k] * b_eq[k] for k in range(len(A_eq)))
    assert rhs < 0


def test_box_feasible():
    # x >= 0, x <= 1
    res = lp.feasibility([[F(-1)], [F(1)]], [F(0), F(1)])
    assert res.feasible
    x = res.witness[0]
    assert 0 <= x <= 1


def test_contradictory_halfspaces_certificate():
    # x <= -1, -x <= -1 (i.e. x >= 1)
    A = [[F(1)], [F(-1)]]
    b = [F(-1), F(-1)]
    res = lp.feasibility(A, b)
    assert not res.feasible
    check_farkas(A, b, [], [], res)
    # the canonical certificate here is (1, 1)
    assert res.farkas_ineq == (1, 1)


def test_equality_infeasible_certificate():
    A_eq = [[F(1), F(1)], [F(1), F(1)]]
    b_eq = [F(0), F(1)]
    res = lp.feasibility([], [], A_eq, b_eq)
    assert not res.feasible
    check_farkas([], [], A_eq, b_eq, res)


def test_optimize_simple():
    # max x + y over the unit square
    A = [[F(1), F(0)], [F(-1), F(0)], [F(0), F(1)], [F(0), F(-1)]]
    b = [F(1), F(0), F(1), F(0)]
    res = lp.solve_lp([F(1), F(1)], A, b, maximize=True)
    assert res.status == lp.OPTIMAL
    assert res.value == 2
    assert res.x == (1, 1)


def test_unbounded():
    res = lp.solve_lp([F(1)], [[F(-1)]], [F(0)], maximize=True)
    assert res.status == lp.UNBOUNDED


def test_degenerate_cycling_guard():
    # classic degenerate instance; Bland's rule must terminate
    A = [
        [F(1, 4), F(-8), F(-1), F(9)],
        [F(1, 2), F(-12), F(-1, 2), F(3)],
        [F(0), F(0), F(1), F(0)],
    ]
    b = [F(0), F(0), F(1)]
    ineqs = A + [[F(-1) if j == i else F(0) for j in range(4)] for i in range(4)]
    rhs = b + [F(0)] * 4
    c = [F(-3, 4), F(20), F(-1, 2), F(6)]
    res = lp.solve_lp(c, ineqs, rhs)
    assert res.status == lp.OPTIMAL
    assert res.value == F(-5, 4)


def test_lex_min_deterministic():
    # x + y = 1, x,y >= 0: lex-min picks (0, 1)
    A_ub = [[F(-1), F(0)], [F(0), F(-1)]]
    b_ub = [F(0), F(0)]
    A_eq = [[F(1), F(1)]]
    b_eq = [F(1)]
    x = lp.lex_min(A_ub, b_ub, A_eq, b_eq, 2)
    assert x == (0, 1)


def test_randomized_feasibility_sound():
    rng = random.Random(7)
    for _ in range(60):
        n = rng.randint(1, 3)
        m = rng.randint(1, 5)
        A = [[F(rng.randint(-3, 3)) for _ in range(n)] for _ in range(m)]
        b = [F(rng.randint(-3, 3)) for _ in range(m)]
        ne = rng.randint(0, 1)
        Ae = [[F(rng.randint(-2, 2)) for _ in range(n)] for _ in range(ne)]
        be = [F(rng.randint(-2, 2)) for _ in range(ne)]
        res = lp.feasibility(A, b, Ae, be)
        if res.feasible:
            x = res.witness
            assert all(
                sum(A[i][j] * x[j] for j in range(n)) <= b[i] for i in range(m)
            )
            assert all(
                sum(Ae[k][j] * x[j] for j in range(n)) == be[k] for k in range(ne)
            )
        else:
            check_farkas(A, b, Ae, be, res)
