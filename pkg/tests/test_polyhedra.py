"""Polyhedral kernel: conversion, duality, faces, projection, distance."""

import math
import random
from fractions import Fraction

from cpwlkkt import lp
from cpwlkkt.polyhedra import (
    HPoly,
    VPoly,
    convert_rep,
    convert_rep_v,
    distance_point_polyhedron,
    dual_cone,
    dual_cone_h,
    enumerate_faces,
    h_equal,
    linear_kernel,
    lp_feasible,
    nonneg_dual_cone,
    point_in_vpoly,
    project_out,
    v_subset_h,
)

F = Fraction


def test_linear_kernel_examples():
    assert linear_kernel([[1, 0], [0, 1]]) == []
    assert len(linear_kernel([[0, 0, 0]])) == 3
    # adjoint Jacobian with rows phi_i' stacked as the 3x3 map
    # v -> (v1+v2-v3, 0, 0)
    ker = linear_kernel([[1, 1, -1], [0, 0, 0], [0, 0, 0]])
    assert len(ker) == 2
    for v in [(1, -1, 0), (1, 0, 1)]:
        # both hand-computed directions lie in the span of the basis
        a, b = ker
        import cpwlkkt.linalg as la

        assert la.rank([a, b, v]) == 2


def test_unit_square_vertices():
    P = HPoly.make(
        2,
        ineqs=[([1, 0], 1), ([-1, 0], 0), ([0, 1], 1), ([0, -1], 0)],
    )
    V = convert_rep(P)
    assert set(V.points) == {(0, 0), (0, 1), (1, 0), (1, 1)}
    assert V.rays == () and V.lines == ()


def test_simplex_hrep_from_vertices():
    # co{e1, e2} in R^2 is {v : v1 + v2 = 1, v >= 0}
    V = VPoly.make(2, points=[(1, 0), (0, 1)])
    H = convert_rep_v(V)
    target = HPoly.make(2, ineqs=[([-1, 0], 0), ([0, -1], 0)], eqs=[([1, 1], 1)])
    assert h_equal(H, target)


def test_critical_cone_ray():
    # {w1 = 0, w3 = 0, w2 <= 0} has the single extreme ray (0,-1,0)
    P = HPoly.make(3, ineqs=[([0, 1, 0], 0)], eqs=[([1, 0, 0], 0), ([0, 0, 1], 0)])
    V = convert_rep(P)
    assert V.points == ((0, 0, 0),)
    assert V.rays == ((0, -1, 0),)
    assert V.lines == ()


def test_convert_empty():
    P = HPoly.make(1, ineqs=[([1], -1), ([-1], -1)])
    V = convert_rep(P)
    assert V.is_empty()
    H = convert_rep_v(V)
    assert not lp_feasible(H).feasible


def test_dual_orthant():
    C = VPoly.cone(2, rays=[(1, 0), (0, 1)])
    polar = dual_cone(C)
    # polar of the nonnegative orthant is the nonpositive orthant
    assert h_equal(polar, HPoly.make(2, ineqs=[([1, 0], 0), ([0, 1], 0)]))
    V = convert_rep(polar)
    assert set(V.rays) == {(-1, 0), (0, -1)}
    # the nonnegative dual is the orthant itself
    nn = nonneg_dual_cone(C)
    assert h_equal(nn, HPoly.make(2, ineqs=[([-1, 0], 0), ([0, -1], 0)]))


def test_dual_full_space():
    C = VPoly.cone(2, lines=[(1, 0), (0, 1)])
    polar = dual_cone(C)
    V = convert_rep(polar)
    assert V.points == ((0, 0),) and not V.rays and not V.lines


def test_dual_pattern_cone():
    # single active-pattern inequality <a2-a1, u> <= 0 with a1=e1, a2=e2
    G = HPoly.make(2, ineqs=[([-1, 1], 0)])
    Fdual = dual_cone_h(G)
    assert Fdual.rays == ((-1, 1),)
    # sampled Farkas membership: every y in the dual pairs <= 0 with gens of G
    VG = convert_rep(G)
    for y in Fdual.rays:
        for r in VG.rays:
            assert sum(a * b for a, b in zip(y, r)) <= 0
        for l in VG.lines:
            assert sum(a * b for a, b in zip(y, l)) == 0


def test_double_duality_random():
    rng = random.Random(3)
    for _ in range(25):
        d = rng.randint(1, 3)
        nr = rng.randint(0, 3)
        nl = rng.randint(0, 1)
        C = VPoly.cone(
            d,
            rays=[[F(rng.randint(-2, 2)) for _ in range(d)] for _ in range(nr)],
            lines=[[F(rng.randint(-2, 2)) for _ in range(d)] for _ in range(nl)],
        )
        C = VPoly.cone(
            d,
            rays=[r for r in C.rays if any(x != 0 for x in r)],
            lines=[l for l in C.lines if any(x != 0 for x in l)],
        )
        polar = dual_cone(C)
        back = dual_cone_h(polar)
        CH = convert_rep_v(C)
        assert v_subset_h(back, CH)
        assert v_subset_h(C, convert_rep_v(back))


def test_enumerate_faces_orthant():
    P = HPoly.make(2, ineqs=[([-1, 0], 0), ([0, -1], 0)])
    faces = enumerate_faces(P)
    assert len(faces) == 4  # origin, two rays, the orthant itself


def test_enumerate_faces_halfplane():
    P = HPoly.make(2, ineqs=[([0, 1], 0)])
    faces = enumerate_faces(P)
    assert len(faces) == 2  # the boundary line and the halfplane


def test_enumerate_faces_pointed_line_cone():
    P = HPoly.make(3, ineqs=[([0, 1, 0], 0)], eqs=[([1, 0, 0], 0), ([0, 0, 1], 0)])
    assert len(enumerate_faces(P)) == 2


def test_face_count_matches_bruteforce():
    rng = random.Random(11)
    import itertools

    for _ in range(10):
        d = rng.randint(2, 3)
        m = rng.randint(1, 4)
        rows = [
            tuple(F(rng.randint(-2, 2)) for _ in range(d)) for _ in range(m)
        ]
        rows = [r for r in rows if any(x != 0 for x in r)]
        if not rows:
            continue
        P = HPoly.make(d, ineqs=[(r, 0) for r in rows])
        faces = enumerate_faces(P)
        # brute force: distinct implied active-set closures over all subsets
        seen = set()
        for k in range(len(rows) + 1):
            for S in itertools.combinations(range(len(rows)), k):
                carrier = HPoly.make(
                    d,
                    ineqs=[(r, 0) for i, r in enumerate(rows) if i not in S],
                    eqs=[(rows[i], 0) for i in S],
                )
                if not lp_feasible(carrier).feasible:
                    continue
                active = set(S)
                for i, r in enumerate(rows):
                    if i in S:
                        continue
                    res = lp.solve_lp(
                        list(r),
                        [list(a) for a, _ in carrier.ineqs],
                        [b for _, b in carrier.ineqs],
                        [list(a) for a, _ in carrier.eqs],
                        [b for _, b in carrier.eqs],
                    )
                    if res.status == lp.OPTIMAL and res.value == 0:
                        active.add(i)
                seen.add(frozenset(active))
        assert len(faces) == len(seen)
        for f in faces:
            assert lp_feasible(f.carrier).feasible
            assert v_subset_h(convert_rep(f.carrier), P)


def test_project_triangle():
    P = HPoly.make(2, ineqs=[([1, 1], 1), ([-1, 0], 0), ([0, -1], 0)])
    Q = project_out(P, {1})
    assert Q.dim == 1
    assert h_equal(Q, HPoly.make(1, ineqs=[([1], 1), ([-1], 0)]))


def test_project_forces_zero():
    # xi_1 = 0, eta free, 4 xi_2 = 0, 2 xi_3 = 0 over (xi, eta) in R^4
    P = HPoly.make(
        4,
        eqs=[([1, 0, 0, 0], 0), ([0, 4, 0, 0], 0), ([0, 0, 2, 0], 0)],
    )
    Q = project_out(P, {3})
    assert h_equal(
        Q,
        HPoly.make(
            3, eqs=[([1, 0, 0], 0), ([0, 1, 0], 0), ([0, 0, 1], 0)]
        ),
    )


def test_project_unconstrained_coordinate():
    P = HPoly.make(2, ineqs=[([0, 1], 5)])
    Q = project_out(P, {1})
    assert Q.ineqs == () and Q.eqs == ()  # full line in the kept coordinate


def test_projection_membership_random():
    rng = random.Random(5)
    for _ in range(15):
        d = rng.randint(2, 4)
        m = rng.randint(2, 5)
        P = HPoly.make(
            d,
            ineqs=[
                (
                    [F(rng.randint(-2, 2)) for _ in range(d)],
                    F(rng.randint(-1, 2)),
                )
                for _ in range(m)
            ],
        )
        drop = {rng.randrange(d)}
        Q = project_out(P, drop)
        keep = [k for k in range(d) if k not in drop]
        V = convert_rep(P)
        for p in V.points:
            assert Q.contains([p[k] for k in keep])
        # projected witnesses lift back
        if not V.is_empty():
            VQ = convert_rep(Q)
            for q in VQ.points:
                lift_rows = []
                lift_rhs = []
                for a, b in P.ineqs:
                    lift_rows.append([a[k] for k in sorted(drop)])
                    lift_rhs.append(b - sum(a[k] * v for k, v in zip(keep, q)))
                res = lp.feasibility(lift_rows, lift_rhs)
                assert res.feasible


def test_distance_halfplane():
    P = HPoly.make(2, ineqs=[([1, 0], 0)])
    assert abs(distance_point_polyhedron([2.0, 0.0], P) - 2.0) < 1e-12


def test_distance_inside():
    P = HPoly.make(2, ineqs=[([1, 0], 1), ([-1, 0], 1), ([0, 1], 1), ([0, -1], 1)])
    assert distance_point_polyhedron([0.25, -0.5], P) == 0.0


def test_distance_orthant_corner():
    P = HPoly.make(2, ineqs=[([1, 0], 0), ([0, 1], 0)])
    d = distance_point_polyhedron([1.0, 1.0], P)
    assert abs(d - math.sqrt(2)) < 1e-12


def test_distance_empty():
    P = HPoly.make(1, ineqs=[([1], -1), ([-1], -1)])
    assert distance_point_polyhedron([0.0], P) == float("inf")


def test_point_in_vpoly():
    V = VPoly.make(2, points=[(0, 0), (1, 0)], rays=[(0, 1)])
    assert point_in_vpoly(V, (F(1, 2), F(3)))
    assert not point_in_vpoly(V, (2, 0))


def test_hv_membership_roundtrip_random():
    rng = random.Random(13)
    trials = 0
    while trials < 8:
        d = rng.randint(2, 3)
        m = rng.randint(2, 5)
        P = HPoly.make(
            d,
            ineqs=[
                (
                    [F(rng.randint(-2, 2)) for _ in range(d)],
                    F(rng.randint(0, 2)),
                )
                for _ in range(m)
            ],
        )
        V = convert_rep(P)
        if V.is_empty():
            continue
        trials += 1
        H2 = convert_rep_v(V)
        for _ in range(100):
            z = [F(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(d)]
            assert P.contains(z) == H2.contains(z) == point_in_vpoly(V, z)
