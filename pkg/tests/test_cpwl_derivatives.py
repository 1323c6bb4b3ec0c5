"""Graphical derivative, regular coderivative and limiting coderivative of
the subdifferential mapping, with their exact interrelations."""

import random
from fractions import Fraction

from cpwlkkt.cpwl import (
    CpwlFunction,
    critical_cone,
    graph_tangent_oracle,
    in_vpoly_union,
    limiting_coderivative,
    limiting_normal_cones,
    regular_coderivative,
    subdifferentials,
)
from cpwlkkt.polyhedra import (
    HPoly,
    VPoly,
    convert_rep,
    convert_rep_v,
    dual_cone,
    h_equal,
    point_in_vpoly,
    v_subset_h,
)
from cpwlkkt.linalg import span_basis
from cpwlkkt.rational import vsub

from test_cpwl import random_cpwl, random_graph_point, theta_max2, theta_orthant

F = Fraction


def theta_neg_halfline():
    # indicator of the nonpositive halfline
    return CpwlFunction.make(1, pieces=[([0], 0)], domain=[([1], 0)])


def union_equals_hpoly(pieces, H):
    """Exact equality of a union of VPoly with a single H-polyhedron."""
    for V in pieces:
        if not v_subset_h(V, H):
            return False
    VH = convert_rep(H)
    if VH.is_empty():
        return not pieces or all(V.is_empty() for V in pieces)
    gens = list(VH.points) + [
        tuple(p + r for p, r in zip(VH.points[0], ray)) for ray in VH.rays
    ]
    for l in VH.lines:
        gens.append(tuple(p + x for p, x in zip(VH.points[0], l)))
        gens.append(tuple(p - x for p, x in zip(VH.points[0], l)))
    return all(in_vpoly_union(pieces, g) for g in gens)


def test_tangent_oracle_halfline_branches():
    th = theta_neg_halfline()
    z, v = (0,), (0,)
    # u < 0: only the flat branch, derivative {0}
    out = graph_tangent_oracle(th, z, v, (-1,))
    assert union_equals_hpoly(out, HPoly.make(1, eqs=[([1], 0)]))
    # u = 0: the normal-cone branch opens upward
    out = graph_tangent_oracle(th, z, v, (0,))
    assert union_equals_hpoly(out, HPoly.make(1, ineqs=[([-1], 0)]))
    # u > 0: leaves the domain, empty
    assert graph_tangent_oracle(th, z, v, (1,)) == []


def test_tangent_oracle_single_affine_piece():
    th = CpwlFunction.make(2, pieces=[([1, 2], 0)])
    out = graph_tangent_oracle(th, (0, 0), (1, 2), (3, -1))
    assert union_equals_hpoly(
        out, HPoly.make(2, eqs=[([1, 0], 0), ([0, 1], 0)])
    )


def test_regular_coderivative_halfline():
    th = theta_neg_halfline()
    # critical cone is the nonpositive halfline; domain of the regular
    # coderivative is its negative
    out = regular_coderivative(th, (0,), (0,), (1,))
    assert out is not None
    assert h_equal(convert_rep_v(out), HPoly.make(1, ineqs=[([-1], 0)]))
    assert regular_coderivative(th, (0,), (0,), (-1,)) is None


def test_regular_coderivative_single_piece():
    th = CpwlFunction.make(2, pieces=[([1, 2], 0)])
    out = regular_coderivative(th, (0, 0), (1, 2), (1, 1))
    H = convert_rep_v(out)
    V = convert_rep(H)
    assert V.points == ((0, 0),) and not V.rays and not V.lines


def test_regular_coderivative_max_rows():
    # max(z1, z2) at the origin, v = e1: polar of the critical cone is
    # {w : w1 + w2 = 0, w2 >= 0}
    out = regular_coderivative(theta_max2(), (0, 0), (1, 0), (-1, -1))
    target = HPoly.make(2, ineqs=[([0, -1], 0)], eqs=[([1, 1], 0)])
    assert h_equal(convert_rep_v(out), target)


def test_limiting_normal_halfline_three_branches():
    th = theta_neg_halfline()
    cones = limiting_normal_cones(th, (0,), (0,))
    # N(gph) = (R x {0}) u ({0} x R) u (R+ x R-)
    targets = [
        HPoly.make(2, eqs=[([0, 1], 0)]),
        HPoly.make(2, eqs=[([1, 0], 0)]),
        HPoly.make(2, ineqs=[([-1, 0], 0), ([0, 1], 0)]),
    ]
    assert len(cones) == 3
    for t in targets:
        assert any(h_equal(c, t) for c in cones)


def test_limiting_coderivative_halfline_at_zero():
    th = theta_neg_halfline()
    out = limiting_coderivative(th, (0,), (0,), (0,))
    # the union is the whole line
    assert in_vpoly_union(out, (5,)) and in_vpoly_union(out, (-5,))
    # strict inclusion vs the graphical derivative at u=0 (which is R+)
    tangent = graph_tangent_oracle(th, (0,), (0,), (0,))
    assert in_vpoly_union(tangent, (5,))
    assert not in_vpoly_union(tangent, (-5,))


def test_limiting_coderivative_single_piece():
    th = CpwlFunction.make(2, pieces=[([1, 2], 0)])
    out = limiting_coderivative(th, (0, 0), (1, 2), (1, -1))
    assert len(out) == 1
    V = out[0]
    assert V.points == ((0, 0),) and not V.rays and not V.lines


def sample_cone_vectors(H, rng, count=4):
    """A few exact members of an H-cone: generators and random nonnegative
    combinations."""
    V = convert_rep(H)
    gens = list(V.rays) + list(V.lines) + [tuple(-x for x in l) for l in V.lines]
    out = [tuple(F(0) for _ in range(H.dim))]
    out.extend(gens)
    for _ in range(count):
        if not gens:
            break
        u = [F(0)] * H.dim
        for g in gens:
            c = F(rng.randint(0, 2))
            for k in range(H.dim):
                u[k] += c * g[k]
        out.append(tuple(u))
    seen = set()
    uniq = []
    for u in out:
        if u not in seen:
            seen.add(u)
            uniq.append(u)
    return uniq


def test_theorem_identities_randomized():
    """Domain equality, slice identity, and derivative-in-coderivative
    inclusion for the second-order mappings, on a randomized corpus."""
    rng = random.Random(31)
    checked_domain = 0
    strict_seen = False
    for _ in range(20):
        m = rng.randint(1, 3)
        th = random_cpwl(rng, m)
        z, v = random_graph_point(rng, th)
        K = critical_cone(th, z, v).hrep
        for u in sample_cone_vectors(K, rng):
            # u in K: graphical derivative nonempty and equals
            # {w in K* : <w, u> = 0}
            tangent = graph_tangent_oracle(th, z, v, u)
            assert tangent, "graphical derivative empty on its domain"
            reg = regular_coderivative(th, z, v, tuple(-x for x in u))
            assert reg is not None
            target = convert_rep_v(reg).with_rows(eqs=[(u, 0)])
            assert union_equals_hpoly(tangent, target)
            # inclusion into the limiting coderivative
            lim = limiting_coderivative(th, z, v, u)
            VT = convert_rep(target)
            for g in VT.points:
                assert in_vpoly_union(lim, g)
            checked_domain += 1
        # u outside K: both second-order maps are empty
        for _ in range(4):
            u = tuple(F(rng.randint(-3, 3)) for _ in range(m))
            if K.contains(u):
                continue
            assert graph_tangent_oracle(th, z, v, u) == []
            assert regular_coderivative(th, z, v, tuple(-x for x in u)) is None
    assert checked_domain > 30


def test_strict_inclusion_instance_recorded():
    """The derivative-coderivative inclusion is strict for the halfline
    indicator at the origin with u = 0."""
    th = theta_neg_halfline()
    tangent = graph_tangent_oracle(th, (0,), (0,), (0,))
    lim = limiting_coderivative(th, (0,), (0,), (0,))
    # tangent subset of limiting
    for piece in tangent:
        for g in list(piece.points) + list(piece.rays):
            assert in_vpoly_union(lim, g)
    # and strictly smaller
    assert in_vpoly_union(lim, (-1,)) and not in_vpoly_union(tangent, (-1,))


def test_limiting_coderivative_at_zero_contains_subdiff_directions():
    """(D* of the subdifferential)(0) contains the direction space of the
    affine hull of the subdifferential, across the corpus."""
    rng = random.Random(33)
    for _ in range(10):
        m = rng.randint(1, 2)
        th = random_cpwl(rng, m)
        z, v = random_graph_point(rng, th)
        basic, _ = subdifferentials(th, z)
        dirs = span_basis(
            [vsub(p, basic.points[0]) for p in basic.points[1:]]
            + list(basic.rays)
            + list(basic.lines)
        )
        lim0 = limiting_coderivative(th, z, v, tuple(F(0) for _ in range(m)))
        for d in dirs:
            assert in_vpoly_union(lim0, d)
            assert in_vpoly_union(lim0, tuple(-x for x in d))


def test_locality_of_nearby_graph_points():
    """Sampled graph points near (z, v) keep the positive-support indices
    active (pattern persistence near a graph point)."""
    rng = random.Random(34)
    from cpwlkkt.cpwl import (
        decompose_subgradient,
        eval_and_active,
        graph_tangent_cones,
    )

    for _ in range(8):
        m = rng.randint(1, 2)
        th = random_cpwl(rng, m)
        z, v = random_graph_point(rng, th)
        dec = decompose_subgradient(th, z, v)
        # walk a small step along each tangent-cone witness direction
        for T in graph_tangent_cones(th, z, v):
            V = convert_rep(T)
            for g in list(V.rays) + list(V.lines):
                t = F(1, 1024)
                zp = tuple(a + t * b for a, b in zip(z, g[:m]))
                vp = tuple(a + t * b for a, b in zip(v, g[m:]))
                val, act = eval_and_active(th, zp)
                if val == INF_SENTINEL:
                    continue
                from cpwlkkt.cpwl import subgradient_member

                if not subgradient_member(th, zp, vp):
                    continue
                assert dec.J1 <= act.K
                assert dec.J2 <= act.I


INF_SENTINEL = float("inf")
