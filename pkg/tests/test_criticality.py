"""Criticality classification, the coderivative cross-check and the
second-order sufficient condition."""

import random
from fractions import Fraction

import pytest

from cpwlkkt.corpus import (
    build_corpus,
    make_eqnlp34,
    make_ex63,
    make_ex64_active,
    make_izmailov54,
    make_onedim,
    orthant_indicator,
)
from cpwlkkt.cpwl import CpwlFunction, MembershipError
from cpwlkkt.criticality import (
    classify_multiplier,
    classify_multiplier_coderivative,
    sosc_check,
    verify_criticality_witness,
)
from cpwlkkt.linalg import rank
from cpwlkkt.polynomials import PolyExpr, PolyMap
from cpwlkkt.varsys import VariationalSystem, multiplier_set

from test_cpwl import random_cpwl, random_graph_point

F = Fraction


def test_ex63_critical_with_valid_witness():
    VS = make_ex63().system
    verdict = classify_multiplier(VS, (0, 0, 0), (3, 0, 2))
    assert verdict.is_critical
    xi, eta = verdict.witness
    assert any(c != 0 for c in xi)
    assert verify_criticality_witness(VS, (0, 0, 0), (3, 0, 2), xi, eta)
    # the classical hand witness also verifies
    assert verify_criticality_witness(VS, (0, 0, 0), (3, 0, 2), (0, 1, 1), (0, 0, 0))


def test_ex63_noncritical_vertex():
    VS = make_ex63().system
    verdict = classify_multiplier(VS, (0, 0, 0), (1, 0, 0))
    assert not verdict.is_critical
    assert verdict.witness is None
    assert verdict.face_certificates  # exhaustive face list recorded


def test_ex64_critical_direction():
    VS = make_ex64_active().system
    verdict = classify_multiplier(VS, (0, 0, 0), (0, 1))
    assert verdict.is_critical
    xi, eta = verdict.witness
    # xi must be proportional to (0, 0, 1)
    assert rank([xi, (0, 0, 1)]) == 1
    assert verify_criticality_witness(VS, (0, 0, 0), (0, 1), (0, 0, 1), (0, 0))


def test_trivial_nonsingular_noncritical():
    # single affine piece, f = identity: nonsingular Jacobian forces xi = 0
    f = PolyMap.make([PolyExpr.variable(2, 0), PolyExpr.variable(2, 1)])
    Phi = PolyMap.make(
        [
            PolyExpr.from_terms(2, [(1, (1, 0)), (2, (0, 1))]),
        ]
    )
    theta = CpwlFunction.make(1, pieces=[([0], 0)])
    VS = VariationalSystem.make(f, Phi, theta)
    verdict = classify_multiplier(VS, (0, 0), (0,))
    assert not verdict.is_critical


def test_membership_enforced():
    VS = make_ex63().system
    with pytest.raises(MembershipError):
        classify_multiplier(VS, (0, 0, 0), (0, 0, 1))


def test_coderivative_route_agrees_on_corpus():
    for inst in build_corpus():
        for pname, (x, v) in inst.points.items():
            a = classify_multiplier(inst.system, x, v)
            b = classify_multiplier_coderivative(inst.system, x, v)
            assert a.status == b.status, (inst.name, pname)
            if b.is_critical:
                xi, eta = b.witness
                assert verify_criticality_witness(inst.system, x, v, xi, eta)


def make_random_system(rng):
    """Random composite system with a guaranteed multiplier at the origin."""
    n = rng.randint(1, 3)
    m = rng.randint(1, 3)
    while True:
        th = random_cpwl(rng, m)
        z0 = None
        # choose a target z in the domain reachable by Phi(0) = z0
        for _ in range(50):
            cand = [F(rng.randint(-2, 2)) for _ in range(m)]
            from cpwlkkt.cpwl import eval_and_active, INF

            if eval_and_active(th, cand)[0] != INF:
                z0 = cand
                break
        if z0 is None:
            continue
        from cpwlkkt.cpwl import subdifferentials

        basic, _ = subdifferentials(th, z0)
        # v = convex combination of vertices (+ maybe a ray)
        ws = [F(rng.randint(0, 2)) for _ in basic.points]
        if sum(ws) == 0:
            ws[0] = F(1)
        s = sum(ws)
        v = [sum(w * p[k] for w, p in zip(ws, basic.points)) / s for k in range(m)]
        if basic.rays and rng.random() < 0.5:
            r = basic.rays[rng.randrange(len(basic.rays))]
            c = F(rng.randint(0, 2))
            v = [a + c * b for a, b in zip(v, r)]
        # Phi: quadratic with Phi(0) = z0
        comps = []
        for i in range(m):
            terms = [(z0[i], (0,) * n)]
            for j in range(n):
                e = [0] * n
                e[j] = 1
                terms.append((F(rng.randint(-2, 2)), tuple(e)))
                e2 = [0] * n
                e2[j] = 2
                terms.append((F(rng.randint(-1, 1)), tuple(e2)))
            comps.append(PolyExpr.from_terms(n, terms))
        Phi = PolyMap.make(comps)
        # f: random affine map with f(0) = -DPhi(0)* v
        J = Phi.jacobian_at([F(0)] * n)
        f0 = [-sum(J[i][k] * v[i] for i in range(m)) for k in range(n)]
        fcomps = []
        for k in range(n):
            terms = [(f0[k], (0,) * n)]
            for j in range(n):
                e = [0] * n
                e[j] = 1
                terms.append((F(rng.randint(-2, 2)), tuple(e)))
            fcomps.append(PolyExpr.from_terms(n, terms))
        fmap = PolyMap.make(fcomps)
        VS = VariationalSystem.make(fmap, Phi, th)
        return VS, tuple([F(0)] * n), tuple(v)


def test_verdict_cross_agreement_randomized():
    rng = random.Random(42)
    agreements = 0
    while agreements < 50:
        VS, x, v = make_random_system(rng)
        a = classify_multiplier(VS, x, v)
        b = classify_multiplier_coderivative(VS, x, v)
        assert a.status == b.status
        if a.is_critical:
            assert verify_criticality_witness(VS, x, v, *a.witness)
        agreements += 1


def test_scale_invariance_of_verdict():
    rng = random.Random(77)
    for _ in range(10):
        VS, x, v = make_random_system(rng)
        base = classify_multiplier(VS, x, v).status
        c = F(rng.randint(1, 5), rng.randint(1, 3))
        th2 = CpwlFunction.make(
            VS.m,
            pieces=[([c * a for a in row], c * al) for row, al in VS.theta.pieces],
            domain=VS.theta.domain,
        )
        f2 = PolyMap.make([p.scale(c) for p in VS.f.components])
        VS2 = VariationalSystem.make(f2, VS.Phi, th2)
        v2 = tuple(c * t for t in v)
        assert classify_multiplier(VS2, x, v2).status == base


def test_sosc_identity_hessian():
    # identity Hessian: holds over any cone
    f = PolyMap.make([PolyExpr.variable(2, 0), PolyExpr.variable(2, 1)])
    Phi = PolyMap.make([PolyExpr.variable(2, 0), PolyExpr.variable(2, 1)])
    VS = VariationalSystem.make(f, Phi, orthant_indicator(2))
    s = sosc_check(VS, (0, 0), (0, 0))
    assert s.holds


def test_sosc_ex63_noncritical_vertex():
    VS = make_ex63().system
    s = sosc_check(VS, (0, 0, 0), (1, 0, 0))
    assert s.holds


def test_sosc_ex64_fails_with_direction():
    VS = make_ex64_active().system
    s = sosc_check(VS, (0, 0, 0), (0, 1))
    assert not s.holds
    d = s.violating_direction
    assert d is not None
    # direction proportional to (0, 0, 1)
    assert rank([d, (0, 0, 1)]) == 1


def test_sosc_implies_noncritical_on_corpus():
    for inst in build_corpus():
        for pname, (x, v) in inst.points.items():
            s = sosc_check(inst.system, x, v)
            if s.holds:
                assert not classify_multiplier(inst.system, x, v).is_critical, (
                    inst.name,
                    pname,
                )


def test_sosc_implies_noncritical_randomized():
    rng = random.Random(99)
    for _ in range(25):
        VS, x, v = make_random_system(rng)
        if sosc_check(VS, x, v).holds:
            assert not classify_multiplier(VS, x, v).is_critical


def test_sosc_violation_verified_exactly():
    rng = random.Random(123)
    from cpwlkkt.cpwl import critical_cone
    from cpwlkkt.criticality import _pullback_cone
    from cpwlkkt.varsys import psi_jacobian_x

    for _ in range(25):
        VS, x, v = make_random_system(rng)
        s = sosc_check(VS, x, v)
        if s.holds:
            continue
        u = s.violating_direction
        assert any(c != 0 for c in u)
        z = VS.Phi.eval(x)
        cone = critical_cone(VS.theta, z, v)
        C = _pullback_cone(VS, x, cone)
        assert C.contains(u)
        H = psi_jacobian_x(VS, x, v)
        q = sum(u[i] * H[i][j] * u[j] for i in range(VS.n) for j in range(VS.n))
        assert q <= 0


def test_sosc_float_sampling_never_contradicts():
    import numpy as np

    rng = random.Random(7)
    nprng = np.random.default_rng(7)
    from cpwlkkt.cpwl import critical_cone
    from cpwlkkt.criticality import _pullback_cone
    from cpwlkkt.polyhedra import convert_rep
    from cpwlkkt.varsys import psi_jacobian_x

    checked = 0
    for inst in build_corpus():
        for pname, (x, v) in inst.points.items():
            s = sosc_check(inst.system, x, v)
            if not s.holds:
                continue
            VS = inst.system
            z = VS.Phi.eval(x)
            C = _pullback_cone(VS, x, critical_cone(VS.theta, z, v))
            V = convert_rep(C)
            gens = [np.array([float(c) for c in g]) for g in V.rays] + [
                sgn * np.array([float(c) for c in l])
                for l in V.lines
                for sgn in (1.0, -1.0)
            ]
            if not gens:
                continue
            H = np.array(
                [[float(c) for c in row] for row in psi_jacobian_x(VS, x, v)]
            )
            Hs = (H + H.T) / 2
            for _ in range(10_000):
                w = nprng.uniform(0, 1, len(gens))
                u = sum(c * g for c, g in zip(w, gens))
                nu = np.linalg.norm(u)
                if nu < 1e-12:
                    continue
                u /= nu
                val = u @ Hs @ u
                assert val > -1e-9
                checked += 1
    assert checked > 0
