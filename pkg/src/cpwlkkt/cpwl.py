"""Convex piecewise-linear functions and their variational objects.

A CpwlFunction is max_i (<a_i, z> - alpha_i) over the polyhedral domain
{z : <d_j, z> <= beta_j}.  This module computes values, active index sets,
subdifferentials, directional derivatives, subgradient decompositions,
critical cones, and the graphical derivative / regular coderivative /
limiting coderivative of the subdifferential mapping, all exactly.

Piece indices are 0-based throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import lp
from .polyhedra import (
    HPoly,
    VPoly,
    convert_rep,
    convert_rep_v,
    dual_cone_h,
    h_equal,
    lp_feasible,
    point_in_vpoly,
    project_out,
    v_subset_h,
)
from .rational import ZERO, ONE, Vec, dot, primitive, vec, vsub, vzero

INF = float("inf")


class DomainError(ValueError):
    """Point outside dom theta."""


class MembershipError(ValueError):
    """Vector not a subgradient at the given point."""


@dataclass(frozen=True)
class CpwlFunction:
    """max of affine pieces (a_i, alpha_i) over {z : <d_j,z> <= beta_j}."""

    m: int
    pieces: tuple[tuple[Vec, Fraction], ...]
    domain: tuple[tuple[Vec, Fraction], ...]

    @staticmethod
    def make(m, pieces, domain=()) -> "CpwlFunction":
        pieces = tuple((vec(a), Fraction(al)) for a, al in pieces)
        domain = tuple((vec(d), Fraction(b)) for d, b in domain)
        if not pieces:
            raise ValueError("need at least one affine piece")
        for a, _ in pieces:
            if len(a) != m:
                raise ValueError("piece dimension mismatch")
        for d, _ in domain:
            if len(d) != m:
                raise ValueError("domain row dimension mismatch")
        theta = CpwlFunction(m, pieces, domain)
        if not lp_feasible(theta.domain_hpoly()).feasible:
            raise ValueError("empty domain")
        return theta

    @property
    def num_pieces(self) -> int:
        return len(self.pieces)

    def domain_hpoly(self) -> HPoly:
        return HPoly(self.m, tuple(self.domain), ())


@dataclass(frozen=True)
class ActiveSets:
    K: frozenset[int]
    I: frozenset[int]


@dataclass(frozen=True)
class SubgradientDecomposition:
    """v = v1 + v2 with v1 a convex combination of active piece gradients
    and v2 a nonnegative combination of active domain normals."""

    v1: Vec
    v2: Vec
    lam: tuple[tuple[int, Fraction], ...]
    mu: tuple[tuple[int, Fraction], ...]
    J1: frozenset[int]
    J2: frozenset[int]

    def lam_dict(self):
        return dict(self.lam)

    def mu_dict(self):
        return dict(self.mu)


@dataclass(frozen=True)
class CriticalCone:
    hrep: HPoly
    generating_decomposition: SubgradientDecomposition


# ---------------------------------------------------------------------------
# first-order objects


def eval_and_active(theta: CpwlFunction, z):
    """Value (or +inf off the domain) together with the active index sets."""
    z = vec(z)
    if len(z) != theta.m:
        raise ValueError("dimension mismatch")
    I = frozenset(
        i for i, (d, b) in enumerate(theta.domain) if dot(d, z) == b
    )
    if any(dot(d, z) > b for d, b in theta.domain):
        return INF, ActiveSets(frozenset(), I)
    vals = [dot(a, z) - al for a, al in theta.pieces]
    best = max(vals)
    K = frozenset(i for i, t in enumerate(vals) if t == best)
    return best, ActiveSets(K, I)


def in_domain(theta: CpwlFunction, z) -> bool:
    return theta.domain_hpoly().contains(vec(z))


def tangent_cone_dom(theta: CpwlFunction, z) -> HPoly:
    """Tangent cone to dom theta at z (active domain rows, homogenized)."""
    _, act = eval_and_active(theta, z)
    rows = [(theta.domain[i][0], ZERO) for i in sorted(act.I)]
    return HPoly(theta.m, tuple(rows), ())


def subdifferentials(theta: CpwlFunction, z):
    """(basic, singular) subdifferential at z in V-representation."""
    value, act = eval_and_active(theta, z)
    if value == INF:
        raise DomainError("z outside dom theta")
    basic = VPoly.make(
        theta.m,
        points=[theta.pieces[i][0] for i in sorted(act.K)],
        rays=[theta.domain[i][0] for i in sorted(act.I)],
    )
    singular = VPoly.cone(
        theta.m, rays=[theta.domain[i][0] for i in sorted(act.I)]
    )
    return basic, singular


def directional_derivative(theta: CpwlFunction, z, w):
    """Classical directional derivative; +inf outside the domain tangent."""
    value, act = eval_and_active(theta, z)
    if value == INF:
        raise DomainError("z outside dom theta")
    w = vec(w)
    if any(dot(theta.domain[i][0], w) > 0 for i in act.I):
        return INF
    return max(dot(theta.pieces[i][0], w) for i in act.K)


def subgradient_member(theta: CpwlFunction, z, v) -> bool:
    """Exact test v in the subdifferential at z."""
    basic, _ = subdifferentials(theta, z)
    return point_in_vpoly(basic, v)


def decompose_subgradient(theta: CpwlFunction, z, v) -> SubgradientDecomposition:
    """Multipliers (lambda, mu) certifying v in the subdifferential at z.

    Returns the lexicographically smallest multiplier vector (lambda over
    the active pieces in index order, then mu over the active rows), which
    makes downstream golden values deterministic.
    """
    value, act = eval_and_active(theta, z)
    if value == INF:
        raise DomainError("z outside dom theta")
    v = vec(v)
    Ksort = sorted(act.K)
    Isort = sorted(act.I)
    nl, nm = len(Ksort), len(Isort)
    nvars = nl + nm
    A_eq = []
    b_eq = []
    for k in range(theta.m):
        A_eq.append(
            [theta.pieces[i][0][k] for i in Ksort]
            + [theta.domain[i][0][k] for i in Isort]
        )
        b_eq.append(v[k])
    A_eq.append([ONE] * nl + [ZERO] * nm)
    b_eq.append(ONE)
    A_ub = []
    b_ub = []
    for j in range(nvars):
        row = [ZERO] * nvars
        row[j] = -ONE
        A_ub.append(row)
        b_ub.append(ZERO)
    if not lp.feasibility(A_ub, b_ub, A_eq, b_eq, nvars=nvars).feasible:
        raise MembershipError("v is not a subgradient at z")
    x = lp.lex_min(A_ub, b_ub, A_eq, b_eq, nvars)
    lam = tuple((i, x[p]) for p, i in enumerate(Ksort))
    mu = tuple((i, x[nl + p]) for p, i in enumerate(Isort))
    v1 = vzero(theta.m)
    for i, li in lam:
        v1 = tuple(x0 + li * a for x0, a in zip(v1, theta.pieces[i][0]))
    v2 = vsub(v, v1)
    return SubgradientDecomposition(
        v1,
        v2,
        lam,
        mu,
        frozenset(i for i, li in lam if li > 0),
        frozenset(i for i, mi in mu if mi > 0),
    )


# ---------------------------------------------------------------------------
# critical cone


def critical_cone(theta: CpwlFunction, z, v, decomposition=None) -> CriticalCone:
    """Explicit H-representation of the critical cone at (z, v):
    equal piece-gradient pairing on the positive supports, one-sided
    comparisons against the remaining active pieces, and tightened/ordinary
    active domain rows."""
    value, act = eval_and_active(theta, z)
    if value == INF:
        raise DomainError("z outside dom theta")
    dec = decomposition or decompose_subgradient(theta, z, v)
    K = sorted(act.K)
    I = sorted(act.I)
    J1 = sorted(dec.J1)
    J2 = sorted(dec.J2)
    eqs = []
    for i, j in itertools.combinations(J1, 2):
        row = vsub(theta.pieces[i][0], theta.pieces[j][0])
        eqs.append((row, ZERO))
    for i in J2:
        eqs.append((theta.domain[i][0], ZERO))
    ineqs = []
    for i in K:
        if i in dec.J1:
            continue
        for j in J1:
            ineqs.append((vsub(theta.pieces[i][0], theta.pieces[j][0]), ZERO))
    for i in I:
        if i in dec.J2:
            continue
        ineqs.append((theta.domain[i][0], ZERO))
    return CriticalCone(HPoly(theta.m, tuple(ineqs), tuple(eqs)), dec)


def critical_cone_oracle(theta: CpwlFunction, z, v) -> HPoly:
    """First-principles critical cone: directions w tangent to the domain
    on which the directional derivative is attained with slope <v, w>;
    assembled as the hull of the per-maximal-piece polyhedra."""
    value, act = eval_and_active(theta, z)
    if value == INF:
        raise DomainError("z outside dom theta")
    if not subgradient_member(theta, z, v):
        raise MembershipError("v is not a subgradient at z")
    v = vec(v)
    tangent_rows = [(theta.domain[i][0], ZERO) for i in sorted(act.I)]
    pieces_v = []
    for s in sorted(act.K):
        a_s = theta.pieces[s][0]
        ineqs = list(tangent_rows)
        for i in sorted(act.K):
            if i != s:
                ineqs.append((vsub(theta.pieces[i][0], a_s), ZERO))
        eqs = [(vsub(v, a_s), ZERO)]
        piece = HPoly(theta.m, tuple(ineqs), tuple(eqs))
        pieces_v.append(convert_rep(piece))
    rays = []
    lines = []
    for V in pieces_v:
        rays.extend(V.rays)
        lines.extend(V.lines)
    hull = VPoly.cone(theta.m, rays=sorted(set(rays)), lines=sorted(set(lines)))
    H = convert_rep_v(hull)
    # the union of the pieces must itself be convex; check the hull adds nothing
    HV = convert_rep(H)
    for g in HV.rays:
        if not any(point_in_vpoly(V, g) for V in pieces_v):
            raise AssertionError("union of maximal-piece cones is not convex")
    for l in HV.lines:
        for g in (l, tuple(-x for x in l)):
            if not any(point_in_vpoly(V, g) for V in pieces_v):
                raise AssertionError("union of maximal-piece cones is not convex")
    return H


# ---------------------------------------------------------------------------
# subdifferential graph pieces (lazy, cached per function)


@lru_cache(maxsize=None)
def _graph_piece(theta: CpwlFunction, P: frozenset, Q: frozenset) -> HPoly:
    """H-representation in (z, v) of the graph piece carrying patterns
    (P, Q): all pieces in P maximal, all rows in Q tight, and v generated
    by the P-gradients and Q-normals.  Obtained by exact projection of the
    multiplier lift."""
    m = theta.m
    Ps = sorted(P)
    Qs = sorted(Q)
    nl, nm = len(Ps), len(Qs)
    nvars = 2 * m + nl + nm
    ineqs = []
    eqs = []

    def zrow(a):
        return list(a) + [ZERO] * (m + nl + nm)

    s = Ps[0]
    a_s, al_s = theta.pieces[s]
    for i in Ps[1:]:
        a_i, al_i = theta.pieces[i]
        eqs.append((tuple(zrow(vsub(a_i, a_s))), al_i - al_s))
    for j in range(theta.num_pieces):
        if j in P:
            continue
        a_j, al_j = theta.pieces[j]
        ineqs.append((tuple(zrow(vsub(a_j, a_s))), al_j - al_s))
    for i, (d, b) in enumerate(theta.domain):
        if i in Q:
            eqs.append((tuple(zrow(d)), b))
        else:
            ineqs.append((tuple(zrow(d)), b))
    for k in range(m):
        row = [ZERO] * nvars
        row[m + k] = ONE
        for p, i in enumerate(Ps):
            row[2 * m + p] = -theta.pieces[i][0][k]
        for p, i in enumerate(Qs):
            row[2 * m + nl + p] = -theta.domain[i][0][k]
        eqs.append((tuple(row), ZERO))
    srow = [ZERO] * nvars
    for p in range(nl):
        srow[2 * m + p] = ONE
    eqs.append((tuple(srow), ONE))
    for p in range(nl + nm):
        row = [ZERO] * nvars
        row[2 * m + p] = -ONE
        ineqs.append((tuple(row), ZERO))
    lifted = HPoly(nvars, tuple(ineqs), tuple(eqs))
    return project_out(lifted, set(range(2 * m, nvars)))


def graph_pieces_at(theta: CpwlFunction, z, v):
    """All graph pieces containing (z, v), as (P, Q, hpoly) triples."""
    value, act = eval_and_active(theta, z)
    if value == INF:
        raise DomainError("z outside dom theta")
    z = vec(z)
    v = vec(v)
    point = z + v
    out = []
    for kP in range(1, len(act.K) + 1):
        for P in itertools.combinations(sorted(act.K), kP):
            for kQ in range(0, len(act.I) + 1):
                for Q in itertools.combinations(sorted(act.I), kQ):
                    piece = _graph_piece(theta, frozenset(P), frozenset(Q))
                    if piece.contains(point):
                        out.append((frozenset(P), frozenset(Q), piece))
    if not out:
        raise MembershipError("(z, v) is not on the subdifferential graph")
    return out


def _tangent_rows_at(P: HPoly, x):
    """Active-row homogenization: tangent cone of P at a member point x."""
    x = vec(x)
    ineqs = [(a, ZERO) for a, b in P.ineqs if dot(a, x) == b]
    eqs = [(a, ZERO) for a, b in P.eqs]
    return HPoly(P.dim, tuple(ineqs), tuple(eqs))


def graph_tangent_cones(theta: CpwlFunction, z, v):
    """Tangent cones at (z, v) of each graph piece containing it."""
    z = vec(z)
    v = vec(v)
    return [
        _tangent_rows_at(piece, z + v) for _, _, piece in graph_pieces_at(theta, z, v)
    ]


def graph_tangent_oracle(theta: CpwlFunction, z, v, u):
    """Graphical derivative of the subdifferential mapping at (z, v) in
    direction u: the union, over graph pieces through (z, v), of the
    u-slices of their tangent cones.  Returns a list of VPoly (possibly
    empty list = empty set)."""
    u = vec(u)
    m = theta.m
    out = []
    seen = set()
    for T in graph_tangent_cones(theta, z, v):
        ineqs = []
        eqs = []
        for a, _ in T.ineqs:
            ineqs.append((a[m:], -dot(a[:m], u)))
        for a, _ in T.eqs:
            eqs.append((a[m:], -dot(a[:m], u)))
        S = HPoly(m, tuple(ineqs), tuple(eqs))
        V = convert_rep(S)
        if V.is_empty():
            continue
        key = (V.points, V.rays, V.lines)
        if key not in seen:
            seen.add(key)
            out.append(V)
    return out


def regular_coderivative(theta: CpwlFunction, z, v, u):
    """Regular coderivative of the subdifferential mapping: the polar of
    the critical cone when -u lies in it, empty otherwise."""
    cone = critical_cone(theta, z, v)
    u = vec(u)
    minus_u = tuple(-x for x in u)
    if not cone.hrep.contains(minus_u):
        return None
    return dual_cone_h(cone.hrep)


# ---------------------------------------------------------------------------
# limiting normal cone of the graph by stratification


@lru_cache(maxsize=None)
def _stratification(theta: CpwlFunction, z: Vec, v: Vec):
    """Distinct regular normal cones of the graph on the cells of the
    subdivision induced by the pieces' tangent cones at (z, v).

    Their union is the limiting normal cone to the subdifferential graph
    at (z, v).  Returned as H-representations in normal coordinates
    (g_z, g_v) in R^{2m}."""
    tcones = graph_tangent_cones(theta, z, v)
    dim = 2 * theta.m

    hyperplanes = []
    seen = set()
    for T in tcones:
        for a, _ in T.ineqs + T.eqs:
            h = primitive(a)
            if any(x != 0 for x in h) and h not in seen:
                seen.add(h)
                hyperplanes.append(h)

    cells = {}

    def explore(idx, sigma, ineqs, eqs):
        if idx == len(hyperplanes):
            key = tuple(sigma)
            if key not in cells:
                res = lp.feasibility(
                    [list(a) for a, _ in ineqs],
                    [b for _, b in ineqs],
                    [list(a) for a, _ in eqs],
                    [b for _, b in eqs],
                    nvars=dim,
                )
                assert res.feasible
                cells[key] = res.witness
            return
        h = hyperplanes[idx]
        # zero branch
        res = lp.feasibility(
            [list(a) for a, _ in ineqs],
            [b for _, b in ineqs],
            [list(a) for a, _ in eqs] + [list(h)],
            [b for _, b in eqs] + [ZERO],
            nvars=dim,
        )
        if res.feasible:
            explore(idx + 1, sigma + [0], ineqs, eqs + [(h, ZERO)])
        # strict branches (cones: normalize strictness to +-1)
        for sign in (1, -1):
            row = tuple(-sign * x for x in h)
            res = lp.feasibility(
                [list(a) for a, _ in ineqs] + [list(row)],
                [b for _, b in ineqs] + [-ONE],
                [list(a) for a, _ in eqs],
                [b for _, b in eqs],
                nvars=dim,
            )
            if res.feasible:
                explore(idx + 1, sigma + [sign], ineqs + [(row, -ONE)], eqs)

    for T in tcones:
        base_ineqs = [(a, ZERO) for a, _ in T.ineqs]
        base_eqs = [(a, ZERO) for a, _ in T.eqs]
        explore(0, [], base_ineqs, base_eqs)

    normal_cones = []
    keys = set()
    for sigma, y in cells.items():
        members = [T for T in tcones if T.contains(y)]
        assert members
        rows_ineq = []
        rows_eq = []
        for T in members:
            polar = dual_cone_h(_tangent_rows_at(T, y))
            Hp = convert_rep_v(polar)
            rows_ineq.extend(Hp.ineqs)
            rows_eq.extend(Hp.eqs)
        N = HPoly(dim, tuple(rows_ineq), tuple(rows_eq))
        VN = convert_rep(N)
        key = (VN.points, VN.rays, VN.lines)
        if key not in keys:
            keys.add(key)
            normal_cones.append(N)
    return tuple(normal_cones)


def limiting_normal_cones(theta: CpwlFunction, z, v):
    return list(_stratification(theta, vec(z), vec(v)))


def limiting_coderivative(theta: CpwlFunction, z, v, u):
    """Limiting coderivative of the subdifferential mapping at (z, v):
    union of slices {w : (w, -u) in N_cell}.  Returns a list of VPoly."""
    u = vec(u)
    m = theta.m
    out = []
    seen = set()
    for N in _stratification(theta, vec(z), vec(v)):
        ineqs = []
        eqs = []
        for a, _ in N.ineqs:
            ineqs.append((a[:m], dot(a[m:], u)))
        for a, _ in N.eqs:
            eqs.append((a[:m], dot(a[m:], u)))
        S = HPoly(m, tuple(ineqs), tuple(eqs))
        V = convert_rep(S)
        if V.is_empty():
            continue
        key = (V.points, V.rays, V.lines)
        if key not in seen:
            seen.add(key)
            out.append(V)
    return out


def in_vpoly_union(pieces, x) -> bool:
    return any(point_in_vpoly(V, x) for V in pieces)
