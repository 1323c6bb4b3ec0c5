"""Exact polyhedral computation: H/V representations, duality, faces,
Fourier-Motzkin projection and Euclidean distance.

Conventions:
  * HPoly rows mean <normal, x> <= rhs (ineqs) and <normal, x> = rhs (eqs).
  * A cone is an HPoly with all right-hand sides zero, or a VPoly whose only
    point is the origin.
  * dual/polar of a cone C is {y : <y, x> <= 0 for all x in C}.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import lp
from .linalg import kernel_basis, rank, rref, solve_linear, span_basis
from .rational import (
    ZERO,
    ONE,
    Vec,
    dot,
    is_zero_vec,
    primitive,
    primitive_signed,
    vec,
    vzero,
)

Row = tuple[Vec, Fraction]


@dataclass(frozen=True)
class HPoly:
    """Polyhedron {x : <a,x> <= b for (a,b) in ineqs, <a,x> = b for eqs}."""

    dim: int
    ineqs: tuple[Row, ...] = ()
    eqs: tuple[Row, ...] = ()

    @staticmethod
    def make(dim, ineqs=(), eqs=()) -> "HPoly":
        def conv(rows):
            return tuple((vec(a), Fraction(b)) for a, b in rows)

        P = HPoly(dim, conv(ineqs), conv(eqs))
        for a, _ in P.ineqs + P.eqs:
            if len(a) != dim:
                raise ValueError("row dimension mismatch")
        return P

    def is_cone(self) -> bool:
        return all(b == 0 for _, b in self.ineqs + self.eqs)

    def contains(self, x) -> bool:
        x = vec(x)
        return all(dot(a, x) <= b for a, b in self.ineqs) and all(
            dot(a, x) == b for a, b in self.eqs
        )

    def intersect(self, other: "HPoly") -> "HPoly":
        assert self.dim == other.dim
        return HPoly(self.dim, self.ineqs + other.ineqs, self.eqs + other.eqs)

    def with_rows(self, ineqs=(), eqs=()) -> "HPoly":
        extra = HPoly.make(self.dim, ineqs, eqs)
        return self.intersect(extra)


@dataclass(frozen=True)
class VPoly:
    """Set co(points) + cone(rays) + span(lines); empty iff no points."""

    dim: int
    points: tuple[Vec, ...] = ()
    rays: tuple[Vec, ...] = ()
    lines: tuple[Vec, ...] = ()

    @staticmethod
    def make(dim, points=(), rays=(), lines=()) -> "VPoly":
        return VPoly(
            dim,
            tuple(vec(p) for p in points),
            tuple(vec(r) for r in rays),
            tuple(vec(l) for l in lines),
        )

    @staticmethod
    def cone(dim, rays=(), lines=()) -> "VPoly":
        return VPoly.make(dim, points=[vzero(dim)], rays=rays, lines=lines)

    def is_empty(self) -> bool:
        return not self.points

    def is_cone(self) -> bool:
        return len(self.points) == 1 and is_zero_vec(self.points[0])

    def generators(self):
        return self.points + self.rays + self.lines


@dataclass(frozen=True)
class Face:
    """Face of an HPoly, identified by the full set of tight inequality rows."""

    active_ineq_indices: frozenset[int]
    carrier: HPoly


def lp_feasible(P: HPoly) -> lp.FeasibilityResult:
    """Exact emptiness test with witness / Farkas certificate."""
    A_ub = [a for a, _ in P.ineqs]
    b_ub = [b for _, b in P.ineqs]
    A_eq = [a for a, _ in P.eqs]
    b_eq = [b for _, b in P.eqs]
    return lp.feasibility(A_ub, b_ub, A_eq, b_eq, nvars=P.dim)


def maximize(P: HPoly, c) -> lp.LPResult:
    return lp.solve_lp(
        vec(c),
        [a for a, _ in P.ineqs],
        [b for _, b in P.ineqs],
        [a for a, _ in P.eqs],
        [b for _, b in P.eqs],
        maximize=True,
    )


def minimize(P: HPoly, c) -> lp.LPResult:
    return lp.solve_lp(
        vec(c),
        [a for a, _ in P.ineqs],
        [b for _, b in P.ineqs],
        [a for a, _ in P.eqs],
        [b for _, b in P.eqs],
    )


def linear_kernel(A) -> list[Vec]:
    """Basis of {u : A u = 0} for a rational matrix given as rows."""
    A = [vec(r) for r in A]
    if not A:
        raise ValueError("empty matrix")
    return kernel_basis(A, len(A[0]))


def point_in_vpoly(V: VPoly, x) -> bool:
    """Exact membership of a point in co(points)+cone(rays)+span(lines)."""
    x = vec(x)
    np_, nr, nl = len(V.points), len(V.rays), len(V.lines)
    if np_ == 0:
        return False
    nvars = np_ + nr + nl
    A_eq = []
    b_eq = []
    for k in range(V.dim):
        A_eq.append(
            [p[k] for p in V.points]
            + [r[k] for r in V.rays]
            + [l[k] for l in V.lines]
        )
        b_eq.append(x[k])
    A_eq.append([ONE] * np_ + [ZERO] * (nr + nl))
    b_eq.append(ONE)
    A_ub = []
    b_ub = []
    for j in range(np_ + nr):
        row = [ZERO] * nvars
        row[j] = -ONE
        A_ub.append(row)
        b_ub.append(ZERO)
    return lp.feasibility(A_ub, b_ub, A_eq, b_eq, nvars=nvars).feasible


def v_subset_h(V: VPoly, P: HPoly) -> bool:
    """Exact test co(points)+cone(rays)+span(lines) subset of P."""
    for p in V.points:
        if not P.contains(p):
            return False
    for r in V.rays:
        if any(dot(a, r) > 0 for a, _ in P.ineqs) or any(
            dot(a, r) != 0 for a, _ in P.eqs
        ):
            return False
    for l in V.lines:
        if any(dot(a, l) != 0 for a, _ in P.ineqs + P.eqs):
            return False
    return True


def dual_cone(C: VPoly) -> HPoly:
    """Polar {y : <y,x> <= 0 on C} of a V-represented cone."""
    if not C.is_cone():
        raise ValueError("dual_cone expects a cone (single point at the origin)")
    ineqs = [(r, ZERO) for r in C.rays]
    eqs = [(l, ZERO) for l in C.lines]
    return HPoly(C.dim, tuple(ineqs), tuple(eqs))


def dual_cone_h(C: HPoly) -> VPoly:
    """Polar of an H-represented cone: cone of the inequality normals plus
    the span of the equality normals (Farkas)."""
    if not C.is_cone():
        raise ValueError("dual_cone_h expects a cone (zero right-hand sides)")
    rays = [primitive_signed(a) for a, _ in C.ineqs if not is_zero_vec(a)]
    lines = [primitive(a) for a, _ in C.eqs if not is_zero_vec(a)]
    seen = set()
    rays = [r for r in rays if not (r in seen or seen.add(r))]
    seen = set()
    lines = [l for l in lines if not (l in seen or seen.add(l))]
    return VPoly.cone(C.dim, rays=rays, lines=lines)


def nonneg_dual_cone(C: VPoly) -> HPoly:
    """{y : <y,x> >= 0 on C}, i.e. the polar of -C."""
    if not C.is_cone():
        raise ValueError("expects a cone")
    ineqs = [(tuple(-x for x in r), ZERO) for r in C.rays]
    eqs = [(l, ZERO) for l in C.lines]
    return HPoly(C.dim, tuple(ineqs), tuple(eqs))


# ---------------------------------------------------------------------------
# representation conversion


def convert_rep(P: HPoly) -> VPoly:
    """H -> V conversion by exhaustive basis enumeration.

    Returns the empty VPoly (no points) when P is empty.
    """
    d = P.dim
    if not lp_feasible(P).feasible:
        return VPoly(d)
    normals = [a for a, _ in P.ineqs] + [a for a, _ in P.eqs]
    lines = kernel_basis(normals, d) if normals else [
        tuple(ONE if i == j else ZERO for j in range(d)) for i in range(d)
    ]
    # pointed part: kill the lineality directions
    eqs0 = list(P.eqs) + [(l, ZERO) for l in lines]
    base_rows = [a for a, _ in eqs0]
    base_rank = rank(base_rows) if base_rows else 0
    need = d - base_rank

    points = set()
    m = len(P.ineqs)
    for S in itertools.combinations(range(m), need):
        rows = base_rows + [P.ineqs[i][0] for i in S]
        rhs = [b for _, b in eqs0] + [P.ineqs[i][1] for i in S]
        if rank(rows) < d:
            continue
        x = solve_linear(rows, rhs)
        if x is None:
            continue
        if all(dot(a, x) <= b for a, b in P.ineqs):
            points.add(tuple(x))

    rays = set()
    if need >= 1:
        for S in itertools.combinations(range(m), need - 1):
            rows = base_rows + [P.ineqs[i][0] for i in S]
            ker = kernel_basis(rows, d) if rows else [
                tuple(ONE if i == j else ZERO for j in range(d)) for i in range(d)
            ]
            if len(ker) != 1:
                continue
            r = ker[0]
            for cand in (r, tuple(-x for x in r)):
                if all(dot(a, cand) <= 0 for a, _ in P.ineqs):
                    rays.add(primitive_signed(cand))

    assert points, "a nonempty pointed polyhedron has a vertex"
    return VPoly(
        d,
        tuple(sorted(points)),
        tuple(sorted(rays)),
        tuple(sorted(primitive(l) for l in lines)),
    )


def convert_rep_v(V: VPoly) -> HPoly:
    """V -> H conversion by projecting out the hull multipliers."""
    d = V.dim
    if V.is_empty():
        return HPoly(d, ((vzero(d), -ONE),), ())  # 0 <= -1: canonical empty set
    np_, nr, nl = len(V.points), len(V.rays), len(V.lines)
    nvars = d + np_ + nr + nl
    eqs = []
    for k in range(d):
        row = [ZERO] * nvars
        row[k] = ONE
        for j, p in enumerate(V.points):
            row[d + j] = -p[k]
        for j, r in enumerate(V.rays):
            row[d + np_ + j] = -r[k]
        for j, l in enumerate(V.lines):
            row[d + np_ + nr + j] = -l[k]
        eqs.append((tuple(row), ZERO))
    srow = [ZERO] * nvars
    for j in range(np_):
        srow[d + j] = ONE
    eqs.append((tuple(srow), ONE))
    ineqs = []
    for j in range(np_ + nr):
        row = [ZERO] * nvars
        row[d + j] = -ONE
        ineqs.append((tuple(row), ZERO))
    lifted = HPoly(nvars, tuple(ineqs), tuple(eqs))
    return project_out(lifted, set(range(d, nvars)))


# ---------------------------------------------------------------------------
# Fourier-Motzkin projection


def _canonical_ineq(a, b):
    from math import gcd

    L = 1
    for x in list(a) + [b]:
        L = L * x.denominator // gcd(L, x.denominator)
    ints = [int(x * L) for x in a] + [int(b * L)]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g:
        ints = [v // g for v in ints]
    return tuple(Fraction(v) for v in ints[:-1]), Fraction(ints[-1])


def _dedupe_rows(rows):
    out = []
    seen = set()
    for a, b in rows:
        if is_zero_vec(a):
            if b >= 0:
                continue  # trivially true
            a, b = vzero(len(a)), -ONE  # canonical infeasible marker
        key = _canonical_ineq(a, b)
        if key not in seen:
            seen.add(key)
            out.append(key)
    return out


def project_out(P: HPoly, coords) -> HPoly:
    """Exact elimination of the given coordinates (Fourier-Motzkin with
    Gaussian substitution on equalities); output keeps the original indexing
    for the surviving coordinates and drops the eliminated ones.

    Redundant rows are removed from the result.
    """
    coords = sorted(set(coords))
    if any(c < 0 or c >= P.dim for c in coords):
        raise ValueError("coordinate out of range")
    ineqs = [(list(a), b) for a, b in P.ineqs]
    eqs = [(list(a), b) for a, b in P.eqs]

    for v in coords:
        piv = next((i for i, (a, _) in enumerate(eqs) if a[v] != 0), None)
        if piv is not None:
            pa, pb = eqs.pop(piv)
            inv = ONE / pa[v]
            pa = [x * inv for x in pa]
            pb = pb * inv
            for rows in (ineqs, eqs):
                for i, (a, b) in enumerate(rows):
                    f = a[v]
                    if f != 0:
                        rows[i] = ([x - f * y for x, y in zip(a, pa)], b - f * pb)
            continue
        pos = [(a, b) for a, b in ineqs if a[v] > 0]
        neg = [(a, b) for a, b in ineqs if a[v] < 0]
        zero = [(a, b) for a, b in ineqs if a[v] == 0]
        new = []
        for ap, bp in pos:
            for an, bn in neg:
                f = ap[v] / (-an[v])
                a = [x + f * y for x, y in zip(ap, an)]
                b = bp + f * bn
                new.append((a, b))
        ineqs = zero + new
        ineqs = [(list(a), b) for a, b in _dedupe_rows([(tuple(a), b) for a, b in ineqs])]

    keep = [k for k in range(P.dim) if k not in coords]
    proj_ineqs = _dedupe_rows([(tuple(a[k] for k in keep), b) for a, b in ineqs])
    proj_eqs = _dedupe_rows([(tuple(a[k] for k in keep), b) for a, b in eqs])
    # equalities reduce exactly by elimination
    Q = HPoly(len(keep), tuple(proj_ineqs), tuple(proj_eqs))
    return remove_redundant(Q)


def remove_redundant(P: HPoly) -> HPoly:
    """Drop inequality rows implied by the others (exact LP per row) and
    reduce the equality system."""
    if P.eqs:
        aug = [tuple(a) + (b,) for a, b in P.eqs]
        red, _ = rref(aug, P.dim + 1)
        eqs = []
        for row in red:
            a, b = row[: P.dim], row[P.dim]
            if is_zero_vec(a):
                if b != 0:
                    return HPoly(P.dim, ((vzero(P.dim), -ONE),), ())
                continue
            eqs.append((tuple(a), b))
        eqs = tuple(eqs)
    else:
        eqs = ()
    ineqs = list(_dedupe_rows(P.ineqs))
    i = 0
    while i < len(ineqs):
        a, b = ineqs[i]
        rest = ineqs[:i] + ineqs[i + 1 :]
        res = lp.solve_lp(
            a,
            [r[0] for r in rest],
            [r[1] for r in rest],
            [e[0] for e in eqs],
            [e[1] for e in eqs],
            maximize=True,
        )
        if res.status == lp.OPTIMAL and res.value <= b:
            ineqs = rest
        elif res.status == lp.INFEASIBLE:
            ineqs = rest  # system empty without this row; row is immaterial
        else:
            i += 1
    return HPoly(P.dim, tuple(ineqs), eqs)


# ---------------------------------------------------------------------------
# faces


def _forced_tight(P: HPoly, idx: int) -> bool:
    """Whether inequality row idx holds with equality on all of P."""
    a, b = P.ineqs[idx]
    res = minimize(P, a)
    return res.status == lp.OPTIMAL and res.value == b


def _active_closure(P: HPoly, S: frozenset[int]):
    """Carrier of the face with rows S tightened, plus the full implied
    active set; returns (active, carrier) or None if the face is empty."""
    carrier = HPoly(
        P.dim,
        tuple(r for i, r in enumerate(P.ineqs) if i not in S),
        P.eqs + tuple(P.ineqs[i] for i in S),
    )
    if not lp_feasible(carrier).feasible:
        return None
    active = set(S)
    for i in range(len(P.ineqs)):
        if i not in active and _forced_tight(carrier, _reindex(P, S, i)):
            active.add(i)
    if active != S:
        carrier = HPoly(
            P.dim,
            tuple(r for i, r in enumerate(P.ineqs) if i not in active),
            P.eqs + tuple(P.ineqs[i] for i in sorted(active)),
        )
    return frozenset(active), carrier


def _reindex(P, S, i):
    # position of original ineq row i inside the carrier built from S
    pos = 0
    for j in range(len(P.ineqs)):
        if j in S:
            continue
        if j == i:
            return pos
        pos += 1
    raise AssertionError


def enumerate_faces(P: HPoly) -> list[Face]:
    """All nonempty faces of P, each with its maximal tight-row index set.

    Includes P itself; for a cone this also yields its lineality space as
    the smallest face.
    """
    start = _active_closure(P, frozenset())
    if start is None:
        return []
    faces = {}
    queue = [start]
    while queue:
        active, carrier = queue.pop()
        if active in faces:
            continue
        faces[active] = carrier
        for i in range(len(P.ineqs)):
            if i in active:
                continue
            nxt = _active_closure(P, active | {i})
            if nxt is not None and nxt[0] not in faces:
                queue.append(nxt)
    return [Face(k, v) for k, v in sorted(faces.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))]


# ---------------------------------------------------------------------------
# set equality / containment


def h_subset(P: HPoly, Q: HPoly) -> bool:
    return v_subset_h(convert_rep(P), Q)


def h_equal(P: HPoly, Q: HPoly) -> bool:
    """Exact set equality of two H-polyhedra via mutual V/H membership."""
    VP, VQ = convert_rep(P), convert_rep(Q)
    if VP.is_empty() or VQ.is_empty():
        return VP.is_empty() and VQ.is_empty()
    return v_subset_h(VP, Q) and v_subset_h(VQ, P)


# ---------------------------------------------------------------------------
# distance


class PolyhedronDistance:
    """Euclidean distance to a fixed polyhedron via exact face enumeration
    and per-face least-squares projection (faces cached across queries)."""

    def __init__(self, P: HPoly):
        self.P = P
        self.empty = not lp_feasible(P).feasible
        self._faces = None

    def _prepare(self):
        faces = enumerate_faces(self.P)
        data = []
        for f in faces:
            eqs = f.carrier.eqs
            if eqs:
                A = [list(map(float, a)) for a, _ in eqs]
                b = [float(bb) for _, bb in eqs]
                arows = [a for a, _ in eqs]
                brhs = [bb for _, bb in eqs]
                x0 = solve_linear(arows, brhs)
                if x0 is None:
                    continue
                ker = kernel_basis(arows, self.P.dim)
            else:
                x0 = vzero(self.P.dim)
                ker = [
                    tuple(ONE if i == j else ZERO for j in range(self.P.dim))
                    for i in range(self.P.dim)
                ]
            x0f = np.array([float(v) for v in x0])
            if ker:
                B = np.array([[float(v) for v in k] for k in ker]).T
                Q, _ = np.linalg.qr(B)
            else:
                Q = np.zeros((self.P.dim, 0))
            data.append((x0f, Q))
        self._faces = data

    def distance(self, z) -> float:
        if self.empty:
            return float("inf")
        if self._faces is None:
            self._prepare()
        z = np.asarray([float(v) for v in z], dtype=float)
        scale = 1.0 + float(np.linalg.norm(z))
        ineqA = np.array(
            [[float(v) for v in a] for a, _ in self.P.ineqs], dtype=float
        ).reshape(len(self.P.ineqs), self.P.dim)
        ineqb = np.array([float(b) for _, b in self.P.ineqs], dtype=float)
        eqA = np.array(
            [[float(v) for v in a] for a, _ in self.P.eqs], dtype=float
        ).reshape(len(self.P.eqs), self.P.dim)
        eqb = np.array([float(b) for _, b in self.P.eqs], dtype=float)
        best = float("inf")
        for x0, Q in self._faces:
            p = x0 + Q @ (Q.T @ (z - x0)) if Q.shape[1] else x0
            tol = 1e-9 * scale
            if len(ineqb) and np.any(ineqA @ p - ineqb > tol):
                continue
            if len(eqb) and np.any(np.abs(eqA @ p - eqb) > tol):
                continue
            best = min(best, float(np.linalg.norm(z - p)))
        return best


def distance_point_polyhedron(z, P: HPoly) -> float:
    """One-shot Euclidean distance from a float point to P (+inf if empty)."""
    return PolyhedronDistance(P).distance(z)
