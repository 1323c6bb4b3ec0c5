"""Critical/noncritical multiplier classification and the second-order
sufficient condition.

A multiplier is critical when the homogeneous primal-dual system

    Jpsi xi + DPhi* eta = 0,  <eta, DPhi xi> = 0,
    DPhi xi in K,             eta in polar(K)

(K the critical cone at (Phi(x), v)) has a solution with xi != 0.  The
bilinear complementarity is linearized exactly by enumerating conjugate
face pairs of K: the pairing <eta, w> = 0 with w in K and eta in polar(K)
holds iff w lies in a face F and eta in polar(K) meet span(F)^perp.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import lp
from .cpwl import CriticalCone, MembershipError, critical_cone, regular_coderivative
from .linalg import symmetric_diagonalize, solve_linear, kernel_basis
from .polyhedra import (
    HPoly,
    VPoly,
    convert_rep,
    convert_rep_v,
    dual_cone_h,
    enumerate_faces,
    project_out,
)
from .rational import ZERO, ONE, Vec, dot, is_zero_vec, vec, vzero
from .varsys import VariationalSystem, multiplier_set, psi_jacobian_x

CRITICAL = "critical"
NONCRITICAL = "noncritical"


@dataclass(frozen=True)
class CriticalityVerdict:
    status: str
    witness: tuple[Vec, Vec] | None = None  # (xi, eta)
    face_active: frozenset[int] | None = None
    face_certificates: tuple = ()  # per face: (active set, per-coordinate Farkas)

    @property
    def is_critical(self) -> bool:
        return self.status == CRITICAL


@dataclass(frozen=True)
class SoscVerdict:
    holds: bool
    violating_direction: Vec | None = None


def _require_multiplier(VS: VariationalSystem, x, v):
    lam = multiplier_set(VS, x)
    if not lam.contains(v):
        raise MembershipError("v is not a Lagrange multiplier at x")
    return lam


def _composed_row(J, row_m, n, m):
    """Row over xi realizing <row_m, DPhi xi>."""
    return tuple(
        sum((row_m[i] * J[i][c] for i in range(m)), ZERO) for c in range(n)
    )


def _pad(row, before, after):
    return (ZERO,) * before + tuple(row) + (ZERO,) * after


def _criticality_system(VS, x, v, cone: CriticalCone, face, Kstar_h: HPoly):
    """Homogeneous rows over (xi, eta) for one conjugate face pair."""
    n, m = VS.n, VS.m
    J = VS.Phi.jacobian_at(vec(x))
    H = psi_jacobian_x(VS, x, v)
    A_eq = []
    A_ub = []
    # Jpsi xi + DPhi* eta = 0
    for r in range(n):
        A_eq.append(tuple(H[r]) + tuple(J[i][r] for i in range(m)))
    K = cone.hrep
    # DPhi xi in the face: carrier equalities tight, remaining rows <= 0
    for a, _ in K.eqs:
        A_eq.append(_pad(_composed_row(J, a, n, m), 0, m))
    for idx, (a, _) in enumerate(K.ineqs):
        row = _pad(_composed_row(J, a, n, m), 0, m)
        if idx in face.active_ineq_indices:
            A_eq.append(row)
        else:
            A_ub.append(row)
    # eta in polar(K) ...
    for a, _ in Kstar_h.ineqs:
        A_ub.append(_pad(a, n, 0))
    for a, _ in Kstar_h.eqs:
        A_eq.append(_pad(a, n, 0))
    # ... orthogonal to the face span (linearized complementarity)
    face_v = convert_rep(face.carrier)
    for g in face_v.rays + face_v.lines:
        A_eq.append(_pad(g, n, 0))
    nvars = n + m
    return (
        A_ub,
        [ZERO] * len(A_ub),
        A_eq,
        [ZERO] * len(A_eq),
        nvars,
    )


def _cone_nonzero_coordinate(A_ub, b_ub, A_eq, b_eq, nvars, coords):
    """First coordinate of `coords` that can be made +-1 inside the cone;
    returns (coord, sign, witness) or (None, certificates)."""
    certs = []
    for j in coords:
        for sign in (1, -1):
            row = [ZERO] * nvars
            row[j] = Fraction(sign)
            res = lp.feasibility(A_ub, b_ub, A_eq + [row], b_eq + [ONE], nvars=nvars)
            if res.feasible:
                return (j, sign, res.witness), certs
            certs.append((j, sign, res.farkas_ineq, res.farkas_eq))
    return None, certs


def verify_criticality_witness(VS, x, v, xi, eta, cone: CriticalCone | None = None):
    """Exact substitution of a witness pair into all four system conditions."""
    x = vec(x)
    xi = vec(xi)
    eta = vec(eta)
    if cone is None:
        z = VS.Phi.eval(x)
        cone = critical_cone(VS.theta, z, v)
    n, m = VS.n, VS.m
    J = VS.Phi.jacobian_at(x)
    H = psi_jacobian_x(VS, x, v)
    lhs = [
        sum((H[r][c] * xi[c] for c in range(n)), ZERO)
        + sum((J[i][r] * eta[i] for i in range(m)), ZERO)
        for r in range(n)
    ]
    if not is_zero_vec(lhs):
        return False
    w = tuple(sum((J[i][c] * xi[c] for c in range(n)), ZERO) for i in range(m))
    if dot(eta, w) != 0:
        return False
    if not cone.hrep.contains(w):
        return False
    Kstar_h = convert_rep_v(dual_cone_h(cone.hrep))
    return Kstar_h.contains(eta)


def classify_multiplier(VS: VariationalSystem, x, v) -> CriticalityVerdict:
    """Face-pair search for a nonzero primal direction; the eta block is
    projected out and the primal cone probed coordinate-wise."""
    _require_multiplier(VS, x, v)
    x = vec(x)
    v = vec(v)
    z = VS.Phi.eval(x)
    cone = critical_cone(VS.theta, z, v)
    Kstar_h = convert_rep_v(dual_cone_h(cone.hrep))
    n, m = VS.n, VS.m
    all_certs = []
    for face in enumerate_faces(cone.hrep):
        A_ub, b_ub, A_eq, b_eq, nvars = _criticality_system(
            VS, x, v, cone, face, Kstar_h
        )
        system = HPoly(nvars, tuple(zip(A_ub, b_ub)), tuple(zip(A_eq, b_eq)))
        xi_cone = project_out(system, set(range(n, nvars)))
        found, certs = _cone_nonzero_coordinate(
            [list(a) for a, _ in xi_cone.ineqs],
            [b for _, b in xi_cone.ineqs],
            [list(a) for a, _ in xi_cone.eqs],
            [b for _, b in xi_cone.eqs],
            n,
            range(n),
        )
        if found:
            j, sign, _ = found
            row = [ZERO] * nvars
            row[j] = Fraction(sign)
            res = lp.feasibility(A_ub, b_ub, A_eq + [row], b_eq + [ONE], nvars=nvars)
            assert res.feasible, "projection witness must lift"
            xi = res.witness[:n]
            eta = res.witness[n:]
            assert verify_criticality_witness(VS, x, v, xi, eta, cone)
            return CriticalityVerdict(
                CRITICAL, witness=(tuple(xi), tuple(eta)),
                face_active=face.active_ineq_indices,
            )
        all_certs.append((face.active_ineq_indices, xi_cone, tuple(certs)))
    return CriticalityVerdict(NONCRITICAL, face_certificates=tuple(all_certs))


def classify_multiplier_coderivative(VS: VariationalSystem, x, v) -> CriticalityVerdict:
    """Same decision through the dual route: enumerate faces of the polar
    cone (the regular-coderivative value) and pair the primal image with
    its conjugate face there."""
    _require_multiplier(VS, x, v)
    x = vec(x)
    v = vec(v)
    z = VS.Phi.eval(x)
    cone = critical_cone(VS.theta, z, v)
    origin = vzero(VS.m)
    Kstar = regular_coderivative(VS.theta, z, v, origin)
    assert Kstar is not None
    Kstar_h = convert_rep_v(Kstar)
    n, m = VS.n, VS.m
    J = VS.Phi.jacobian_at(x)
    H = psi_jacobian_x(VS, x, v)
    all_certs = []
    for face in enumerate_faces(Kstar_h):
        A_eq = []
        A_ub = []
        for r in range(n):
            A_eq.append(tuple(H[r]) + tuple(J[i][r] for i in range(m)))
        # eta in the dual face
        for a, _ in face.carrier.eqs:
            A_eq.append(_pad(a, n, 0))
        for a, _ in face.carrier.ineqs:
            A_ub.append(_pad(a, n, 0))
        # DPhi xi in K and orthogonal to the dual face span
        for a, _ in cone.hrep.eqs:
            A_eq.append(_pad(_composed_row(J, a, n, m), 0, m))
        for a, _ in cone.hrep.ineqs:
            A_ub.append(_pad(_composed_row(J, a, n, m), 0, m))
        face_v = convert_rep(face.carrier)
        for g in face_v.rays + face_v.lines:
            A_eq.append(_pad(_composed_row(J, g, n, m), 0, m))
        nvars = n + m
        b_ub = [ZERO] * len(A_ub)
        b_eq = [ZERO] * len(A_eq)
        found, certs = _cone_nonzero_coordinate(
            A_ub, b_ub, A_eq, b_eq, nvars, range(n)
        )
        if found:
            j, sign, witness = found
            xi = witness[:n]
            eta = witness[n:]
            assert verify_criticality_witness(VS, x, v, xi, eta, cone)
            return CriticalityVerdict(
                CRITICAL,
                witness=(tuple(xi), tuple(eta)),
                face_active=face.active_ineq_indices,
            )
        all_certs.append((face.active_ineq_indices, tuple(certs)))
    return CriticalityVerdict(NONCRITICAL, face_certificates=tuple(all_certs))


# ---------------------------------------------------------------------------
# second-order sufficient condition


def _pullback_cone(VS, x, cone: CriticalCone) -> HPoly:
    """{u : DPhi(x) u in K} as an H-cone in R^n."""
    n, m = VS.n, VS.m
    J = VS.Phi.jacobian_at(vec(x))
    ineqs = [( _composed_row(J, a, n, m), ZERO) for a, _ in cone.hrep.ineqs]
    eqs = [( _composed_row(J, a, n, m), ZERO) for a, _ in cone.hrep.eqs]
    return HPoly(n, tuple(ineqs), tuple(eqs))


def _simplex_min_quadratic(M):
    """Exact minimum of c^T M c over the standard simplex by stationary
    support enumeration; returns (value, argmin)."""
    import itertools

    nr = len(M)
    best = None
    arg = None
    for size in range(1, nr + 1):
        for S in itertools.combinations(range(nr), size):
            rows = []
            rhs = []
            for i in S:
                rows.append([2 * M[i][j] for j in S] + [-ONE])
                rhs.append(ZERO)
            rows.append([ONE] * size + [ZERO])
            rhs.append(ONE)
            sol = solve_linear(rows, rhs)
            if sol is None:
                continue
            c = list(sol[:size])
            if any(ci < 0 for ci in c):
                continue
            full = [ZERO] * nr
            for pos, i in enumerate(S):
                full[i] = c[pos]
            val = sum(
                full[i] * M[i][j] * full[j] for i in range(nr) for j in range(nr)
            )
            if best is None or val < best:
                best = val
                arg = tuple(full)
    assert best is not None  # singleton supports always contribute
    return best, arg


def sosc_check(VS: VariationalSystem, x, v) -> SoscVerdict:
    """Strict positivity of <Jpsi(x,v) u, u> over the pullback of the
    critical cone: positive definiteness on the lineality space plus exact
    strict copositivity on the pointed section (Schur-reduced)."""
    _require_multiplier(VS, x, v)
    x = vec(x)
    v = vec(v)
    z = VS.Phi.eval(x)
    cone = critical_cone(VS.theta, z, v)
    C = _pullback_cone(VS, x, cone)
    n = VS.n
    H = psi_jacobian_x(VS, x, v)
    Q = [
        [(H[i][j] + H[j][i]) / 2 for j in range(n)] for i in range(n)
    ]  # symmetric part carries the quadratic form

    normals = [a for a, _ in C.ineqs] + [a for a, _ in C.eqs]
    lin = kernel_basis(normals, n) if normals else [
        tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)
    ]

    if lin:
        QL = [
            [
                sum(
                    lin[a][i] * Q[i][j] * lin[b][j]
                    for i in range(n)
                    for j in range(n)
                )
                for b in range(len(lin))
            ]
            for a in range(len(lin))
        ]
        S, d = symmetric_diagonalize(QL)
        for k, dk in enumerate(d):
            if dk <= 0:
                u = [ZERO] * n
                for a in range(len(lin)):
                    for i in range(n):
                        u[i] += S[k][a] * lin[a][i]
                assert not is_zero_vec(u)
                return SoscVerdict(False, tuple(u))

    # pointed section: C with the lineality directions pinned to zero
    pinned = HPoly(
        n,
        C.ineqs,
        C.eqs + tuple((l, ZERO) for l in lin),
    )
    V = convert_rep(pinned)
    rays = list(V.rays)
    if not rays:
        return SoscVerdict(True)

    nl = len(lin)
    if nl:
        # eliminate the lineality block: for u = R c + L w the inner
        # minimum over w is the Schur complement against the (PD) block
        Qww = [
            [
                sum(lin[a][i] * Q[i][j] * lin[b][j] for i in range(n) for j in range(n))
                for b in range(nl)
            ]
            for a in range(nl)
        ]
        Qrw = [
            [
                sum(r[i] * Q[i][j] * lin[b][j] for i in range(n) for j in range(n))
                for b in range(nl)
            ]
            for r in rays
        ]
        # solve Qww W = Qrw^T column by column
        Wcols = []
        for ridx in range(len(rays)):
            col = solve_linear(Qww, Qrw[ridx])
            assert col is not None
            Wcols.append(col)
        M = []
        for a, ra in enumerate(rays):
            row = []
            for b, rb in enumerate(rays):
                val = sum(ra[i] * Q[i][j] * rb[j] for i in range(n) for j in range(n))
                val -= sum(Qrw[a][t] * Wcols[b][t] for t in range(nl))
                row.append(val)
            M.append(row)
    else:
        M = [
            [
                sum(ra[i] * Q[i][j] * rb[j] for i in range(n) for j in range(n))
                for rb in rays
            ]
            for ra in rays
        ]

    val, arg = _simplex_min_quadratic(M)
    if val > 0:
        return SoscVerdict(True)
    u = [ZERO] * n
    for c, r in zip(arg, rays):
        for i in range(n):
            u[i] += c * r[i]
    if nl:
        # back-substitute the minimizing lineality component
        wstar = [-sum(arg[b] * Wcols[b][t] for b in range(len(rays))) for t in range(nl)]
        for t in range(nl):
            for i in range(n):
                u[i] += wstar[t] * lin[t][i]
    qval = sum(u[i] * Q[i][j] * u[j] for i in range(n) for j in range(n))
    assert qval <= 0 and not is_zero_vec(u) and C.contains(u)
    return SoscVerdict(False, tuple(u))
