"""Canonical perturbations of the variational system and stability checks.

The perturbed system inserts (p1, p2) as

    Psi(x, v) = p1,    v in subdifferential of theta at (Phi(x) + p2).

solve_perturbed solves it by active-pattern Newton; calmness_probe samples
perturbations and measures the semi-isolated-calmness ratio
(|x_p - xbar| + dist(v_p, Lambda)) / (|p1| + |p2|); the exact checkers
decide isolated calmness, robust isolated calmness and the Lipschitz-like
property from the same polyhedral systems that decide criticality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import lp
from .cpwl import (
    CpwlFunction,
    decompose_subgradient,
    eval_and_active,
    limiting_normal_cones,
    subgradient_member,
)
from .criticality import (
    CriticalityVerdict,
    SoscVerdict,
    _cone_nonzero_coordinate,
    _criticality_system,
    classify_multiplier,
    sosc_check,
)
from .polyhedra import (
    HPoly,
    PolyhedronDistance,
    VPoly,
    convert_rep_v,
    dual_cone_h,
    enumerate_faces,
    point_in_vpoly,
)
from .rational import ZERO, ONE, dot, vec, vsub
from .varsys import (
    CompositeProblem,
    VariationalSystem,
    multiplier_set,
    psi_eval,
    psi_jacobian_x,
)

NEWTON_RESIDUAL_TOL = 1e-10
NEWTON_MAX_ITER = 50
ACCEPT_TOL = 1e-9
DIVERGENCE_RATIO = 1e3
STABILIZATION_FACTOR = 10.0
DEFAULT_RADII = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
DEFAULT_SAMPLES = 64
NEIGHBORHOOD = 0.5

BOUNDED = "bounded"
DIVERGING = "diverging"


@dataclass(frozen=True)
class Perturbation:
    p1: tuple[float, ...]
    p2: tuple[float, ...]

    def norm(self) -> float:
        return float(np.linalg.norm(self.p1) + np.linalg.norm(self.p2))


@dataclass
class PerturbedSolution:
    x: tuple[float, ...]
    v: tuple[float, ...]
    pattern: tuple[frozenset[int], frozenset[int]]
    residual: float


@dataclass
class CalmnessProbeReport:
    radii: list[float]
    empirical_moduli: list[float]          # per radius: max observed ratio
    error_bound_moduli: list[float]        # per radius: max lhs / residual-form
    samples_used: list[int]
    samples_skipped: list[int]
    verdict: str
    modulus: float | None
    stabilized: bool
    witness_path: list[tuple[float, float]] = field(default_factory=list)
    rng_seed: int = 0


# ---------------------------------------------------------------------------
# pattern Newton solver


def _float_pattern_data(VS: VariationalSystem, P, Q):
    a = [np.array([float(c) for c in VS.theta.pieces[i][0]]) for i in P]
    al = [float(VS.theta.pieces[i][1]) for i in P]
    d = [np.array([float(c) for c in VS.theta.domain[i][0]]) for i in Q]
    be = [float(VS.theta.domain[i][1]) for i in Q]
    return a, al, d, be


def _newton_pattern(VS, P, Q, p1, p2, x0, lam0, mu0, tol):
    """Newton on the square pattern system; returns (x, v, residual) or None."""
    n, m = VS.n, VS.m
    Ps, Qs = sorted(P), sorted(Q)
    a, al, d, be = _float_pattern_data(VS, Ps, Qs)
    nl, nm = len(Ps), len(Qs)
    u = np.concatenate([x0, lam0, mu0])

    def assemble(uv):
        x = uv[:n]
        lam = uv[n : n + nl]
        mu = uv[n + nl :]
        v = np.zeros(m)
        for c, ai in zip(lam, a):
            v += c * ai
        for c, di in zip(mu, d):
            v += c * di
        xs = list(x)
        vs = list(v)
        psi = np.array(psi_eval(VS, xs, vs), dtype=float)
        phi = np.array(VS.Phi.eval(xs), dtype=float)
        z = phi + p2
        R = np.zeros(n + 1 + (nl - 1) + nm)
        R[:n] = psi - p1
        R[n] = lam.sum() - 1.0
        for t in range(1, nl):
            R[n + t] = (a[t] - a[0]) @ z - (al[t] - al[0])
        for t in range(nm):
            R[n + nl + t] = d[t] @ z - be[t]
        Jphi = np.array(VS.Phi.jacobian_at(xs), dtype=float)  # m x n
        Jpsi = np.array(psi_jacobian_x(VS, xs, vs), dtype=float)
        J = np.zeros((n + nl + nm, n + nl + nm))
        J[:n, :n] = Jpsi
        for t in range(nl):
            J[:n, n + t] = Jphi.T @ a[t]
        for t in range(nm):
            J[:n, n + nl + t] = Jphi.T @ d[t]
        J[n, n : n + nl] = 1.0
        for t in range(1, nl):
            J[n + t, :n] = (a[t] - a[0]) @ Jphi
        for t in range(nm):
            J[n + nl + t, :n] = d[t] @ Jphi
        return R, J, x, v, z, lam, mu

    R, J, *_ = assemble(u)
    for _ in range(NEWTON_MAX_ITER):
        nr = np.linalg.norm(R)
        if nr <= NEWTON_RESIDUAL_TOL:
            break
        try:
            step = np.linalg.solve(J, -R)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -R, rcond=None)[0]
        if not np.all(np.isfinite(step)):
            return None
        t = 1.0
        for _bt in range(30):
            cand = u + t * step
            Rc, Jc, *_ = assemble(cand)
            if np.linalg.norm(Rc) < nr:
                u, R, J = cand, Rc, Jc
                break
            t *= 0.5
        else:
            return None
    R, J, x, v, z, lam, mu = assemble(u)
    if np.linalg.norm(R) > max(NEWTON_RESIDUAL_TOL, 1e-12):
        return None
    # acceptance: multipliers near-nonnegative, pattern consistent with theta
    if nl and lam.min() < -tol:
        return None
    if nm and mu.min() < -tol:
        return None
    piece_vals = [
        float(np.array([float(c) for c in ai]) @ z) - float(ali)
        for ai, ali in (
            (VS.theta.pieces[i][0], VS.theta.pieces[i][1])
            for i in range(VS.theta.num_pieces)
        )
    ]
    active_val = max(piece_vals[i] for i in Ps)
    if max(piece_vals) > active_val + tol:
        return None
    for i, (drow, brow) in enumerate(VS.theta.domain):
        val = float(np.array([float(c) for c in drow]) @ z) - float(brow)
        if val > tol:
            return None
    return tuple(x), tuple(v), float(np.linalg.norm(R))


def solve_perturbed(VS: VariationalSystem, p: Perturbation, seed, tol=ACCEPT_TOL):
    """All pattern-consistent Newton solutions of the perturbed system near
    the seed point.  Patterns are pruned to supersets of the seed's positive
    supports (graph locality); an empty list is a valid outcome."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    x_bar, v_bar = vec(seed[0]), vec(seed[1])
    z_bar = VS.Phi.eval(x_bar)
    _, act = eval_and_active(VS.theta, z_bar)
    dec = decompose_subgradient(VS.theta, z_bar, v_bar)
    lam_d, mu_d = dec.lam_dict(), dec.mu_dict()
    p1 = np.asarray(p.p1, dtype=float)
    p2 = np.asarray(p.p2, dtype=float)
    x0_base = np.array([float(c) for c in x_bar])
    scale = float(np.sqrt(p.norm())) + 1e-9
    rng = np.random.default_rng(0xC0FFEE)
    solutions = []
    seen = set()
    Ksets = [
        frozenset(S)
        for k in range(len(act.K) + 1)
        for S in itertools.combinations(sorted(act.K), k)
        if dec.J1 <= frozenset(S) and S
    ]
    Isets = [
        frozenset(S)
        for k in range(len(act.I) + 1)
        for S in itertools.combinations(sorted(act.I), k)
        if dec.J2 <= frozenset(S)
    ]
    for P in Ksets:
        for Q in Isets:
            Ps, Qs = sorted(P), sorted(Q)
            lam0_base = np.array([float(lam_d.get(i, ZERO)) for i in Ps])
            if lam0_base.sum() == 0.0:
                lam0_base = np.full(len(Ps), 1.0 / len(Ps))
            mu0_base = np.array([float(mu_d.get(i, ZERO)) for i in Qs])
            jitters = [0.0, 0.1 * scale, 0.1 * scale, scale, scale, 3 * scale]
            for jit in jitters:
                x0 = x0_base + (jit * rng.standard_normal(VS.n) if jit else 0.0)
                lam0 = lam0_base + (
                    jit * rng.standard_normal(len(Ps)) if jit else 0.0
                )
                mu0 = mu0_base + (jit * rng.standard_normal(len(Qs)) if jit else 0.0)
                out = _newton_pattern(VS, P, Q, p1, p2, x0, lam0, mu0, tol)
                if out is None:
                    continue
                x, v, res = out
                key = tuple(round(c, 8) for c in x + v)
                if key in seen:
                    continue
                seen.add(key)
                solutions.append(PerturbedSolution(x, v, (P, Q), res))
                break
    return solutions


# ---------------------------------------------------------------------------
# exact witness path from a criticality certificate


def witness_path_point(VS, x_bar, v_bar, xi, eta, t: Fraction):
    """Exact perturbed solution along the direction of a criticality
    witness: x_t = x + t xi, v_t = v + t eta, with the canonical parameters
    that make it solve the perturbed system exactly.  Returns
    (x_t, v_t, p1, p2) or None when v_t leaves the subdifferential
    (t too large)."""
    x_bar, v_bar, xi, eta = vec(x_bar), vec(v_bar), vec(xi), vec(eta)
    t = Fraction(t)
    x_t = tuple(a + t * b for a, b in zip(x_bar, xi))
    v_t = tuple(a + t * b for a, b in zip(v_bar, eta))
    J = VS.Phi.jacobian_at(x_bar)
    z_bar = VS.Phi.eval(x_bar)
    step = tuple(sum((J[i][c] * xi[c] for c in range(VS.n)), ZERO) for i in range(VS.m))
    z_t = tuple(a + t * b for a, b in zip(z_bar, step))
    val, _ = eval_and_active(VS.theta, z_t)
    if val == float("inf") or not subgradient_member(VS.theta, z_t, v_t):
        return None
    p1 = psi_eval(VS, x_t, v_t)
    p2 = vsub(z_t, VS.Phi.eval(x_t))
    return x_t, v_t, p1, p2


def witness_path_ratios(VS, x_bar, v_bar, xi, eta, ts, lam_dist: PolyhedronDistance):
    """Semi-isolated-calmness ratios along the exact witness path."""
    out = []
    for t in ts:
        t = Fraction(t).limit_denominator(10**12)
        point = witness_path_point(VS, x_bar, v_bar, xi, eta, t)
        shrink = 0
        while point is None and shrink < 8:
            t = t / 2
            point = witness_path_point(VS, x_bar, v_bar, xi, eta, t)
            shrink += 1
        if point is None:
            continue
        x_t, v_t, p1, p2 = point
        lhs = float(
            np.linalg.norm(np.array([float(a - b) for a, b in zip(x_t, x_bar)]))
        ) + lam_dist.distance([float(c) for c in v_t])
        rhs = float(
            np.linalg.norm([float(c) for c in p1])
            + np.linalg.norm([float(c) for c in p2])
        )
        ratio = float("inf") if rhs == 0.0 else lhs / rhs
        out.append((float(t), ratio))
    return out


# ---------------------------------------------------------------------------
# inverse of the subdifferential, for the error-bound residual


def _inverse_patterns(theta: CpwlFunction):
    """Per pattern (P, Q): the subgradient value set in v-space and the
    consistent z-set; their union over patterns is the graph of the
    inverse map."""
    out = []
    T1 = range(theta.num_pieces)
    T2 = range(len(theta.domain))
    for kP in range(1, theta.num_pieces + 1):
        for P in itertools.combinations(T1, kP):
            for kQ in range(len(theta.domain) + 1):
                for Q in itertools.combinations(T2, kQ):
                    S = VPoly.make(
                        theta.m,
                        points=[theta.pieces[i][0] for i in P],
                        rays=[theta.domain[i][0] for i in Q],
                    )
                    s = P[0]
                    a_s, al_s = theta.pieces[s]
                    ineqs = []
                    eqs = []
                    for i in P[1:]:
                        eqs.append(
                            (vsub(theta.pieces[i][0], a_s), theta.pieces[i][1] - al_s)
                        )
                    for j in T1:
                        if j in P:
                            continue
                        eqs_row = vsub(theta.pieces[j][0], a_s)
                        ineqs.append((eqs_row, theta.pieces[j][1] - al_s))
                    for i in T2:
                        if i in Q:
                            eqs.append(theta.domain[i])
                        else:
                            ineqs.append(theta.domain[i])
                    Z = HPoly(theta.m, tuple(ineqs), tuple(eqs))
                    out.append((S, PolyhedronDistance(Z)))
    return out


class SubdiffInverseDistance:
    """dist(z, (subdifferential)^{-1}(v)) by exact pattern decomposition."""

    def __init__(self, theta: CpwlFunction):
        self.patterns = _inverse_patterns(theta)

    def distance(self, z_float, v_float) -> float:
        v_exact = vec([Fraction(float(c)) for c in v_float])
        best = float("inf")
        for S, zdist in self.patterns:
            if not point_in_vpoly(S, v_exact):
                continue
            best = min(best, zdist.distance(z_float))
        return best


# ---------------------------------------------------------------------------
# calmness probe


def calmness_probe(
    VS: VariationalSystem,
    x_bar,
    v_bar,
    radii=DEFAULT_RADII,
    samples_per_radius=DEFAULT_SAMPLES,
    rng_seed=0,
    witness=None,
    witness_ts=(1e-2, 1e-3, 1e-4),
) -> CalmnessProbeReport:
    """Sample canonical perturbations at each radius and record the worst
    semi-isolated-calmness ratio; optionally follow an exact witness path
    whose growing ratio certifies divergence.

    Sampling alone never declares divergence: the diverging verdict
    requires the witness-path lower bound to exceed the fixed threshold.
    """
    if not radii or not all(r > 0 for r in radii):
        raise ValueError("radii must be positive")
    x_bar, v_bar = vec(x_bar), vec(v_bar)
    lam = multiplier_set(VS, x_bar)
    if not lam.contains(v_bar):
        raise ValueError("v_bar is not a multiplier at x_bar")
    lam_dist = PolyhedronDistance(lam.hpoly)
    inv_dist = SubdiffInverseDistance(VS.theta)
    n, m = VS.n, VS.m
    rng = np.random.default_rng(rng_seed)
    x_bar_f = np.array([float(c) for c in x_bar])
    v_bar_f = np.array([float(c) for c in v_bar])

    moduli = []
    eb_moduli = []
    used = []
    skipped = []
    for r in radii:
        worst = 0.0
        worst_eb = 0.0
        nused = 0
        nskip = 0
        for _ in range(samples_per_radius):
            direction = rng.standard_normal(n + m)
            direction /= np.linalg.norm(direction)
            pvec = direction * (r * rng.uniform(0.0, 1.0))
            p = Perturbation(tuple(pvec[:n]), tuple(pvec[n:]))
            sols = [
                s
                for s in solve_perturbed(VS, p, (x_bar, v_bar))
                if np.linalg.norm(np.array(s.x) - x_bar_f)
                + np.linalg.norm(np.array(s.v) - v_bar_f)
                <= NEIGHBORHOOD
            ]
            if not sols:
                nskip += 1
                continue
            nused += 1
            denom = p.norm()
            if denom == 0.0:
                continue
            for s in sols:
                lhs = float(
                    np.linalg.norm(np.array(s.x) - x_bar_f)
                ) + lam_dist.distance(s.v)
                worst = max(worst, lhs / denom)
            # error-bound residual at a sampled nearby non-solution point
            xs = x_bar_f + r * rng.standard_normal(n)
            vs = v_bar_f + r * rng.standard_normal(m)
            lhs = float(np.linalg.norm(xs - x_bar_f)) + lam_dist.distance(vs)
            psi = np.array(psi_eval(VS, list(xs), list(vs)), dtype=float)
            phi = np.array(VS.Phi.eval(list(xs)), dtype=float)
            resid = float(np.linalg.norm(psi)) + inv_dist.distance(phi, vs)
            if resid > 1e-15:
                worst_eb = max(worst_eb, lhs / resid)
        moduli.append(worst)
        eb_moduli.append(worst_eb)
        used.append(nused)
        skipped.append(nskip)

    path = []
    if witness is not None:
        xi, eta = witness
        path = witness_path_ratios(VS, x_bar, v_bar, xi, eta, witness_ts, lam_dist)

    diverging = any(
        t <= 1.0000001e-4 and ratio > DIVERGENCE_RATIO for t, ratio in path
    )
    tail = [v for v in moduli[-3:] if v > 0]
    stabilized = (
        len(tail) == min(3, len(moduli))
        and bool(tail)
        and max(tail) <= STABILIZATION_FACTOR * min(tail)
    )
    if diverging:
        verdict, modulus = DIVERGING, None
    else:
        verdict, modulus = BOUNDED, (max(tail) if tail else 0.0)
    return CalmnessProbeReport(
        list(radii),
        moduli,
        eb_moduli,
        used,
        skipped,
        verdict,
        modulus,
        stabilized,
        path,
        rng_seed,
    )


# ---------------------------------------------------------------------------
# exact stability checkers


def _system_zero_only(VS, x, v) -> bool:
    """Whether the criticality system forces (xi, eta) = (0, 0)."""
    from .cpwl import critical_cone

    x, v = vec(x), vec(v)
    z = VS.Phi.eval(x)
    cone = critical_cone(VS.theta, z, v)
    Kstar_h = convert_rep_v(dual_cone_h(cone.hrep))
    for face in enumerate_faces(cone.hrep):
        A_ub, b_ub, A_eq, b_eq, nvars = _criticality_system(
            VS, x, v, cone, face, Kstar_h
        )
        found, _ = _cone_nonzero_coordinate(
            A_ub, b_ub, A_eq, b_eq, nvars, range(nvars)
        )
        if found:
            return False
    return True


def isolated_calmness_check(VS: VariationalSystem, x, v) -> bool:
    """Isolated calmness of the canonically perturbed solution map at the
    point: the homogeneous system admits only (0, 0) and the multiplier is
    an isolated (hence unique) point of the multiplier polyhedron."""
    lam = multiplier_set(VS, x)
    if not lam.contains(vec(v)):
        from .cpwl import MembershipError

        raise MembershipError("v is not a multiplier at x")
    if not lam.is_singleton():
        return False
    return _system_zero_only(VS, x, v)


@dataclass(frozen=True)
class RobustIsolatedCalmnessVerdict:
    holds: bool
    sosc: SoscVerdict
    multiplier_singleton: bool

    @property
    def failed_clause(self) -> str | None:
        if self.holds:
            return None
        if not self.sosc.holds:
            return "sosc"
        return "multiplier-singleton"


def robust_isolated_calmness_check(CP: CompositeProblem, x, v) -> RobustIsolatedCalmnessVerdict:
    """Second-order characterization: the sufficient condition holds and
    the multiplier set is a singleton."""
    VS = CP.system
    s = sosc_check(VS, x, v)
    singleton = multiplier_set(VS, x).is_singleton()
    return RobustIsolatedCalmnessVerdict(s.holds and singleton, s, singleton)


def lipschitz_like_check(CP: CompositeProblem, x, v) -> bool:
    """Coderivative criterion for the Lipschitz-like property of the
    canonically perturbed KKT solution map: no nonzero (xi, eta) with
    Hessian stationarity and (eta, -DPhi xi) in a limiting normal cone of
    the subdifferential graph."""
    VS = CP.system
    x, v = vec(x), vec(v)
    lam = multiplier_set(VS, x)
    if not lam.contains(v):
        from .cpwl import MembershipError

        raise MembershipError("v is not a multiplier at x")
    n, m = VS.n, VS.m
    z = VS.Phi.eval(x)
    J = VS.Phi.jacobian_at(x)
    H = psi_jacobian_x(VS, x, v)
    for N in limiting_normal_cones(VS.theta, z, v):
        A_eq = []
        A_ub = []
        for r in range(n):
            A_eq.append(tuple(H[r]) + tuple(J[i][r] for i in range(m)))

        def comb_row(a):
            # row over (xi, eta) for <a_z, eta> + <a_v, -DPhi xi>
            a_z, a_v = a[:m], a[m:]
            xi_part = tuple(
                -sum((a_v[i] * J[i][c] for i in range(m)), ZERO) for c in range(n)
            )
            return xi_part + tuple(a_z)

        for a, _ in N.ineqs:
            A_ub.append(comb_row(a))
        for a, _ in N.eqs:
            A_eq.append(comb_row(a))
        nvars = n + m
        found, _ = _cone_nonzero_coordinate(
            A_ub,
            [ZERO] * len(A_ub),
            A_eq,
            [ZERO] * len(A_eq),
            nvars,
            range(nvars),
        )
        if found:
            return False
    return True


@dataclass(frozen=True)
class SemiIsolatedSummary:
    isolated_calmness: bool
    criticality: str
    probe_verdict: str
    chain_consistent: bool

    def line(self) -> str:
        return (
            f"isolated_calmness={str(self.isolated_calmness).lower()} "
            f"criticality={self.criticality} probe={self.probe_verdict} "
            f"chain={'ok' if self.chain_consistent else 'VIOLATED'}"
        )


def semi_isolated_summary(
    VS: VariationalSystem,
    x,
    v,
    radii=DEFAULT_RADII,
    samples_per_radius=16,
    rng_seed=0,
) -> SemiIsolatedSummary:
    """Ordered verdict triple (isolated calmness, criticality, probe)
    with the implication chain asserted on it."""
    iso = isolated_calmness_check(VS, x, v)
    verdict = classify_multiplier(VS, x, v)
    probe = calmness_probe(
        VS,
        x,
        v,
        radii=radii,
        samples_per_radius=samples_per_radius,
        rng_seed=rng_seed,
        witness=verdict.witness if verdict.is_critical else None,
    )
    chain = True
    if iso and verdict.is_critical:
        chain = False
    if verdict.is_critical and probe.verdict != DIVERGING:
        chain = False
    return SemiIsolatedSummary(iso, verdict.status, probe.verdict, chain)
