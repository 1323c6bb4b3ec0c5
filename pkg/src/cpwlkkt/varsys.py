"""Variational systems f(x) + DPhi(x)* v = 0, v in the subdifferential of
theta at Phi(x), together with multiplier sets and first-order
qualification and nondegeneracy checks."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .cpwl import CpwlFunction, DomainError, eval_and_active, in_domain, subdifferentials, subgradient_member
from .linalg import intersect_spans, kernel_basis, rank, span_basis
from .polyhedra import HPoly, VPoly, convert_rep, convert_rep_v, lp_feasible
from .polynomials import PolyExpr, PolyMap
from .rational import ZERO, Vec, dot, is_zero_vec, mat_t, vec, vsub
from . import lp


@dataclass(frozen=True)
class VariationalSystem:
    """Data (f, Phi, theta) with f: R^n -> R^n and Phi: R^n -> R^m."""

    n: int
    m: int
    f: PolyMap
    Phi: PolyMap
    theta: CpwlFunction

    @staticmethod
    def make(f: PolyMap, Phi: PolyMap, theta: CpwlFunction) -> "VariationalSystem":
        n = f.nvars
        if f.ncomps != n:
            raise ValueError("f must map R^n to R^n")
        if Phi.nvars != n:
            raise ValueError("Phi arity mismatch")
        if Phi.ncomps != theta.m:
            raise ValueError("Phi range dimension must match theta")
        return VariationalSystem(n, theta.m, f, Phi, theta)


@dataclass(frozen=True)
class CompositeProblem:
    """minimize phi0(x) + theta(Phi(x)); the induced variational system
    uses f = grad phi0, so the first map is the Lagrangian x-gradient."""

    phi0: PolyExpr
    Phi: PolyMap
    theta: CpwlFunction

    @property
    def system(self) -> VariationalSystem:
        f = PolyMap.make(self.phi0.gradient())
        return VariationalSystem.make(f, self.Phi, self.theta)


@dataclass(frozen=True)
class PrimalDualPoint:
    x: Vec
    v: Vec
    z: Vec
    in_domain: bool
    subgradient_ok: bool
    psi_zero: bool

    @staticmethod
    def make(VS: VariationalSystem, x, v) -> "PrimalDualPoint":
        x = vec(x)
        v = vec(v)
        z = VS.Phi.eval(x)
        dom_ok = in_domain(VS.theta, z)
        sub_ok = dom_ok and subgradient_member(VS.theta, z, v)
        psi = psi_eval(VS, x, v)
        return PrimalDualPoint(x, v, z, dom_ok, sub_ok, is_zero_vec(psi))


@dataclass(frozen=True)
class LagrangeSet:
    """Multiplier polyhedron {v : DPhi(x)* v = -f(x)} meet the
    subdifferential at Phi(x)."""

    hpoly: HPoly
    vertices: VPoly

    def is_empty(self) -> bool:
        return self.vertices.is_empty()

    def is_singleton(self) -> bool:
        return (
            len(self.vertices.points) == 1
            and not self.vertices.rays
            and not self.vertices.lines
        )

    def contains(self, v) -> bool:
        return self.hpoly.contains(vec(v))


def psi_eval(VS: VariationalSystem, x, v):
    """f(x) + DPhi(x)* v, exact on rational input."""
    x = list(x)
    fv = VS.f.eval(x)
    J = VS.Phi.jacobian_at(x)
    n = VS.n
    out = []
    for k in range(n):
        s = fv[k]
        for i in range(VS.m):
            s = s + J[i][k] * v[i]
        out.append(s)
    return tuple(out)


def psi_jacobian_x(VS: VariationalSystem, x, v):
    """Df(x) + sum_i v_i D^2 Phi_i(x): for composite problems this is the
    Lagrangian Hessian in x."""
    x = list(x)
    Jf = VS.f.jacobian_at(x)
    H = VS.Phi.hessians_at(x)
    n = VS.n
    rows = []
    for r in range(n):
        row = []
        for c in range(n):
            s = Jf[r][c]
            for i in range(VS.m):
                s = s + v[i] * H[i][r][c]
            row.append(s)
        rows.append(tuple(row))
    return tuple(rows)


def phi_jacobian(VS: VariationalSystem, x):
    return VS.Phi.jacobian_at(list(x))


def multiplier_set(VS: VariationalSystem, x) -> LagrangeSet:
    """Exact multiplier polyhedron at x; may be empty."""
    x = vec(x)
    z = VS.Phi.eval(x)
    if not in_domain(VS.theta, z):
        raise DomainError("Phi(x) outside dom theta")
    basic, _ = subdifferentials(VS.theta, z)
    sub_h = convert_rep_v(basic)
    J = VS.Phi.jacobian_at(x)  # m x n
    fx = VS.f.eval(x)
    eqs = []
    for k in range(VS.n):
        eqs.append((tuple(J[i][k] for i in range(VS.m)), -fx[k]))
    H = HPoly(VS.m, sub_h.ineqs, sub_h.eqs + tuple(eqs))
    return LagrangeSet(H, convert_rep(H))


def check_stationarity(VS: VariationalSystem, x) -> bool:
    """Nonemptiness of the multiplier set (which implies the first-order
    stationarity inclusion)."""
    try:
        lam = multiplier_set(VS, x)
    except DomainError:
        return False
    return not lam.is_empty()


def phi_adjoint_kernel(VS: VariationalSystem, x):
    """Basis of {y : DPhi(x)* y = 0}."""
    J = VS.Phi.jacobian_at(vec(x))  # rows = gradients of Phi_i
    rows = [tuple(J[i][k] for i in range(VS.m)) for k in range(VS.n)]
    return kernel_basis(rows, VS.m)


def nondegeneracy_check(VS: VariationalSystem, x, z=None):
    """Transversality of the subdifferential's affine hull and the kernel
    of the adjoint Jacobian: their direction spaces meet only at 0.

    Returns (holds, intersection_basis).
    """
    x = vec(x)
    if z is None:
        z = VS.Phi.eval(x)
    basic, _ = subdifferentials(VS.theta, z)
    p0 = basic.points[0]
    dirs = span_basis(
        [vsub(p, p0) for p in basic.points[1:]]
        + list(basic.rays)
        + list(basic.lines)
    )
    ker = phi_adjoint_kernel(VS, x)
    inter = intersect_spans(dirs, ker, VS.m)
    return (not inter), inter


def rcq_check(VS: VariationalSystem, x) -> bool:
    """Qualification: the singular subdifferential meets the kernel of the
    adjoint Jacobian only at the origin (exact conic LP test)."""
    x = vec(x)
    z = VS.Phi.eval(x)
    if not in_domain(VS.theta, z):
        raise DomainError("Phi(x) outside dom theta")
    _, act = eval_and_active(VS.theta, z)
    normals = [VS.theta.domain[i][0] for i in sorted(act.I)]
    if not normals:
        return True
    ker = phi_adjoint_kernel(VS, x)
    if not ker:
        return True
    # y = sum mu_i d_i, mu >= 0, y in span(ker), y != 0
    m = VS.m
    nmu = len(normals)
    nker = len(ker)
    nvars = nmu + nker
    A_eq = []
    b_eq = []
    for k in range(m):
        A_eq.append([d[k] for d in normals] + [-b[k] for b in ker])
        b_eq.append(ZERO)
    A_ub = []
    b_ub = []
    for j in range(nmu):
        row = [ZERO] * nvars
        row[j] = -Fraction(1)
        A_ub.append(row)
        b_ub.append(ZERO)
    # nonzero detection coordinate-wise on y with +-1 normalization
    for k in range(m):
        for sign in (1, -1):
            row = [sign * d[k] for d in normals] + [ZERO] * nker
            res = lp.feasibility(
                A_ub, b_ub, A_eq + [row], b_eq + [Fraction(1)], nvars=nvars
            )
            if res.feasible:
                return False
    return True
