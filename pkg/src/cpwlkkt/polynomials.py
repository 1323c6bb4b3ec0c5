"""Exact multivariate polynomial calculus (values, Jacobians, Hessians).

Polynomials are canonical monomial sums with Fraction coefficients.
Evaluation is exact on rational inputs and IEEE double on float inputs;
derivatives are symbolic and therefore exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .rational import ZERO, ONE, rat


@dataclass(frozen=True)
class PolyExpr:
    """Polynomial sum of coeff * prod(x_i^e_i) in canonical form."""

    nvars: int
    monomials: tuple[tuple[tuple[int, ...], Fraction], ...]

    @staticmethod
    def from_terms(nvars, terms) -> "PolyExpr":
        """terms: iterable of (coeff, exponents). Collects duplicates."""
        acc: dict[tuple[int, ...], Fraction] = {}
        for coeff, exps in terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars:
                raise ValueError("exponent arity mismatch")
            if any(e < 0 for e in exps):
                raise ValueError("negative exponent")
            c = rat(coeff)
            acc[exps] = acc.get(exps, ZERO) + c
        monos = tuple(sorted((e, c) for e, c in acc.items() if c != 0))
        return PolyExpr(nvars, monos)

    @staticmethod
    def constant(nvars, c) -> "PolyExpr":
        return PolyExpr.from_terms(nvars, [(rat(c), (0,) * nvars)])

    @staticmethod
    def variable(nvars, i) -> "PolyExpr":
        e = [0] * nvars
        e[i] = 1
        return PolyExpr.from_terms(nvars, [(ONE, tuple(e))])

    def eval(self, x):
        if len(x) != self.nvars:
            raise ValueError("arity mismatch")
        exact = all(isinstance(v, (Fraction, int)) for v in x)
        total = ZERO if exact else 0.0
        for exps, c in self.monomials:
            term = c if exact else float(c)
            for v, e in zip(x, exps):
                if e:
                    term *= v**e
            total += term
        return total

    def diff(self, i) -> "PolyExpr":
        terms = []
        for exps, c in self.monomials:
            e = exps[i]
            if e:
                ne = list(exps)
                ne[i] = e - 1
                terms.append((c * e, tuple(ne)))
        return PolyExpr.from_terms(self.nvars, terms)

    def gradient(self) -> list["PolyExpr"]:
        return [self.diff(i) for i in range(self.nvars)]

    def hessian(self) -> list[list["PolyExpr"]]:
        g = self.gradient()
        return [[gi.diff(j) for j in range(self.nvars)] for gi in g]

    def __add__(self, other):
        assert self.nvars == other.nvars
        return PolyExpr.from_terms(
            self.nvars,
            [(c, e) for e, c in self.monomials] + [(c, e) for e, c in other.monomials],
        )

    def __sub__(self, other):
        return self + other.scale(-1)

    def __mul__(self, other):
        assert self.nvars == other.nvars
        terms = []
        for e1, c1 in self.monomials:
            for e2, c2 in other.monomials:
                terms.append((c1 * c2, tuple(a + b for a, b in zip(e1, e2))))
        return PolyExpr.from_terms(self.nvars, terms)

    def scale(self, c) -> "PolyExpr":
        c = rat(c)
        return PolyExpr.from_terms(self.nvars, [(c * cc, e) for e, cc in self.monomials])

    def is_zero(self) -> bool:
        return not self.monomials


@dataclass(frozen=True)
class PolyMap:
    """Vector of polynomials sharing one variable space."""

    nvars: int
    components: tuple[PolyExpr, ...]

    @staticmethod
    def make(components) -> "PolyMap":
        components = tuple(components)
        if not components:
            raise ValueError("empty map")
        nv = components[0].nvars
        if any(c.nvars != nv for c in components):
            raise ValueError("mixed arities")
        return PolyMap(nv, components)

    @property
    def ncomps(self) -> int:
        return len(self.components)

    def eval(self, x):
        return tuple(c.eval(x) for c in self.components)

    def jacobian(self) -> list[list[PolyExpr]]:
        return [c.gradient() for c in self.components]

    def jacobian_at(self, x):
        return tuple(tuple(g.eval(x) for g in c.gradient()) for c in self.components)

    def hessians(self) -> list[list[list[PolyExpr]]]:
        return [c.hessian() for c in self.components]

    def hessians_at(self, x):
        return tuple(
            tuple(tuple(h.eval(x) for h in row) for row in c.hessian())
            for c in self.components
        )


def differentiate(F: PolyMap):
    """Symbolic (jacobian, hessians) of a polynomial map."""
    return F.jacobian(), F.hessians()


def fd_check(F: PolyMap, x, h: float) -> float:
    """Max deviation between central finite differences of F and the
    symbolic Jacobian at x (float arithmetic)."""
    if h <= 0:
        raise ValueError("h must be positive")
    x = [float(v) for v in x]
    n = F.nvars
    jac = F.jacobian_at(x)
    worst = 0.0
    for j in range(n):
        xp = list(x)
        xm = list(x)
        xp[j] += h
        xm[j] -= h
        fp = F.eval(xp)
        fm = F.eval(xm)
        for i in range(F.ncomps):
            fd = (fp[i] - fm[i]) / (2 * h)
            worst = max(worst, abs(fd - float(jac[i][j])))
    return worst
