"""Rational scalars and vectors: parsing, formatting and small vector helpers.

The canonical textual form of a rational is "p/q" or "p"; `fractions.Fraction`
already keeps gcd-reduced form with a positive denominator, so it is used
directly as the scalar type everywhere.
"""

from __future__ import annotations

from fractions import Fraction

Vec = tuple[Fraction, ...]
Mat = tuple[Vec, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


def rat(x) -> Fraction:
    """Coerce ints, strings "p/q" and Fractions to Fraction (exact only)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


def rat_str(x: Fraction) -> str:
    return str(x)


def vec(xs) -> Vec:
    return tuple(rat(x) for x in xs)


def mat(rows) -> Mat:
    return tuple(vec(r) for r in rows)


def dot(a, b) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), ZERO)


def vadd(a, b) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a, b) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def vscale(c, a) -> Vec:
    c = rat(c)
    return tuple(c * x for x in a)


def vzero(n: int) -> Vec:
    return (ZERO,) * n


def is_zero_vec(a) -> bool:
    return all(x == 0 for x in a)


def mat_vec(A, x) -> Vec:
    return tuple(dot(row, x) for row in A)


def mat_t(A) -> Mat:
    if not A:
        return ()
    return tuple(zip(*A))


def mat_mul(A, B) -> Mat:
    Bt = mat_t(B)
    return tuple(tuple(dot(ra, cb) for cb in Bt) for ra in A)


def primitive(a) -> Vec:
    """Scale a nonzero rational vector to integer entries with gcd 1 and
    positive leading nonzero entry (canonical direction for dedup)."""
    from math import gcd

    if is_zero_vec(a):
        return vec(a)
    L = 1
    for x in a:
        L = L * x.denominator // gcd(L, x.denominator)
    ints = [int(x * L) for x in a]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    ints = [v // g for v in ints]
    lead = next(v for v in ints if v != 0)
    if lead < 0:
        ints = [-v for v in ints]
    return tuple(Fraction(v) for v in ints)


def primitive_signed(a) -> Vec:
    """Like primitive() but preserves orientation (rays must keep their sign)."""
    from math import gcd

    if is_zero_vec(a):
        return vec(a)
    L = 1
    for x in a:
        L = L * x.denominator // gcd(L, x.denominator)
    ints = [int(x * L) for x in a]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    return tuple(Fraction(v // g) for v in ints)
