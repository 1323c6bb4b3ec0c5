"""Exact analysis of variational systems with convex piecewise-linear outer functions.

The package computes Lagrange multiplier sets, critical cones and
criticality verdicts for multipliers of KKT-type systems whose nonsmooth
part is a convex piecewise-linear function, checks second-order sufficient
conditions, nondegeneracy and a family of calmness/Lipschitz stability
properties, and runs small perturbation and Newton-rate experiments.

All polyhedral and polynomial data is kept in exact rational arithmetic;
floating point enters only in the perturbation and convergence experiments.
"""

__version__ = "0.1.0"

from .polyhedra import HPoly, VPoly, Face  # noqa: F401
from .polynomials import PolyExpr, PolyMap  # noqa: F401
