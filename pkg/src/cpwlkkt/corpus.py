"""Built-in instance corpus with frozen golden values.

The instances are classical small examples from the critical-multiplier
literature (three-dimensional inequality-constrained programs, a
constraint-perturbation example, equality/minimax specializations and a
one-dimensional well-behaved problem).  Two of them are shipped with a
correction note:

  * ex63: the multiplier-set equality is derived from exact stationarity
    as v1 + v2 - v3 = 1; a printed version of this example states
    "v1 + v2 - v3 = 0", which is inconsistent with its own sample
    multiplier (3, 0, 2).  The derived set is used.
  * ex64: the constraint x1 + x3^2 <= 4 is inactive at the origin, while
    the displayed multiplier set and index data require it active; the
    corpus carries both encodings and binds golden values to the active
    one (x1 + x3^2 <= 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .cpwl import CpwlFunction
from .polyhedra import HPoly, convert_rep, h_equal
from .polynomials import PolyExpr, PolyMap
from .varsys import CompositeProblem, VariationalSystem

F = Fraction


@dataclass(frozen=True)
class CorpusInstance:
    name: str
    title: str
    composite: CompositeProblem | None
    system: VariationalSystem
    points: dict[str, tuple[tuple, tuple]]
    notes: tuple[str, ...] = ()


def _poly(nvars, terms):
    return PolyExpr.from_terms(nvars, terms)


def orthant_indicator(m):
    rows = []
    for i in range(m):
        d = [0] * m
        d[i] = 1
        rows.append((d, 0))
    return CpwlFunction.make(m, pieces=[([0] * m, 0)], domain=rows)


def make_ex63() -> CorpusInstance:
    phi0 = _poly(3, [(-1, (1, 0, 0)), (F(5, 2), (0, 2, 0)), (1, (0, 0, 2))])
    Phi = PolyMap.make(
        [
            _poly(3, [(1, (1, 0, 0)), (F(-1, 2), (0, 2, 0))]),
            _poly(3, [(1, (1, 0, 0)), (F(-1, 2), (0, 0, 2))]),
            _poly(3, [(-1, (1, 0, 0)), (F(-1, 2), (0, 2, 0)), (F(-1, 2), (0, 0, 2))]),
        ]
    )
    cp = CompositeProblem(phi0, Phi, orthant_indicator(3))
    return CorpusInstance(
        "ex63",
        "3-D inequality NLP, degenerate multiplier segment",
        cp,
        cp.system,
        {
            "xbar_vcrit": ((0, 0, 0), (3, 0, 2)),
            "xbar_vnoncrit": ((0, 0, 0), (1, 0, 0)),
        },
        notes=(
            "multiplier set derived from exact stationarity: "
            "{v >= 0 : v1 + v2 - v3 = 1}; a printed version of this example "
            "states v1 + v2 - v3 = 0, inconsistent with its own sample "
            "multiplier (3, 0, 2); the derived set is used",
        ),
    )


def make_ex64_active() -> CorpusInstance:
    phi0 = _poly(3, [(-1, (1, 0, 0)), (F(1, 2), (0, 2, 0))])
    Phi = PolyMap.make(
        [
            _poly(3, [(1, (1, 0, 0)), (1, (0, 0, 2))]),
            _poly(3, [(1, (1, 0, 0))]),
        ]
    )
    cp = CompositeProblem(phi0, Phi, orthant_indicator(2))
    return CorpusInstance(
        "ex64_active",
        "3-D NLP with both constraints active at the origin",
        cp,
        cp.system,
        {
            "xbar_vcrit": ((0, 0, 0), (0, 1)),
            "xbar_vnoncrit": ((0, 0, 0), (1, 0)),
        },
        notes=(
            "encodes the first constraint as x1 + x3^2 <= 0 (active at the "
            "origin): the displayed multiplier segment {v >= 0 : v1 + v2 = 1} "
            "and index data require activity, while the also-circulating "
            "'<= 4' right-hand side leaves it inactive; golden values bind "
            "to this active encoding",
        ),
    )


def make_ex64_printed() -> CorpusInstance:
    phi0 = _poly(3, [(-1, (1, 0, 0)), (F(1, 2), (0, 2, 0))])
    Phi = PolyMap.make(
        [
            _poly(3, [(1, (1, 0, 0)), (1, (0, 0, 2)), (-4, (0, 0, 0))]),
            _poly(3, [(1, (1, 0, 0))]),
        ]
    )
    cp = CompositeProblem(phi0, Phi, orthant_indicator(2))
    return CorpusInstance(
        "ex64_printed",
        "same data with the '<= 4' right-hand side (constraint inactive)",
        cp,
        cp.system,
        {"xbar_v": ((0, 0, 0), (0, 1))},
        notes=(
            "the '<= 4' encoding: the first constraint is inactive at the "
            "origin, the multiplier set collapses to the single point (0, 1)",
        ),
    )


def make_izmailov54() -> CorpusInstance:
    phi0 = _poly(2, [(1, (1, 0)), (1, (0, 4))])
    Phi = PolyMap.make(
        [
            _poly(2, [(-1, (1, 0))]),
            _poly(2, [(1, (2, 0)), (-4, (1, 0)), (1, (0, 2))]),
        ]
    )
    cp = CompositeProblem(phi0, Phi, orthant_indicator(2))
    return CorpusInstance(
        "izmailov54",
        "constraint-perturbation example: x1 + x2^4 under two inequalities",
        cp,
        cp.system,
        {
            "xbar_vcrit": ((0, 0), (1, 0)),
            "xbar_vnoncrit": ((0, 0), (0, F(1, 4))),
        },
    )


def make_onedim() -> CorpusInstance:
    phi0 = _poly(1, [(F(1, 2), (2,)), (-1, (1,)), (F(1, 2), (0,))])
    Phi = PolyMap.make([_poly(1, [(1, (1,))])])
    theta = CpwlFunction.make(1, pieces=[([0], 0), ([1], 0)])
    cp = CompositeProblem(phi0, Phi, theta)
    return CorpusInstance(
        "onedim",
        "one-dimensional well-behaved composite problem",
        cp,
        cp.system,
        {"kkt": ((0,), (1,))},
    )


def make_eqnlp34() -> CorpusInstance:
    phi0 = _poly(
        2, [(F(1, 2), (2, 0)), (-1, (1, 0)), (F(1, 2), (0, 0)), (F(1, 2), (0, 2))]
    )
    Phi = PolyMap.make([_poly(2, [(1, (1, 0))])])
    theta = CpwlFunction.make(
        1, pieces=[([0], 0)], domain=[([1], 0), ([-1], 0)]
    )
    cp = CompositeProblem(phi0, Phi, theta)
    return CorpusInstance(
        "eqnlp34",
        "equality-constrained specialization (zero-point indicator)",
        cp,
        cp.system,
        {"kkt": ((0, 0), (1,))},
    )


def make_minimax36() -> CorpusInstance:
    phi0 = _poly(1, [])
    Phi = PolyMap.make([_poly(1, [(1, (1,))]), _poly(1, [(-1, (1,))])])
    theta = CpwlFunction.make(2, pieces=[([1, 0], 0), ([0, 1], 0)])
    cp = CompositeProblem(phi0, Phi, theta)
    return CorpusInstance(
        "minimax36",
        "minimax specialization: minimize max(x, -x)",
        cp,
        cp.system,
        {"kkt": ((0,), (F(1, 2), F(1, 2)))},
    )


def build_corpus() -> list[CorpusInstance]:
    return [
        make_ex63(),
        make_ex64_active(),
        make_ex64_printed(),
        make_izmailov54(),
        make_onedim(),
        make_eqnlp34(),
        make_minimax36(),
    ]


# ---------------------------------------------------------------------------
# golden values (frozen from the exact checkers after independent hand
# derivations; the corpus command recomputes everything and diffs)

GOLDEN = {
    ("ex63", "xbar_vcrit"): {
        "lambda_hrep": {
            "dim": 3,
            "ineqs": [([-1, 0, 0], 0), ([0, -1, 0], 0), ([0, 0, -1], 0)],
            "eqs": [([1, 1, -1], 1)],
        },
        "lambda_vertices": [[0, 1, 0], [1, 0, 0]],
        "lambda_rays": [[0, 1, 1], [1, 0, 1]],
        "criticality": "critical",
        "hessian": [[0, 0, 0], [0, 0, 0], [0, 0, 0]],
        "sosc": False,
        "nondegenerate": False,
        "rcq": False,
        "isolated_calmness": False,
        "robust_isolated_calmness": False,
        "lipschitz_like": False,
    },
    ("ex63", "xbar_vnoncrit"): {
        "criticality": "noncritical",
        "hessian": [[0, 0, 0], [0, 4, 0], [0, 0, 2]],
        "sosc": True,
        "nondegenerate": False,
        "rcq": False,
        "isolated_calmness": False,
        "robust_isolated_calmness": False,
        "lipschitz_like": False,
    },
    ("ex64_active", "xbar_vcrit"): {
        "lambda_hrep": {
            "dim": 2,
            "ineqs": [([-1, 0], 0), ([0, -1], 0)],
            "eqs": [([1, 1], 1)],
        },
        "lambda_vertices": [[0, 1], [1, 0]],
        "lambda_rays": [],
        "criticality": "critical",
        "hessian": [[0, 0, 0], [0, 1, 0], [0, 0, 0]],
        "sosc": False,
        "sosc_violation_span": [0, 0, 1],
        "nondegenerate": False,
        "rcq": True,
        "isolated_calmness": False,
        "robust_isolated_calmness": False,
        "lipschitz_like": False,
    },
    ("ex64_active", "xbar_vnoncrit"): {
        "criticality": "noncritical",
        "hessian": [[0, 0, 0], [0, 1, 0], [0, 0, 2]],
        "sosc": True,
        "nondegenerate": False,
        "rcq": True,
        "isolated_calmness": False,
        "robust_isolated_calmness": False,
        "lipschitz_like": False,
    },
    ("ex64_printed", "xbar_v"): {
        "lambda_vertices": [[0, 1]],
        "lambda_rays": [],
        "criticality": "critical",
        "hessian": [[0, 0, 0], [0, 1, 0], [0, 0, 0]],
        "sosc": False,
        "nondegenerate": True,
        "rcq": True,
        "isolated_calmness": False,
        "robust_isolated_calmness": False,
        "lipschitz_like": False,
    },
    ("izmailov54", "xbar_vcrit"): {
        "lambda_hrep": {
            "dim": 2,
            "ineqs": [([-1, 0], 0), ([0, -1], 0)],
            "eqs": [([1, 4], 1)],
        },
        "lambda_vertices": [[0, F(1, 4)], [1, 0]],
        "lambda_rays": [],
        "criticality": "critical",
        "sosc": False,
        "nondegenerate": False,
        "rcq": True,
        "isolated_calmness": False,
        "robust_isolated_calmness": False,
        "lipschitz_like": False,
    },
    ("izmailov54", "xbar_vnoncrit"): {
        "criticality": "noncritical",
        "sosc": True,
        "nondegenerate": False,
        "rcq": True,
        "isolated_calmness": False,
        "robust_isolated_calmness": False,
        "lipschitz_like": False,
    },
    ("onedim", "kkt"): {
        "lambda_vertices": [[1]],
        "lambda_rays": [],
        "criticality": "noncritical",
        "sosc": True,
        "nondegenerate": True,
        "rcq": True,
        "isolated_calmness": True,
        "robust_isolated_calmness": True,
        "lipschitz_like": True,
    },
    ("eqnlp34", "kkt"): {
        "lambda_vertices": [[1]],
        "lambda_rays": [],
        "criticality": "noncritical",
        "sosc": True,
        "nondegenerate": True,
        "rcq": True,
        "isolated_calmness": True,
        "robust_isolated_calmness": True,
        "lipschitz_like": True,
    },
    ("minimax36", "kkt"): {
        "lambda_vertices": [[F(1, 2), F(1, 2)]],
        "lambda_rays": [],
        "criticality": "noncritical",
        "sosc": True,
        "nondegenerate": True,
        "rcq": True,
        "isolated_calmness": True,
        "robust_isolated_calmness": True,
        "lipschitz_like": True,
    },
}


def compute_point_record(inst: CorpusInstance, point_name: str) -> dict:
    """Recompute the golden-comparable record for one corpus point."""
    from .criticality import classify_multiplier, sosc_check
    from .stability import (
        isolated_calmness_check,
        lipschitz_like_check,
        robust_isolated_calmness_check,
    )
    from .varsys import (
        multiplier_set,
        nondegeneracy_check,
        psi_jacobian_x,
        rcq_check,
    )

    VS = inst.system
    x, v = inst.points[point_name]
    lam = multiplier_set(VS, x)
    verdict = classify_multiplier(VS, x, v)
    rec = {
        "lambda_hpoly": lam.hpoly,
        "lambda_vertices": sorted(lam.vertices.points),
        "lambda_rays": sorted(lam.vertices.rays),
        "criticality": verdict.status,
        "hessian": [list(r) for r in psi_jacobian_x(VS, x, v)],
        "sosc": sosc_check(VS, x, v).holds,
        "nondegenerate": nondegeneracy_check(VS, x)[0],
        "rcq": rcq_check(VS, x),
        "isolated_calmness": isolated_calmness_check(VS, x, v),
        "criticality_witness": verdict.witness,
    }
    if inst.composite is not None:
        rec["robust_isolated_calmness"] = robust_isolated_calmness_check(
            inst.composite, x, v
        ).holds
        rec["lipschitz_like"] = lipschitz_like_check(inst.composite, x, v)
    return rec


def compare_to_golden(
    inst: CorpusInstance, point_name: str, rec: dict, golden_map=None
) -> list[str]:
    """Differences between a recomputed record and the frozen goldens."""
    key = (inst.name, point_name)
    gold = (GOLDEN if golden_map is None else golden_map).get(key)
    if gold is None:
        return [f"{key}: missing golden record"]
    diffs = []
    for k, expected in gold.items():
        if k == "lambda_hrep":
            target = HPoly.make(expected["dim"], expected["ineqs"], expected["eqs"])
            if not h_equal(rec["lambda_hpoly"], target):
                diffs.append(f"{key}: multiplier polyhedron differs from golden")
            continue
        if k == "lambda_vertices":
            got = [[x for x in p] for p in rec["lambda_vertices"]]
            if got != [[F(c) for c in p] for p in expected]:
                diffs.append(f"{key}: vertices {got} != {expected}")
            continue
        if k == "lambda_rays":
            got = [[x for x in p] for p in rec["lambda_rays"]]
            if got != [[F(c) for c in p] for p in expected]:
                diffs.append(f"{key}: rays {got} != {expected}")
            continue
        if k == "hessian":
            got = [[F(c) for c in row] for row in rec["hessian"]]
            if got != [[F(c) for c in row] for row in expected]:
                diffs.append(f"{key}: hessian {got} != {expected}")
            continue
        if k == "sosc_violation_span":
            continue  # direction checked in the dedicated tests
        got = rec.get(k)
        if got != expected:
            diffs.append(f"{key}: {k} = {got!r}, golden {expected!r}")
    return diffs


def run_corpus(golden=None):
    """Recompute all instances and diff against the goldens.

    Returns (ok, lines): `lines` is the human report, one line per check.
    """
    golden_map = GOLDEN if golden is None else golden
    lines = []
    all_diffs = []
    for inst in build_corpus():
        lines.append(f"[{inst.name}] {inst.title}")
        for note in inst.notes:
            lines.append(f"    note: {note}")
        for pname in inst.points:
            rec = compute_point_record(inst, pname)
            diffs = compare_to_golden(inst, pname, rec, golden_map)
            status = "ok" if not diffs else "DRIFT"
            lines.append(
                f"    {pname}: criticality={rec['criticality']} "
                f"sosc={rec['sosc']} nondeg={rec['nondegenerate']} "
                f"rcq={rec['rcq']} iso_calm={rec['isolated_calmness']} [{status}]"
            )
            all_diffs.extend(diffs)
    ok = not all_diffs
    if all_diffs:
        lines.append("golden drift detected:")
        lines.extend("  " + d for d in all_diffs)
    return ok, lines
