"""End-to-end computations and the verification checks built on them."""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import homology as H
from .complex import ChainComplex, assemble, reduce_basepoint, reduce_kernel
from .cube import Cube, check_face_relations, verify_cube_parity
from .evenkh import assemble_even, reduce_even
from .linkdiag import DEFAULT_MAX_CROSSINGS, KnotRecord, OrientedDiagram, PDCode, orient, parse_pd
from .signs import (
    TYPE_X,
    TYPE_Y,
    edge_assignment,
    find_gauge,
    gauge_transform,
    target_cochain,
    verify_assignment,
)


def as_diagram(source, arrows=None) -> OrientedDiagram:
    if isinstance(source, OrientedDiagram):
        return source if arrows is None else source.with_arrows(arrows)
    if isinstance(source, KnotRecord):
        source = source.pd
    if not isinstance(source, PDCode):
        source = parse_pd(source)
    return orient(source, arrows)


def build_complex(source, flavor: str = "odd", reduced: bool | str = False,
                  assignment_type: str = TYPE_X, basepoint: int | None = None,
                  arrows=None, max_crossings: int = DEFAULT_MAX_CROSSINGS,
                  cube: Cube | None = None) -> ChainComplex:
    """The requested complex.  ``reduced`` may be True/'basepoint' or 'kernel'."""
    if cube is None:
        cube = Cube(as_diagram(source, arrows), max_crossings)
    if flavor == "odd":
        c = assemble(cube, assignment_type)
        if reduced in (True, "basepoint"):
            c = reduce_basepoint(c, cube, basepoint)
        elif reduced == "kernel":
            c = reduce_kernel(c, cube)
    elif flavor == "even":
        c = assemble_even(cube)
        if reduced == "kernel":
            raise ValueError("the kernel model is defined for the odd theory only")
        if reduced:
            c = reduce_even(c, cube, basepoint)
    else:
        raise ValueError(f"unknown flavor {flavor!r}")
    return c


def compute(source, flavor: str = "odd", reduced: bool | str = False, coeffs: str = "Z", **kw):
    """BigradedGroup over Z, or a dimension table over Q, GF(2), GF(3)."""
    c = build_complex(source, flavor, reduced, **kw)
    if coeffs == "Z":
        return H.smith_homology(c)
    if coeffs not in H.COEFFS:
        raise ValueError(f"coefficients must be one of {sorted(H.COEFFS)}")
    return H.field_homology(c, H.COEFFS[coeffs])


# ---------------------------------------------------------------------------
# Checks: each returns None on success or a JSON-able counterexample.

@dataclass
class Failure:
    check: str
    knot: str
    detail: object

    def to_json(self) -> dict:
        return {"check": self.check, "knot": self.knot, "detail": self.detail}


def _gstr(g) -> object:
    if isinstance(g, H.BigradedGroup):
        return g.to_rows()
    return {f"{m},{s}": v for (m, s), v in sorted(g.items())}


def check_square(cube: Cube, name: str = "") -> Failure | None:
    for label, c in (("odd X", assemble(cube, TYPE_X)), ("odd Y", assemble(cube, TYPE_Y)),
                     ("even", assemble_even(cube))):
        if not c.square_is_zero():
            return Failure("square", name, f"d^2 != 0 for the {label} complex")
        try:
            c.check_gradings()
        except Exception as exc:  # ComplexError
            return Failure("square", name, f"{label}: {exc}")
    return None


def check_parity(cube: Cube, name: str = "") -> Failure | None:
    bad = verify_cube_parity(cube)
    return Failure("parity", name, bad) if bad else None


def check_relations(cube: Cube, name: str = "") -> Failure | None:
    bad = check_face_relations(cube)
    if bad:
        return Failure("relations", name, {"faces": [list(f) for f in bad[:5]]})
    return None


def check_assignments(cube: Cube, name: str = "", seed: int = 0) -> Failure | None:
    """Both types solve; a random regauge is recognised; homology is unchanged."""
    rng = random.Random(seed)
    groups = []
    for t in (TYPE_X, TYPE_Y):
        phi = target_cochain(cube.face_types, t)
        eps = edge_assignment(cube, t)
        bad = verify_assignment(eps, phi)
        if bad is not None:
            return Failure("gauge", name, {"type": t, "face": list(bad)})
        eta = [rng.choice((1, -1)) for _ in range(1 << cube.n)]
        other = gauge_transform(eps, eta)
        if verify_assignment(other, phi) is not None:
            return Failure("gauge", name, "gauge transform broke the face parities")
        found = find_gauge(eps, other)
        if found is None:
            return Failure("gauge", name, {"type": t, "detail": "no gauge between two solutions"})
        h1 = H.smith_homology(assemble(cube, eps))
        h2 = H.smith_homology(assemble(cube, other))
        if h1 != h2:
            return Failure("gauge", name, {"type": t, "before": _gstr(h1), "after": _gstr(h2)})
        groups.append(h1)
    if groups[0] != groups[1]:
        return Failure("gauge", name, {"X": _gstr(groups[0]), "Y": _gstr(groups[1])})
    return None


def check_euler(cube: Cube, name: str = "", jones: str | None = None) -> Failure | None:
    g = H.smith_homology(assemble(cube))
    chi = H.euler_characteristic(g)
    state = H.jones_state_sum(cube.diagram)
    if chi != state:
        return Failure("euler", name, {"homology": H.laurent_string(chi),
                                       "state_sum": H.laurent_string(state)})
    if jones is not None:
        expected = H.laurent_mul(H.parse_laurent(jones), {1: 1, -1: 1})
        if chi != expected:
            return Failure("euler", name, {"homology": H.laurent_string(chi),
                                           "table_jones_times_unknot": H.laurent_string(expected)})
    return None


def check_mod2(cube: Cube, name: str = "") -> Failure | None:
    odd = assemble(cube)
    even = assemble_even(cube)
    if (odd.mod(2) != even.mod(2)).nnz:
        return Failure("mod2", name, "odd and even differentials differ mod 2")
    a, b = H.field_homology(odd, 2), H.field_homology(even, 2)
    if a != b:
        return Failure("mod2", name, {"odd": _gstr(a), "even": _gstr(b)})
    return None


def check_split(cube: Cube, name: str = "") -> Failure | None:
    c = assemble(cube)
    full = H.smith_homology(c)
    red = H.smith_homology(reduce_basepoint(c, cube))
    expected = red.shifted(ds=-1).direct_sum(red.shifted(ds=1)).normalized()
    if full.normalized() != expected:
        return Failure("split", name, {"unreduced": _gstr(full), "reduced": _gstr(red)})
    return None


def check_thin(cube: Cube, name: str = "", sigma: int | None = None) -> Failure | None:
    red = H.smith_homology(reduce_basepoint(assemble(cube), cube))
    thin, off = H.thinness(red, sigma)
    if thin is False:
        return Failure("thin", name, {"sigma": sigma, "off_diagonal": [list(x) for x in off]})
    return None


def check_invariance(diagrams: list[OrientedDiagram], name: str = "",
                     coeffs: str = "Z", arrows_limit: int = 8, seed: int = 0) -> Failure | None:
    """Same groups across diagrams, assignment types, arrows, basepoints."""
    rng = random.Random(seed)
    reference = None
    for k, d in enumerate(diagrams):
        variants = [("types", t, None, None) for t in (TYPE_X, TYPE_Y)]
        arrow_sets = []
        if d.n <= 3:
            arrow_sets = [tuple(1 - 2 * (v >> c & 1) for c in range(d.n)) for v in range(1 << d.n)]
        else:
            arrow_sets = [tuple(rng.choice((1, -1)) for _ in range(d.n)) for _ in range(arrows_limit)]
        variants += [("arrows", TYPE_X, a, None) for a in arrow_sets]
        for label, t, arrows, _ in variants:
            dd = d if arrows is None else d.with_arrows(arrows)
            g = compute(dd, "odd", False, coeffs, assignment_type=t)
            r = compute(dd, "odd", True, coeffs, assignment_type=t)
            if reference is None:
                reference = (g, r)
            elif (g, r) != reference:
                return Failure("invariance", name, {
                    "diagram": k, "variant": label, "type": t, "arrows": arrows,
                    "expected": [_gstr(x) for x in reference], "got": [_gstr(g), _gstr(r)],
                })
        arcs = list(d.pd.arcs)
        for p in arcs if len(arcs) <= 8 else rng.sample(arcs, 4):
            r = compute(d, "odd", True, coeffs, basepoint=p)
            if r != reference[1]:
                return Failure("invariance", name, {"diagram": k, "basepoint": p,
                                                    "expected": _gstr(reference[1]), "got": _gstr(r)})
    return None


CHECKS = {
    "square": check_square,
    "parity": check_parity,
    "relations": check_relations,
    "gauge": check_assignments,
    "euler": check_euler,
    "mod2": check_mod2,
    "split": check_split,
    "thin": check_thin,
}
DEFAULT_CHECKS = ("square", "parity", "relations", "gauge", "euler", "mod2", "split")


def run_checks(record: KnotRecord, checks=DEFAULT_CHECKS,
               max_crossings: int = DEFAULT_MAX_CROSSINGS) -> list[Failure]:
    cube = Cube(orient(record.pd), max_crossings)
    failures = []
    for name in checks:
        fn = CHECKS[name]
        if name == "euler":
            f = fn(cube, record.name, record.jones)
        elif name == "thin":
            f = fn(cube, record.name, record.signature)
        else:
            f = fn(cube, record.name)
        if f is not None:
            failures.append(f)
    return failures
