"""Planar diagrams: parsing, orientation, and circle tracing of resolutions.

PD convention: ``X[i, j, k, l]`` lists the four arcs meeting at a crossing
counterclockwise, starting with the incoming under-strand.  The under-strand
runs ``i -> k``; the over-strand joins ``j`` and ``l``.

Slot positions 0..3 are the tuple positions.  The 0-resolution joins slots
(0, 1) and (2, 3); the 1-resolution joins (3, 0) and (1, 2).  Traversing a
resolved strand from slot ``p`` to slot ``p + 1 (mod 4)`` keeps the crossing
centre (where the surgery arc sits) on the left.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

DEFAULT_MAX_CROSSINGS = 14

STANDARD = 1
REVERSED = -1

# resolution choice -> the two slot pairs joined at the crossing
SMOOTHINGS = {0: ((0, 1), (2, 3)), 1: ((3, 0), (1, 2))}
# slot joined to each slot by the smoothing
_PARTNER = {k: {p: q for a, b in pairs for p, q in ((a, b), (b, a))} for k, pairs in SMOOTHINGS.items()}


class PDError(ValueError):
    """Malformed or non-closed planar diagram code."""


class ResourceLimitError(RuntimeError):
    """Crossing count exceeds the configured cap."""


@dataclass(frozen=True)
class PDCode:
    """Validated PD code with arcs renumbered 1..2n.

    ``loops`` counts crossingless unknotted components, which a list of
    crossings cannot express (``PD[Loop[1]]`` is the 0-crossing unknot).
    """

    crossings: tuple[tuple[int, int, int, int], ...]
    loops: int = 0

    @property
    def n(self) -> int:
        return len(self.crossings)

    @property
    def arcs(self) -> range:
        return range(1, 2 * self.n + 1)

    @cached_property
    def occurrences(self) -> dict[int, tuple[tuple[int, int], tuple[int, int]]]:
        occ: dict[int, list[tuple[int, int]]] = {}
        for c, x in enumerate(self.crossings):
            for p, a in enumerate(x):
                occ.setdefault(a, []).append((c, p))
        return {a: (v[0], v[1]) for a, v in occ.items()}

    def other_end(self, c: int, p: int) -> tuple[int, int]:
        """The other slot carrying the arc found at slot ``p`` of crossing ``c``."""
        first, second = self.occurrences[self.crossings[c][p]]
        return second if first == (c, p) else first

    def to_text(self) -> str:
        parts = [f"X[{a},{b},{c},{d}]" for a, b, c, d in self.crossings]
        parts += [f"Loop[{i + 1}]" for i in range(self.loops)]
        return "PD[" + ",".join(parts) + "]"


def _validate(crossings: Sequence[Sequence[int]], loops: int = 0) -> PDCode:
    rows = []
    for x in crossings:
        if len(x) != 4:
            raise PDError(f"crossing {list(x)} does not have four arcs")
        row = []
        for a in x:
            if isinstance(a, bool) or not isinstance(a, int) or a < 0:
                raise PDError(f"arc label {a!r} is not a non-negative integer")
            row.append(a)
        rows.append(row)
    if loops < 0:
        raise PDError("negative loop count")
    counts: dict[int, int] = {}
    for row in rows:
        for a in row:
            counts[a] = counts.get(a, 0) + 1
    bad = sorted(a for a, k in counts.items() if k != 2)
    if bad:
        once = [a for a in bad if counts[a] == 1]
        if once:
            raise PDError(f"open strands: arcs {once} appear only once")
        raise PDError(f"arcs {bad} appear more than twice")
    relabel = {a: i + 1 for i, a in enumerate(sorted(counts))}
    pd = PDCode(tuple(tuple(relabel[a] for a in row) for row in rows), loops)
    _trace_components(pd)  # raises on inconsistent under-strand directions
    _check_planar(pd)
    return pd


def _check_planar(pd: PDCode) -> None:
    """Euler characteristic of the projection: faces = n + 2 per connected piece.

    Faces are the orbits of "cross the arc, then turn to the next slot
    counterclockwise" on the darts (crossing, slot).
    """
    if not pd.crossings:
        return
    parent = list(range(pd.n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for (c1, _), (c2, _) in pd.occurrences.values():
        parent[find(c1)] = find(c2)
    pieces = len({find(c) for c in range(pd.n)})
    seen = set()
    faces = 0
    for start in ((c, j) for c in range(pd.n) for j in range(4)):
        if start in seen:
            continue
        faces += 1
        dart = start
        while dart not in seen:
            seen.add(dart)
            c, j = pd.other_end(*dart)
            dart = (c, (j + 1) % 4)
    if faces != pd.n + 2 * pieces:
        raise PDError(
            f"not a planar diagram: {faces} faces where {pd.n + 2 * pieces} are needed "
            "(check the counterclockwise slot order)"
        )


_X_RE = re.compile(r"X\[\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\]")
_LOOP_RE = re.compile(r"Loop\[\s*\d+\s*\]")


def parse_pd(source: str | Sequence | dict, loops: int | None = None) -> PDCode:
    """Parse ``PD[X[..],...]`` text, a JSON list/record, or a Python list."""
    n_loops = 0
    if isinstance(source, PDCode):
        return source
    if isinstance(source, dict):
        n_loops = int(source.get("loops", 0))
        source = source["pd"]
    if isinstance(source, str):
        text = source.strip()
        if text.startswith("PD"):
            body = text[2:].strip()
            if not (body.startswith("[") and body.endswith("]")):
                raise PDError(f"malformed PD text: {text!r}")
            inner = body[1:-1]
            crossings = [tuple(int(v) for v in m) for m in _X_RE.findall(inner)]
            n_loops += len(_LOOP_RE.findall(inner))
            rest = _LOOP_RE.sub("", _X_RE.sub("", inner))
            if rest.replace(",", "").strip():
                raise PDError(f"malformed PD text: unexpected {rest.strip()!r}")
            if any(min(x) < 0 for x in crossings):
                raise PDError("negative arc labels")
        elif text.startswith(("[", "{")):
            try:
                return parse_pd(json.loads(text), loops)
            except json.JSONDecodeError as exc:
                raise PDError(f"malformed JSON PD code: {exc}") from None
        else:
            raise PDError(f"unrecognised PD notation: {text!r}")
    else:
        crossings = [tuple(x) for x in source]
    if loops is not None:
        n_loops = loops
    return _validate(crossings, n_loops)


def _trace_components(pd: PDCode) -> list[list[tuple[int, int]]]:
    """Oriented components as lists of passages ``(crossing, entry slot)``.

    Direction is fixed by the under-strands (entry at slot 0, never slot 2).
    Components passing only over other strands keep the traversal direction
    of their lowest arc label.
    """
    seen: set[tuple[int, int]] = set()
    components = []
    for start in pd.arcs:
        first, _ = pd.occurrences[start]
        if first in seen:
            continue
        passages = []
        c, p = pd.other_end(*first)  # walk away from ``first``
        while True:
            passages.append((c, p))
            out = (p + 2) % 4
            seen.add((c, p))
            seen.add((c, out))
            c, p = pd.other_end(c, out)
            if (c, p) == passages[0]:
                break
        entries = {p for _, p in passages}
        if 0 in entries and 2 in entries:
            raise PDError("inconsistent orientation: an under-strand is traversed both ways")
        if 2 in entries:
            passages = [(c, (p + 2) % 4) for c, p in reversed(passages)]
        components.append(passages)
    return components


def crossing_signs(pd: PDCode) -> tuple[int, ...]:
    """+1 when the over-strand runs from slot 3 to slot 1, else -1."""
    signs = [0] * pd.n
    for comp in _trace_components(pd):
        for c, p in comp:
            if p == 3:
                signs[c] = 1
            elif p == 1:
                signs[c] = -1
    return tuple(signs)


def arc_heads(pd: PDCode) -> dict[int, tuple[int, int]]:
    """Slot where each arc ends (enters a crossing), following the orientation."""
    heads = {}
    for comp in _trace_components(pd):
        for c, p in comp:
            heads[pd.crossings[c][p]] = (c, p)
    return heads


# RI kinks inserted into an arc a -> a' with loop L; "under" means the strand
# passes under itself first.  The sign follows the over-strand direction.
_KINKS = {
    (1, "under"): lambda a, L, b: (a, b, L, L),
    (-1, "under"): lambda a, L, b: (a, L, L, b),
    (1, "over"): lambda a, L, b: (L, L, b, a),
    (-1, "over"): lambda a, L, b: (L, a, b, L),
}


def add_kink(pd: PDCode, arc: int, sign: int = 1, first: str = "under") -> PDCode:
    """Reidemeister I: put a curl of the given sign into ``arc``."""
    if arc not in pd.arcs:
        raise PDError(f"arc {arc} is not in the diagram")
    head_c, head_p = arc_heads(pd)[arc]
    top = 2 * pd.n
    loop, after = top + 1, top + 2
    rows = [list(x) for x in pd.crossings]
    rows[head_c][head_p] = after
    rows.append(list(_KINKS[(sign, first)](arc, loop, after)))
    return _validate(rows, pd.loops)


def mirror(pd: PDCode) -> PDCode:
    """Reflect the projection plane: reverses the cyclic order at each crossing."""
    return PDCode(tuple((a, d, c, b) for a, b, c, d in pd.crossings), pd.loops)


def disjoint_union(*codes: PDCode) -> PDCode:
    crossings: list[tuple[int, ...]] = []
    offset = 0
    loops = 0
    for pd in codes:
        crossings += [tuple(a + offset for a in x) for x in pd.crossings]
        offset += 2 * pd.n
        loops += pd.loops
    return _validate(crossings, loops)


def smooth_crossing(pd: PDCode, x: int, choice: int) -> PDCode:
    """Diagram with crossing ``x`` replaced by its ``choice`` resolution.

    Orientation of the result is whatever the remaining under-strands dictate;
    callers comparing Jones polynomials must allow a unit factor.
    """
    parent = {a: a for a in pd.arcs}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    row = pd.crossings[x]
    for p, q in SMOOTHINGS[choice]:
        ra, rb = find(row[p]), find(row[q])
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    rest = [c for i, c in enumerate(pd.crossings) if i != x]
    used = {find(a) for c in rest for a in c}
    # classes not touching any remaining crossing become free loops
    free = {find(a) for a in row} - used
    loops = pd.loops + len(free)
    relabelled = [tuple(find(a) for a in c) for c in rest]
    # an arc class now appearing once at each end is a single arc; classes
    # appearing twice in ``relabelled`` are fine, but a class whose two ends
    # were both at ``x`` and that touches nothing else is a loop (handled above)
    counts: dict[int, int] = {}
    for c in relabelled:
        for a in c:
            counts[a] = counts.get(a, 0) + 1
    if any(k != 2 for k in counts.values()):
        raise PDError("smoothing produced an inconsistent diagram")
    return _reorient(relabelled, loops)


def _reorient(crossings: list[tuple[int, ...]], loops: int) -> PDCode:
    """Validate, rotating crossings whose under-strand now runs backwards."""
    try:
        return _validate(crossings, loops)
    except PDError:
        pass
    # Smoothing can reverse part of a component; re-root each crossing so that
    # slot 0 is the incoming under-strand for a consistent orientation.
    relabel = {a: i + 1 for i, a in enumerate(sorted({a for c in crossings for a in c}))}
    pd = PDCode(tuple(tuple(relabel[a] for a in c) for c in crossings), loops)
    direction = _orient_unconstrained(pd)
    rows = []
    for c, row in enumerate(pd.crossings):
        rows.append(row if direction[c] else (row[2], row[3], row[0], row[1]))
    return _validate(rows, loops)


def _orient_unconstrained(pd: PDCode) -> list[bool]:
    """Pick a direction per component; report whether each under-strand agrees."""
    forward = [True] * pd.n
    seen: set[tuple[int, int]] = set()
    for start in pd.arcs:
        first, _ = pd.occurrences[start]
        if first in seen:
            continue
        c, p = pd.other_end(*first)
        begin = (c, p)
        while True:
            out = (p + 2) % 4
            seen.add((c, p))
            seen.add((c, out))
            if p == 2:
                forward[c] = False
            c, p = pd.other_end(c, out)
            if (c, p) == begin:
                break
    return forward


@dataclass(frozen=True)
class OrientedDiagram:
    """PD code plus crossing signs and the per-crossing surgery-arc arrows."""

    pd: PDCode
    signs: tuple[int, ...]
    arrows: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.pd.n

    @property
    def n_plus(self) -> int:
        return sum(1 for s in self.signs if s > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for s in self.signs if s < 0)

    @property
    def writhe(self) -> int:
        return sum(self.signs)

    def with_arrows(self, arrows: Sequence[int]) -> "OrientedDiagram":
        return orient(self.pd, arrows)


def orient(pd: PDCode | str | Sequence, arrows: Sequence[int] | None = None) -> OrientedDiagram:
    """Attach crossing signs and arrows (``STANDARD`` unless given)."""
    if not isinstance(pd, PDCode):
        pd = parse_pd(pd)
    if arrows is None:
        arrows = (STANDARD,) * pd.n
    arrows = tuple(int(a) for a in arrows)
    if len(arrows) != pd.n or any(a not in (STANDARD, REVERSED) for a in arrows):
        raise ValueError("arrows must give +1 or -1 for every crossing")
    return OrientedDiagram(pd, crossing_signs(pd), arrows)


@dataclass(frozen=True)
class SurgeryArc:
    """The oriented one-handle at a crossing, seen in one resolution.

    For I(c) = 0 it is the arc of the outgoing edge (tail on the strand through
    slots 0-1 for the standard arrow); for I(c) = 1 it is that arc rotated a
    quarter turn counterclockwise, so it runs from the strand through slots
    1-2 to the strand through slots 3-0.
    """

    crossing: int
    tail: int
    head: int

    @property
    def is_split_arc(self) -> bool:
        """Both feet on one circle: surgery along it splits that circle."""
        return self.tail == self.head


@dataclass(frozen=True)
class Resolution:
    """The planar 1-manifold D(I) at one hypercube vertex.

    ``arc_circle[a]`` is the circle through arc ``a`` (index 0 unused).
    Circles are numbered by their lowest arc label; free loops come last.
    """

    diagram: OrientedDiagram = field(repr=False)
    vertex: int
    n_circles: int
    arc_circle: tuple[int, ...]

    def choice(self, c: int) -> int:
        return (self.vertex >> c) & 1

    def strand_circle(self, c: int, p: int) -> int:
        """Circle through the resolved strand starting at slot ``p`` of crossing ``c``."""
        return self.arc_circle[self.diagram.pd.crossings[c][p]]

    def surgery_arc(self, c: int) -> SurgeryArc:
        return self._surgery_arcs[c]

    @cached_property
    def _surgery_arcs(self) -> tuple[SurgeryArc, ...]:
        return tuple(self._make_surgery_arc(c) for c in range(self.diagram.n))

    def _make_surgery_arc(self, c: int) -> SurgeryArc:
        if self.choice(c) == 0:
            tail, head = self.strand_circle(c, 0), self.strand_circle(c, 2)
        else:
            tail, head = self.strand_circle(c, 1), self.strand_circle(c, 3)
        if self.diagram.arrows[c] == REVERSED:
            tail, head = head, tail
        return SurgeryArc(c, tail, head)

    @cached_property
    def circles(self) -> tuple[tuple[int, ...], ...]:
        """Arc labels on each circle (empty for free loops)."""
        out: list[list[int]] = [[] for _ in range(self.n_circles)]
        for a in self.diagram.pd.arcs:
            out[self.arc_circle[a]].append(a)
        return tuple(tuple(v) for v in out)

    def passages(self, circle: int) -> list[tuple[int, int, int]]:
        """Cyclic walk around ``circle`` as ``(crossing, entry slot, exit slot)``."""
        return list(self._walks[circle])

    @cached_property
    def _walks(self) -> tuple[tuple[tuple[int, int, int], ...], ...]:
        pd = self.diagram.pd
        walks = []
        for arcs in self.circles:
            if not arcs:
                walks.append(())
                continue
            start = pd.occurrences[arcs[0]][1]
            out = []
            c, p = start
            while True:
                q = _PARTNER[self.choice(c)][p]
                out.append((c, p, q))
                c, p = pd.other_end(c, q)
                if (c, p) == start:
                    break
            walks.append(tuple(out))
        return tuple(walks)


def resolve(d: OrientedDiagram, vertex: int) -> Resolution:
    """Trace the circles of D(I) for the bit pattern ``vertex`` (bit c = I(c))."""
    pd = d.pd
    if vertex < 0 or vertex >> pd.n:
        raise ValueError(f"vertex {vertex} out of range for {pd.n} crossings")
    parent = list(range(2 * pd.n + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for c, row in enumerate(pd.crossings):
        for p, q in SMOOTHINGS[(vertex >> c) & 1]:
            ra, rb = find(row[p]), find(row[q])
            if ra != rb:
                if ra < rb:
                    parent[rb] = ra
                else:
                    parent[ra] = rb
    index: dict[int, int] = {}
    arc_circle = [0] * (2 * pd.n + 1)
    for a in pd.arcs:
        r = find(a)  # root is the lowest label of its class
        if r not in index:
            index[r] = len(index)
        arc_circle[a] = index[r]
    return Resolution(d, vertex, len(index) + pd.loops, tuple(arc_circle))


def all_resolutions(d: OrientedDiagram, max_crossings: int = DEFAULT_MAX_CROSSINGS) -> list[Resolution]:
    if d.n > max_crossings:
        raise ResourceLimitError(
            f"{d.n} crossings exceeds the cap of {max_crossings} "
            f"({2 ** d.n} resolutions)"
        )
    return [resolve(d, v) for v in range(1 << d.n)]


@dataclass(frozen=True)
class KnotRecord:
    name: str
    pd: PDCode
    signature: int | None = None
    jones: str | None = None
    alternating: bool | None = None
    source: str | None = None

    @property
    def crossings(self) -> int:
        return self.pd.n

    def to_json(self) -> dict:
        out = {"name": self.name, "pd": [list(x) for x in self.pd.crossings]}
        if self.pd.loops:
            out["loops"] = self.pd.loops
        for key in ("signature", "jones", "alternating", "source"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out


TABLE_ENV = "ODDKH_TABLE"
BUNDLED_TABLE = Path(__file__).with_name("data") / "knots.json"


def record_from_json(obj: dict) -> KnotRecord:
    return KnotRecord(
        name=str(obj["name"]),
        pd=parse_pd(obj),
        signature=obj.get("signature"),
        jones=obj.get("jones"),
        alternating=obj.get("alternating"),
        source=obj.get("source"),
    )


def load_table(path: str | os.PathLike | None = None) -> dict[str, KnotRecord]:
    """Knot table keyed by name; ``$ODDKH_TABLE`` overrides the bundled file."""
    if path is None:
        path = os.environ.get(TABLE_ENV) or BUNDLED_TABLE
    with open(path) as fh:
        rows = json.load(fh)
    if isinstance(rows, dict):
        rows = [rows]
    table: dict[str, KnotRecord] = {}
    for obj in rows:
        rec = record_from_json(obj)
        if rec.name in table:
            raise PDError(f"duplicate knot name {rec.name!r} in {path}")
        table[rec.name] = rec
    return table


def crossing_number(name: str) -> int | None:
    m = re.match(r"(\d+)", name)
    return int(m.group(1)) if m else None


def select(table: dict[str, KnotRecord], max_crossings: int | None = None,
           alternating: bool | None = None, names: Iterable[str] | None = None) -> list[KnotRecord]:
    out = []
    wanted = set(names) if names is not None else None
    for rec in table.values():
        if wanted is not None and rec.name not in wanted:
            continue
        if max_crossings is not None and rec.pd.n > max_crossings:
            continue
        if alternating is not None and rec.alternating is not alternating:
            continue
        out.append(rec)
    return out
