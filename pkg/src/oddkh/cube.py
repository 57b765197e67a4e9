"""Hypercube of resolutions: edges, square faces, and face types A, C, X, Y.

Vertex ``I`` is an int whose bit ``c`` is the resolution choice at crossing
``c``.  A face is keyed by its initial corner and an increasing crossing pair
``(b, c)``; both bits are 0 at the corner.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from . import algebra
from .algebra import MERGE, SPLIT, Cobordism
from .linkdiag import (
    DEFAULT_MAX_CROSSINGS,
    REVERSED,
    OrientedDiagram,
    Resolution,
    all_resolutions,
)

A, C, X, Y = "A", "C", "X", "Y"
FACE_TYPES = (A, C, X, Y)


class ClassificationError(RuntimeError):
    """Face data inconsistent with the algebra (a bug, never user error)."""


@dataclass(frozen=True)
class CubeEdge:
    source: int
    target: int
    crossing: int
    kind: str


@dataclass(frozen=True)
class CubeFace:
    corner00: int
    crossings: tuple[int, int]
    face_type: str | None = None

    @property
    def corner11(self) -> int:
        b, c = self.crossings
        return self.corner00 | (1 << b) | (1 << c)

    def edges(self) -> tuple[tuple[int, int], ...]:
        """The four edges as ``(source, crossing)``: two per path, in path order."""
        b, c = self.crossings
        i = self.corner00
        return ((i, b), (i | 1 << b, c), (i, c), (i | 1 << c, b))


def edge_cobordism(r0: Resolution, r1: Resolution, c: int) -> Cobordism:
    """The one-handle from D(I) to D(I + e_c) as a ``Cobordism``."""
    n_arc0 = r0.n_circles - r0.diagram.pd.loops
    n_arc1 = r1.n_circles - r1.diagram.pd.loops
    phi = []
    for circle, arcs in enumerate(r0.circles):
        if arcs:
            phi.append(r1.arc_circle[arcs[0]])
        else:
            phi.append(n_arc1 + circle - n_arc0)
    if r1.n_circles < r0.n_circles:
        arc = r0.surgery_arc(c)
        return Cobordism(MERGE, tuple(phi), r1.n_circles, arc.tail, arc.head)
    arc = r1.surgery_arc(c)  # the rotated arrow at the target
    split_circle = r0.strand_circle(c, 0)
    phi[split_circle] = arc.tail
    return Cobordism(SPLIT, tuple(phi), r1.n_circles, arc.tail, arc.head)


class Cube:
    """Vertices, edges, faces and the global monomial basis of a diagram."""

    def __init__(self, diagram: OrientedDiagram, max_crossings: int = DEFAULT_MAX_CROSSINGS):
        self.diagram = diagram
        self.n = diagram.n
        self.resolutions = all_resolutions(diagram, max_crossings)
        self.n_circles = np.array([r.n_circles for r in self.resolutions], dtype=np.int64)
        self._cobordisms: dict[tuple[int, int], Cobordism] = {}

    @property
    def vertices(self) -> range:
        return range(1 << self.n)

    def cobordism(self, source: int, c: int) -> Cobordism:
        key = (source, c)
        cob = self._cobordisms.get(key)
        if cob is None:
            cob = edge_cobordism(self.resolutions[source], self.resolutions[source | 1 << c], c)
            self._cobordisms[key] = cob
        return cob

    @cached_property
    def edges(self) -> list[CubeEdge]:
        out = []
        for i in self.vertices:
            for c in range(self.n):
                if not i >> c & 1:
                    j = i | 1 << c
                    kind = MERGE if self.n_circles[j] < self.n_circles[i] else SPLIT
                    out.append(CubeEdge(i, j, c, kind))
        return out

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(e.source, e.crossing): k for k, e in enumerate(self.edges)}

    def face_keys(self) -> list[tuple[int, int, int]]:
        out = []
        for i in self.vertices:
            for b, c in combinations(range(self.n), 2):
                if not (i >> b & 1 or i >> c & 1):
                    out.append((i, b, c))
        return out

    @cached_property
    def face_types(self) -> dict[tuple[int, int, int], str]:
        return classify_all(self)

    @property
    def faces(self) -> list[CubeFace]:
        return [CubeFace(i, (b, c), t) for (i, b, c), t in self.face_types.items()]

    # -- global basis -----------------------------------------------------
    @cached_property
    def offsets(self) -> np.ndarray:
        """Start of each vertex's block in the full basis (``2**k`` monomials each)."""
        sizes = np.left_shift(1, self.n_circles)
        return np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)

    @property
    def dimension(self) -> int:
        return int(self.offsets[-1])

    @cached_property
    def generator_vertex(self) -> np.ndarray:
        sizes = np.diff(self.offsets)
        return np.repeat(np.arange(1 << self.n, dtype=np.int64), sizes)

    @cached_property
    def generator_mask(self) -> np.ndarray:
        return np.arange(self.dimension, dtype=np.int64) - self.offsets[self.generator_vertex]

    def crossing_map(self, c: int, flavor: str = "odd") -> sp.csr_matrix:
        """Unsigned sum of the edge maps along crossing ``c`` on the full basis."""
        key = (c, flavor)
        cache = self.__dict__.setdefault("_crossing_maps", {})
        if key in cache:
            return cache[key]
        sources = [i for i in self.vertices if not i >> c & 1]
        cobs = [self.cobordism(i, c) for i in sources]
        src_vertex = np.array(sources, dtype=np.int64)
        sizes = np.left_shift(1, self.n_circles[src_vertex])
        owner = np.repeat(np.arange(len(sources), dtype=np.int64), sizes)
        starts = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
        masks = np.arange(len(owner), dtype=np.int64) - starts[owner]
        cols_all = self.offsets[src_vertex][owner] + masks
        target_offset = self.offsets[src_vertex | (1 << c)][owner]
        rows, cols, vals = [], [], []
        for coeff, target in algebra.batch_edge_terms(cobs, masks, owner, flavor):
            keep = coeff != 0
            rows.append(target[keep] + target_offset[keep])
            cols.append(cols_all[keep])
            vals.append(coeff[keep])
        dim = self.dimension
        if rows:
            m = sp.csr_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                shape=(dim, dim), dtype=np.int64,
            )
        else:
            m = sp.csr_matrix((dim, dim), dtype=np.int64)
        m.sum_duplicates()
        m.eliminate_zeros()
        cache[key] = m
        return m

    def to_json(self) -> dict:
        return {
            "crossings": self.n,
            "circles": [int(k) for k in self.n_circles],
            "edges": [
                {"source": e.source, "target": e.target, "crossing": e.crossing, "kind": e.kind}
                for e in self.edges
            ],
            "faces": [
                {"corner00": i, "crossings": [b, c], "type": t}
                for (i, b, c), t in self.face_types.items()
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


# ---------------------------------------------------------------------------
# Algebraic classification: compare the two composites around a face.

def _compose(first: Cobordism, second: Cobordism, masks: np.ndarray) -> dict[tuple[int, int], int]:
    out: dict[tuple[int, int], int] = {}
    for c1, t1 in algebra.edge_terms(first, masks):
        for c2, t2 in algebra.edge_terms(second, t1):
            coeff = c1 * c2
            for k in np.nonzero(coeff)[0]:
                key = (int(masks[k]), int(t2[k]))
                out[key] = out.get(key, 0) + int(coeff[k])
    return {k: v for k, v in out.items() if v}


def composite_relation(cube: Cube, corner: int, b: int, c: int, masks: np.ndarray | None = None) -> str:
    """'A', 'C' or 'Z' (both composites vanish) from the TQFT maps on ``masks``."""
    if masks is None:
        masks = np.arange(1 << int(cube.n_circles[corner]), dtype=np.int64)
    via_b = _compose(cube.cobordism(corner, b), cube.cobordism(corner | 1 << b, c), masks)
    via_c = _compose(cube.cobordism(corner, c), cube.cobordism(corner | 1 << c, b), masks)
    if not via_b and not via_c:
        return "Z"
    if via_b == {k: -v for k, v in via_c.items()}:
        return A
    if via_b == via_c:
        return C
    raise ClassificationError(f"composites around face {(corner, b, c)} are not related by a sign")


def _touched_masks(res: Resolution, b: int, c: int) -> np.ndarray:
    """All monomials on the circles met by the two surgery arcs."""
    circles = sorted({res.surgery_arc(b).tail, res.surgery_arc(b).head,
                      res.surgery_arc(c).tail, res.surgery_arc(c).head})
    out = []
    for sub in range(1 << len(circles)):
        out.append(sum(1 << circles[i] for i in range(len(circles)) if sub >> i & 1))
    return np.array(out, dtype=np.int64)


def classify_face(cube: Cube, face: CubeFace | tuple[int, int, int]) -> str:
    """Type of one face: composites first, then the X/Y arrow pattern.

    Circles away from both arcs factor out of every composite, so the maps are
    evaluated only on monomials in the touched circles.
    """
    if isinstance(face, CubeFace):
        corner, (b, c) = face.corner00, face.crossings
    else:
        corner, b, c = face
    if corner >> b & 1 or corner >> c & 1 or b == c:
        raise ClassificationError(f"{(corner, b, c)} is not a face with initial corner {corner}")
    res = cube.resolutions[corner]
    relation = composite_relation(cube, corner, b, c, _touched_masks(res, b, c))
    if relation != "Z":
        return relation
    return ladybug_type(res, b, c)


# ---------------------------------------------------------------------------
# Combinatorial classification from the planar data at the initial corner.

def _side_and_positions(res: Resolution, circle: int, crossings: tuple[int, ...]):
    """Walk ``circle``; for each crossing of interest record sides and where its feet sit.

    Returns ``{crossing: (side, {strand: position})}`` where strand 0 is the
    resolved strand through slots 0,1 and strand 1 the one through slots 2,3,
    side is +1 when the surgery arc is on the left of the walk.
    """
    walk = res.passages(circle)
    info: dict[int, tuple[list[int], dict[int, int]]] = {x: ([], {}) for x in crossings}
    for pos, (x, entry, exit_) in enumerate(walk):
        if x not in info:
            continue
        info[x][0].append(1 if exit_ == (entry + 1) % 4 else -1)
        info[x][1][0 if entry in (0, 1) else 1] = pos
    out = {}
    for x, (sides, where) in info.items():
        if len(set(sides)) != 1 or len(where) != 2:
            raise ClassificationError(f"surgery arc at crossing {x} is not a chord of circle {circle}")
        out[x] = (sides[0], where)
    return out, len(walk)


def ladybug_type(res: Resolution, b: int, c: int) -> str:
    """X or Y for two interleaved chords on one circle.

    Walk the circle; with s the side of the first chord, t1 -> h1 its feet in
    arrow order and alpha the stretch of the walk from t1 to h1, the face is X
    when ``s`` (negated if the second chord's tail lies on alpha) is +1.  The
    rule flips under reversing either arrow and is unchanged by walking the
    other way or swapping the chords.
    """
    z1, z2 = res.surgery_arc(b), res.surgery_arc(c)
    circle = z1.tail
    if not (z1.tail == z1.head == z2.tail == z2.head):
        raise ClassificationError("ladybug faces need both chords on one circle")
    info, length = _side_and_positions(res, circle, (b, c))
    side1, where1 = info[b]
    side2, where2 = info[c]
    if side1 != -side2:
        raise ClassificationError("interleaved chords must lie on opposite sides of their circle")

    def feet(x, where):
        tail, head = where[0], where[1]
        if res.diagram.arrows[x] == REVERSED:
            tail, head = head, tail
        return tail, head

    t1, h1 = feet(b, where1)
    t2, h2 = feet(c, where2)

    def on_stretch(p, start, end):
        return 0 < (p - start) % length < (end - start) % length

    if on_stretch(t2, t1, h1) == on_stretch(h2, t1, h1):
        raise ClassificationError("chords are not interleaved")
    eps = -side1 if on_stretch(t2, t1, h1) else side1
    return X if eps > 0 else Y


def match_face_pattern(res: Resolution, b: int, c: int) -> str:
    """Face type from circle incidence and chord interleaving alone."""
    z1, z2 = res.surgery_arc(b), res.surgery_arc(c)
    c1 = {z1.tail, z1.head}
    c2 = {z2.tail, z2.head}
    split1, split2 = z1.is_split_arc, z2.is_split_arc
    if not c1 & c2:
        return A if split1 and split2 else C
    if split1 and split2:
        # same circle: interleaved chords turn the second split into a merge
        info, length = _side_and_positions(res, z1.tail, (b, c))
        p = sorted(info[b][1].values())
        q = list(info[c][1].values())
        inside = [p[0] < x < p[1] for x in q]
        if inside[0] != inside[1]:
            return ladybug_type(res, b, c)
        return A
    if split1 != split2:
        return C
    if c1 != c2:
        return C
    # two merges of the same pair: afterwards the second arc splits the result
    return A if z1.tail == z2.tail else C


def classify_all(cube: Cube, check: bool = True) -> dict[tuple[int, int, int], str]:
    """Classify every face.  With ``check``, the algebraic relation must agree."""
    keys = cube.face_keys()
    types = {key: match_face_pattern(cube.resolutions[key[0]], key[1], key[2]) for key in keys}
    if check and keys:
        algebraic = algebraic_relations(cube)
        for key, t in types.items():
            rel = algebraic[key]
            expected = "Z" if t in (X, Y) else t
            if rel != expected:
                raise ClassificationError(
                    f"face {key}: pattern says {t}, composites say {rel}"
                )
    return types


def algebraic_relations(cube: Cube, flavor: str = "odd") -> dict[tuple[int, int, int], str]:
    """'A', 'C' or 'Z' for every face, from the composites on the full basis.

    Both composites are evaluated as sparse products of crossing maps, so each
    crossing pair is handled in one pass over all its faces.  Cached on the cube.
    """
    cache = cube.__dict__.setdefault("_relations", {})
    if flavor in cache:
        return cache[flavor]
    out = {}
    gv = cube.generator_vertex
    n = cube.n
    for b, c in combinations(range(n), 2):
        db, dc = cube.crossing_map(b, flavor), cube.crossing_map(c, flavor)
        via_b = (dc @ db).tocsc()
        via_c = (db @ dc).tocsc()
        nz_b = _nonzero_columns(via_b)
        nz_c = _nonzero_columns(via_c)
        nz_sum = _nonzero_columns(via_b + via_c)
        nz_diff = _nonzero_columns(via_b - via_c)
        corners = [i for i in cube.vertices if not (i >> b & 1 or i >> c & 1)]
        verdict = {i: set() for i in corners}
        for name, cols in (("b", nz_b), ("c", nz_c), ("sum", nz_sum), ("diff", nz_diff)):
            for v in np.unique(gv[cols]):
                verdict[int(v)].add(name)
        for i in corners:
            flags = verdict[i]
            if not flags:
                rel = "Z"
            elif "sum" not in flags and "b" in flags:
                rel = A
            elif "diff" not in flags and "b" in flags:
                rel = C
            else:
                raise ClassificationError(f"face {(i, b, c)}: composites not related by a sign")
            out[(i, b, c)] = rel
    cache[flavor] = out
    return out


def _nonzero_columns(m: sp.csc_matrix) -> np.ndarray:
    m = m.tocsc()
    m.eliminate_zeros()
    return np.nonzero(np.diff(m.indptr))[0]


def check_face_relations(cube: Cube, types: dict[tuple[int, int, int], str] | None = None,
                         flavor: str = "odd") -> list[tuple[int, int, int]]:
    """Faces whose composites disagree with their type, on every basis element."""
    types = cube.face_types if types is None else types
    rel = algebraic_relations(cube, flavor)
    bad = []
    for key, t in types.items():
        expected = "Z" if t in (X, Y) else t
        if rel[key] != expected:
            bad.append(key)
    return bad


def subcube_faces(corner: int, b: int, c: int, d: int) -> list[tuple[int, int, int]]:
    """The six faces of the 3-cube at ``corner`` spanned by crossings b < c < d."""
    return [
        (corner, b, c), (corner | 1 << d, b, c),
        (corner, b, d), (corner | 1 << c, b, d),
        (corner, c, d), (corner | 1 << b, c, d),
    ]


def verify_cube_parity(cube: Cube, types: dict[tuple[int, int, int], str] | None = None):
    """First 3-subcube with an odd count of A+X or A+Y faces, else ``None``."""
    types = cube.face_types if types is None else types
    for corner in cube.vertices:
        for b, c, d in combinations(range(cube.n), 3):
            if corner >> b & 1 or corner >> c & 1 or corner >> d & 1:
                continue
            faces = subcube_faces(corner, b, c, d)
            counts = {t: 0 for t in FACE_TYPES}
            for f in faces:
                counts[types[f]] += 1
            if (counts[A] + counts[X]) % 2 or (counts[A] + counts[Y]) % 2:
                return {"corner": corner, "crossings": [b, c, d],
                        "faces": {str(list(f)): types[f] for f in faces}}
    return None


def build_cube(diagram: OrientedDiagram, max_crossings: int = DEFAULT_MAX_CROSSINGS) -> Cube:
    return Cube(diagram, max_crossings)
