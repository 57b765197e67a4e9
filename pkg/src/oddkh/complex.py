"""Bigraded chain complexes built from the cube.

Generators are pairs (vertex I, monomial mask), ordered by vertex and then
mask.  Gradings: ``M0 = |I|``, ``m = M0 - n_minus``, and
``s = (k - 2r) + n_plus - 2 n_minus + M0`` for a degree-``r`` monomial on
``k`` circles.  The differential raises ``m`` by one and preserves ``s``.
The matrix ``d`` acts on column vectors: ``d[target, source]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .cube import Cube
from .linkdiag import OrientedDiagram
from .signs import TYPE_X, EdgeAssignment, edge_assignment


class ComplexError(RuntimeError):
    """The assembled differential does not square to zero."""


@dataclass(eq=False)
class ChainComplex:
    m: np.ndarray
    s: np.ndarray
    d: sp.csr_matrix
    vertex: np.ndarray
    mask: np.ndarray
    flavor: str = "odd"
    reduced: str | None = None  # None, "basepoint", "kernel"
    info: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return len(self.m)

    def ranks(self) -> dict[tuple[int, int], int]:
        out: dict[tuple[int, int], int] = {}
        for a, b in zip(self.m.tolist(), self.s.tolist()):
            out[(a, b)] = out.get((a, b), 0) + 1
        return dict(sorted(out.items()))

    def square_is_zero(self) -> bool:
        dd = (self.d @ self.d).tocoo()
        return not np.any(dd.data)

    def check_square(self) -> None:
        if not self.square_is_zero():
            dd = (self.d @ self.d).tocoo()
            k = int(np.nonzero(dd.data)[0][0])
            raise ComplexError(
                f"d^2 != 0: entry {int(dd.data[k])} from generator {int(dd.col[k])} "
                f"to {int(dd.row[k])}"
            )

    def check_gradings(self) -> None:
        coo = self.d.tocoo()
        if np.any(self.m[coo.row] != self.m[coo.col] + 1):
            raise ComplexError("differential does not raise m by one")
        if np.any(self.s[coo.row] != self.s[coo.col]):
            raise ComplexError("differential does not preserve s")

    def restrict(self, keep: np.ndarray, s_shift: int = 0, reduced: str | None = None) -> "ChainComplex":
        """Sub- or quotient complex on the generators ``keep`` (caller checks closure)."""
        idx = np.nonzero(keep)[0] if keep.dtype == bool else keep
        return ChainComplex(
            self.m[idx], self.s[idx] + s_shift, self.d[idx][:, idx].tocsr(),
            self.vertex[idx], self.mask[idx], self.flavor,
            reduced if reduced is not None else self.reduced, dict(self.info),
        )

    def mod(self, p: int) -> sp.csr_matrix:
        d = self.d.copy()
        d.data %= p
        d.eliminate_zeros()
        return d

    def to_json(self, with_generators: bool = True) -> dict:
        coo = self.d.tocoo()
        order = np.lexsort((coo.row, coo.col))
        out = {
            "flavor": self.flavor,
            "reduced": self.reduced,
            "ranks": [{"m": a, "s": b, "rank": r} for (a, b), r in self.ranks().items()],
            "differential": [[int(coo.row[k]), int(coo.col[k]), int(coo.data[k])] for k in order],
        }
        if with_generators:
            out["generators"] = [
                [int(a), int(b), int(v), int(w)]
                for a, b, v, w in zip(self.m, self.s, self.vertex, self.mask)
            ]
        out.update(self.info)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def gradings(cube: Cube) -> tuple[np.ndarray, np.ndarray]:
    d = cube.diagram
    gv, gm = cube.generator_vertex, cube.generator_mask
    m0 = np.bitwise_count(gv).astype(np.int64)
    k = cube.n_circles[gv]
    r = np.bitwise_count(gm).astype(np.int64)
    m = m0 - d.n_minus
    s = (k - 2 * r) + d.n_plus - 2 * d.n_minus + m0
    return m, s


def signed_sum(cube: Cube, eps: EdgeAssignment, flavor: str) -> sp.csr_matrix:
    gv = cube.generator_vertex
    total = sp.csr_matrix((cube.dimension, cube.dimension), dtype=np.int64)
    for c in range(cube.n):
        col_sign = eps.values[c][gv].astype(np.int64)
        total = total + cube.crossing_map(c, flavor) @ sp.diags(col_sign, dtype=np.int64)
    total = total.tocsr()
    total.eliminate_zeros()
    total.sort_indices()
    return total


def assemble(diagram: OrientedDiagram | Cube, eps: EdgeAssignment | str | None = None,
             check: bool = False) -> ChainComplex:
    """Odd complex ``sum_e eps(e) F_e``; ``eps`` may be an assignment type."""
    cube = diagram if isinstance(diagram, Cube) else Cube(diagram)
    if eps is None or isinstance(eps, str):
        eps = edge_assignment(cube, eps or TYPE_X)
    if eps.n != cube.n:
        raise ValueError("edge assignment is for a different cube")
    m, s = gradings(cube)
    c = ChainComplex(m, s, signed_sum(cube, eps, "odd"), cube.generator_vertex,
                     cube.generator_mask, "odd")
    if check:
        c.check_square()
        c.check_gradings()
    return c


def basepoint_circles(cube: Cube, p: int | None = None) -> np.ndarray:
    """Index of the circle through arc ``p`` at each vertex.

    ``None`` picks circle 0 everywhere: the circle through arc 1, or the first
    free loop of a crossingless diagram.
    """
    if p is None:
        if cube.n_circles.min() < 1:
            raise ValueError("the empty diagram has no basepoint")
        return np.zeros(1 << cube.n, dtype=np.int64)
    if p not in cube.diagram.pd.arcs:
        raise ValueError(f"arc {p} is not an arc of the diagram")
    return np.array([r.arc_circle[p] for r in cube.resolutions], dtype=np.int64)


def reduce_basepoint(c: ChainComplex, cube: Cube, p: int | None = None) -> ChainComplex:
    """Subcomplex of monomials containing the circle through ``p``; ``s`` raised by 1."""
    circ = basepoint_circles(cube, p)[c.vertex]
    keep = ((c.mask >> circ) & 1).astype(bool)
    out = c.restrict(keep, s_shift=1, reduced="basepoint")
    out.info["basepoint"] = 1 if p is None else p
    return out


def kernel_basis(n_circles: int) -> list[tuple[int, dict[int, int]]]:
    """``b_S = wedge_{i in S}(a_i - a_0)`` for ``S`` avoiding circle 0, expanded in monomials."""
    out = []
    for sub in range(1 << max(n_circles - 1, 0)):
        S = sub << 1
        terms = {S: 1}
        below = 0
        for j in range(1, n_circles):
            if S >> j & 1:
                # replace a_j by -a_0, then move a_0 to the front past ``below`` factors
                terms[(S & ~(1 << j)) | 1] = -1 if below % 2 == 0 else 1
                below += 1
        out.append((S, terms))
    return out


def reduce_kernel(c: ChainComplex, cube: Cube) -> ChainComplex:
    """Complex on the subalgebra generated by differences of circles; ``s`` lowered by 1.

    Each ``b_S`` is written in monomials (matrix ``B``); the image of ``d`` is
    read back through the monomials avoiding circle 0, since ``a_0 ^ b_T`` is
    ``a_0 ^ a_T``.
    """
    if c.reduced:
        raise ValueError("reduce_kernel expects an unreduced complex")
    offsets = cube.offsets
    rows, cols, vals = [], [], []
    red_vertex, red_mask = [], []
    for v in range(1 << cube.n):
        for S, terms in kernel_basis(int(cube.n_circles[v])):
            j = len(red_vertex)
            red_vertex.append(v)
            red_mask.append(S)
            for mono, coeff in terms.items():
                rows.append(offsets[v] + mono)
                cols.append(j)
                vals.append(coeff)
    red_vertex = np.array(red_vertex, dtype=np.int64)
    red_mask = np.array(red_mask, dtype=np.int64)
    B = sp.csr_matrix((vals, (rows, cols)), shape=(c.dimension, len(red_vertex)), dtype=np.int64)
    full_index = offsets[red_vertex] + red_mask
    k = len(red_vertex)
    P = sp.csr_matrix((np.ones(k, dtype=np.int64), (np.arange(k), full_index)),
                      shape=(k, c.dimension))
    d = (P @ c.d @ B).tocsr()
    d.eliminate_zeros()
    out = ChainComplex(c.m[full_index], c.s[full_index] - 1, d, red_vertex, red_mask,
                       c.flavor, "kernel", dict(c.info))
    return out


@dataclass(eq=False)
class SkeinSplit:
    """C = cone(C0 -> C1) for one crossing: C1 is the subcomplex I(x) = 1."""

    crossing: int
    quotient: ChainComplex  # C0, generators with I(x) = 0
    sub: ChainComplex       # C1
    connecting: sp.csr_matrix  # block of d from C0 to C1


def skein_decompose(c: ChainComplex, x: int) -> SkeinSplit:
    on = ((c.vertex >> x) & 1).astype(bool)
    i0, i1 = np.nonzero(~on)[0], np.nonzero(on)[0]
    if c.d[i0][:, i1].nnz:
        raise ComplexError("I(x) = 1 part is not a subcomplex")
    return SkeinSplit(x, c.restrict(i0), c.restrict(i1), c.d[i1][:, i0].tocsr())


def with_signs(c: ChainComplex, cube: Cube, eps: EdgeAssignment) -> ChainComplex:
    """Same generators, differential rebuilt with ``eps`` (odd flavor only)."""
    return replace(c, d=signed_sum(cube, eps, c.flavor))
