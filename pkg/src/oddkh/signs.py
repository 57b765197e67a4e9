"""Edge assignments: sign choices on cube edges with prescribed face parities.

Signs are kept in GF(2) form only at the interface with the solver
(0 for +1, 1 for -1); an ``EdgeAssignment`` stores plain +-1 values in an
``(n, 2**n)`` array indexed by ``[crossing, source vertex]``, with 0 where
there is no edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .cube import A, C, X, Y, Cube

TYPE_X = "X"
TYPE_Y = "Y"


class AssignmentError(RuntimeError):
    """The target cochain is not a coboundary (face types are inconsistent)."""


Face = tuple[int, int, int]


def _faces(n: int):
    for i in range(1 << n):
        for b, c in combinations(range(n), 2):
            if not (i >> b & 1 or i >> c & 1):
                yield (i, b, c)


def target_cochain(types: dict[Face, str], t: str = TYPE_X) -> dict[Face, int]:
    """1 on faces that must be odd, 0 on faces that must be even."""
    if t == TYPE_X:
        odd = (C, Y)
    elif t == TYPE_Y:
        odd = (C, X)
    else:
        raise ValueError(f"assignment type must be X or Y, not {t!r}")
    return {f: int(ft in odd) for f, ft in types.items()}


@dataclass(frozen=True, eq=False)
class EdgeAssignment:
    values: np.ndarray
    assignment_type: str | None = None

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __call__(self, source: int, crossing: int) -> int:
        return int(self.values[crossing, source])

    def __eq__(self, other) -> bool:
        return isinstance(other, EdgeAssignment) and np.array_equal(self.values, other.values)

    def face_parity(self, face: Face) -> int:
        i, b, c = face
        v = self.values
        prod = v[b, i] * v[c, i | 1 << b] * v[c, i] * v[b, i | 1 << c]
        return int(prod < 0)

    def negated(self, source: int, crossing: int) -> "EdgeAssignment":
        v = self.values.copy()
        v[crossing, source] *= -1
        return EdgeAssignment(v, None)

    def to_json(self) -> list[dict]:
        out = []
        for i in range(1 << self.n):
            for c in range(self.n):
                if not i >> c & 1:
                    out.append({"source": i, "target": i | 1 << c, "crossing": c,
                                "sign": int(self.values[c, i])})
        return out


def all_plus(n: int) -> EdgeAssignment:
    v = np.zeros((n, 1 << n), dtype=np.int8)
    for c in range(n):
        for i in range(1 << n):
            if not i >> c & 1:
                v[c, i] = 1
    return EdgeAssignment(v)


def _low(i: int) -> int:
    return (i & -i).bit_length() - 1


def solve_assignment(n: int, phi: dict[Face, int], t: str | None = None) -> EdgeAssignment:
    """Spanning-tree propagation; every face checked afterwards.

    Tree: the edge into ``J`` that flips the lowest set bit of ``J``, with sign
    +1.  Any other edge ``I -> I + e_c`` has ``b = low(I) < c`` and is forced by
    the face at ``I - e_b`` on crossings ``(b, c)``, whose other non-tree edge
    starts one level lower.
    """
    eps = all_plus(n)
    v = eps.values
    order = sorted(range(1 << n), key=lambda i: (bin(i).count("1"), i))
    for i in order:
        if i == 0:
            continue
        b = _low(i)
        base = i ^ (1 << b)
        for c in range(b + 1, n):
            if i >> c & 1:
                continue
            # face (base, b, c): v[b,base] v[c,i] v[c,base] v[b,base|c] has parity phi
            want = -1 if phi[(base, b, c)] else 1
            v[c, i] = want * v[b, base] * v[c, base] * v[b, base | 1 << c]
    result = EdgeAssignment(v, t)
    bad = verify_assignment(result, phi)
    if bad is not None:
        raise AssignmentError(f"face {bad} cannot satisfy its parity: the cochain is not a coboundary")
    return result


def solve_assignment_dense(n: int, phi: dict[Face, int], t: str | None = None) -> EdgeAssignment:
    """Gaussian elimination over GF(2) on the face-by-edge system (small cubes)."""
    edges = [(i, c) for i in range(1 << n) for c in range(n) if not i >> c & 1]
    col = {e: k for k, e in enumerate(edges)}
    pivots: dict[int, tuple[int, int]] = {}  # pivot column -> (row bits, rhs)
    for face, rhs in phi.items():
        i, b, c = face
        row = 0
        for e in ((i, b), (i | 1 << b, c), (i, c), (i | 1 << c, b)):
            row ^= 1 << col[e]
        while row:
            p = row.bit_length() - 1
            if p not in pivots:
                pivots[p] = (row, rhs)
                break
            prow, prhs = pivots[p]
            row ^= prow
            rhs ^= prhs
        else:
            if rhs:
                raise AssignmentError(f"inconsistent system at face {face}")
    x = 0
    for p in sorted(pivots):  # back-substitute from the lowest pivot up
        row, rhs = pivots[p]
        rest = row & ~(1 << p)
        if bin(rest & x).count("1") % 2 != rhs:
            x |= 1 << p
    eps = all_plus(n)
    for k, (i, c) in enumerate(edges):
        if x >> k & 1:
            eps.values[c, i] = -1
    result = EdgeAssignment(eps.values, t)
    bad = verify_assignment(result, phi)
    if bad is not None:
        raise AssignmentError(f"dense solution fails at face {bad}")
    return result


def verify_assignment(eps: EdgeAssignment, phi: dict[Face, int]) -> Face | None:
    """First face whose edge-sign product disagrees with ``phi``."""
    for face, want in phi.items():
        if eps.face_parity(face) != want:
            return face
    return None


def violated_faces(eps: EdgeAssignment, phi: dict[Face, int]) -> list[Face]:
    return [f for f, want in phi.items() if eps.face_parity(f) != want]


def gauge_transform(eps: EdgeAssignment, eta) -> EdgeAssignment:
    """``eps'(e) = eta(source) eta(target) eps(e)``; ``eta`` is a sequence or mapping."""
    n = eps.n
    v = eps.values.copy()
    for c in range(n):
        for i in range(1 << n):
            if not i >> c & 1:
                v[c, i] *= eta[i] * eta[i | 1 << c]
    return EdgeAssignment(v, eps.assignment_type)


def find_gauge(eps1: EdgeAssignment, eps2: EdgeAssignment) -> list[int] | None:
    """``eta`` with ``gauge_transform(eps1, eta) == eps2``, or ``None``."""
    n = eps1.n
    eta = [1] * (1 << n)
    for j in range(1, 1 << n):
        b = _low(j)
        i = j ^ (1 << b)
        eta[j] = eta[i] * int(eps1.values[b, i]) * int(eps2.values[b, i])
    if gauge_transform(eps1, eta) != eps2:
        return None
    return eta


def edge_assignment(cube: Cube, t: str = TYPE_X) -> EdgeAssignment:
    return solve_assignment(cube.n, target_cochain(cube.face_types, t), t)


def even_signs(n: int) -> EdgeAssignment:
    """``(-1)^(number of 1s of I before c)`` on the edge of ``I`` along crossing ``c``."""
    v = np.zeros((n, 1 << n), dtype=np.int8)
    for c in range(n):
        for i in range(1 << n):
            if not i >> c & 1:
                v[c, i] = -1 if bin(i & ((1 << c) - 1)).count("1") % 2 else 1
    return EdgeAssignment(v, None)
