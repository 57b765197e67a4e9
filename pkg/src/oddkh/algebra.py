"""Exterior-algebra TQFT and its even (Frobenius-algebra) counterpart.

An exterior monomial on circles ``c_1 < c_2 < ... < c_r`` is stored as the
bitmask with those bits set, and stands for ``a_{c_1} ^ ... ^ a_{c_r}``.
The even theory reuses the same masks: a set bit means the circle is
labelled ``x``, a clear bit means ``1``.

Two layers live here.  ``ExteriorElement`` and the four elementary maps work
on single elements and serve as the readable reference.  ``edge_terms`` and
``even_edge_terms`` compute the same maps for a whole array of basis
monomials at once; the chain complex is built from those.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

MERGE = "merge"
SPLIT = "split"
BIRTH = "birth"
DEATH = "death"


def bits(mask: int) -> Iterator[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def monomial(*circles: int) -> tuple[int, int]:
    """Mask and sign of ``a_{c_1} ^ a_{c_2} ^ ...`` in the given (unsorted) order."""
    sign, mask = 1, 0
    for c in circles:
        s, mask = wedge_generator(c, mask)
        if s == 0:
            return 0, 0
        sign *= s
    # wedge_generator prepends, so the product above is c_k ^ ... ^ c_1
    k = len(circles)
    if (k * (k - 1) // 2) % 2:
        sign = -sign
    return sign, mask


def wedge_generator(g: int, mask: int) -> tuple[int, int]:
    """``a_g ^ m`` as ``(sign, mask)``; sign 0 when ``a_g`` already occurs."""
    if mask >> g & 1:
        return 0, 0
    below = bin(mask & ((1 << g) - 1)).count("1")
    return (-1 if below & 1 else 1), mask | (1 << g)


def map_monomial(mask: int, phi: tuple[int, ...]) -> tuple[int, int]:
    """Image of a monomial under the algebra map induced by ``a_i -> a_{phi[i]}``."""
    images = [phi[i] for i in bits(mask)]
    out = 0
    for j in images:
        if out >> j & 1:
            return 0, 0
        out |= 1 << j
    inversions = sum(1 for i in range(len(images)) for j in range(i + 1, len(images))
                     if images[i] > images[j])
    return (-1 if inversions & 1 else 1), out


class ExteriorElement:
    """Integer combination of exterior monomials on ``n`` circles."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[int, int] | None = None):
        self.n = n
        self.terms: dict[int, int] = {}
        if terms:
            for m, c in terms.items():
                if m >> n:
                    raise ValueError(f"monomial {m:b} uses circles beyond {n}")
                if c:
                    self.terms[m] = self.terms.get(m, 0) + c
            self.terms = {m: c for m, c in self.terms.items() if c}

    @classmethod
    def one(cls, n: int) -> "ExteriorElement":
        return cls(n, {0: 1})

    @classmethod
    def generator(cls, n: int, c: int) -> "ExteriorElement":
        return cls(n, {1 << c: 1})

    @classmethod
    def wedge_of(cls, n: int, *circles: int) -> "ExteriorElement":
        s, m = monomial(*circles)
        return cls(n, {m: s} if s else {})

    def __add__(self, other: "ExteriorElement") -> "ExteriorElement":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return ExteriorElement(max(self.n, other.n), out)

    def __neg__(self) -> "ExteriorElement":
        return ExteriorElement(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "ExteriorElement") -> "ExteriorElement":
        return self + (-other)

    def __rmul__(self, k: int) -> "ExteriorElement":
        return ExteriorElement(self.n, {m: k * c for m, c in self.terms.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExteriorElement):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms):
            name = "^".join(f"a{i}" for i in bits(m)) or "1"
            parts.append(f"{self.terms[m]:+d}*{name}")
        return " ".join(parts)

    def is_zero(self) -> bool:
        return not self.terms

    def wedge(self, other: "ExteriorElement") -> "ExteriorElement":
        out: dict[int, int] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                if m1 & m2:
                    continue
                sign = 1
                # move each generator of m2 leftwards past the larger ones of m1
                for g in bits(m2):
                    above = bin(m1 >> (g + 1)).count("1")
                    if above & 1:
                        sign = -sign
                out[m1 | m2] = out.get(m1 | m2, 0) + sign * c1 * c2
        return ExteriorElement(max(self.n, other.n), out)

    def degree_parts(self) -> dict[int, "ExteriorElement"]:
        out: dict[int, dict[int, int]] = {}
        for m, c in self.terms.items():
            out.setdefault(bin(m).count("1"), {})[m] = c
        return {r: ExteriorElement(self.n, t) for r, t in out.items()}


def q0_grading(n_circles: int, mask: int) -> int:
    """Internal q-grading ``dim V - 2r`` of a monomial of degree ``r``."""
    return n_circles - 2 * bin(mask).count("1")


@dataclass(frozen=True)
class Cobordism:
    """Elementary cobordism between circle sets of sizes ``n_source``, ``n_target``.

    ``phi`` sends each source circle to its target circle (for a split, the
    divided circle goes to ``a1``; for a death the capped circle maps to -1).
    Merge: ``a1``, ``a2`` are the joined source circles.  Split: ``a1``, ``a2``
    are the new target circles, with the arrow pointing from ``a1`` to ``a2``.
    Birth: ``a1`` is the new target circle.  Death: ``a1`` is the capped source
    circle.
    """

    kind: str
    phi: tuple[int, ...]
    n_target: int
    a1: int
    a2: int = -1

    @property
    def n_source(self) -> int:
        return len(self.phi)

    def __post_init__(self):
        if self.kind not in (MERGE, SPLIT, BIRTH, DEATH):
            raise ValueError(f"unknown cobordism kind {self.kind!r}")
        if self.kind == MERGE and not (0 <= self.a1 < self.n_source and 0 <= self.a2 < self.n_source):
            raise ValueError("merge circles not present in source")
        if self.kind == MERGE and self.a1 == self.a2:
            raise ValueError("merge needs two distinct circles")
        if self.kind == SPLIT and not (0 <= self.a1 < self.n_target and 0 <= self.a2 < self.n_target):
            raise ValueError("split circles not present in target")


def _check_source(v: ExteriorElement, cob: Cobordism) -> None:
    if v.n != cob.n_source:
        raise ValueError(f"element lives on {v.n} circles, cobordism expects {cob.n_source}")


def merge_map(v: ExteriorElement, cob: Cobordism) -> ExteriorElement:
    """Projection ``V(S1) -> V(S1)/(a1 - a2)``, extended to the exterior algebra."""
    _check_source(v, cob)
    out: dict[int, int] = {}
    for m, c in v.terms.items():
        s, t = map_monomial(m, cob.phi)
        if s:
            out[t] = out.get(t, 0) + s * c
    return ExteriorElement(cob.n_target, out)


def split_map(v: ExteriorElement, cob: Cobordism) -> ExteriorElement:
    """``w -> (a1 - a2) ^ lift(w)``, the lift sending the split circle to ``a1``."""
    _check_source(v, cob)
    out: dict[int, int] = {}
    for m, c in v.terms.items():
        s, t = map_monomial(m, cob.phi)
        for g, k in ((cob.a1, 1), (cob.a2, -1)):
            s2, t2 = wedge_generator(g, t)
            if s2:
                out[t2] = out.get(t2, 0) + k * s * s2 * c
    return ExteriorElement(cob.n_target, out)


def birth_map(v: ExteriorElement, cob: Cobordism) -> ExteriorElement:
    _check_source(v, cob)
    out = {}
    for m, c in v.terms.items():
        s, t = map_monomial(m, cob.phi)
        out[t] = s * c
    return ExteriorElement(cob.n_target, out)


def death_map(v: ExteriorElement, cob: Cobordism) -> ExteriorElement:
    """Contraction with the dual of the capped circle ``a1``."""
    _check_source(v, cob)
    a = cob.a1
    rest = [i for i in range(cob.n_source) if i != a]
    phi = tuple(cob.phi[i] for i in rest)
    out: dict[int, int] = {}
    for m, c in v.terms.items():
        if not m >> a & 1:
            continue
        below = bin(m & ((1 << a) - 1)).count("1")
        sign = -1 if below & 1 else 1
        # re-index the remaining generators onto the surviving circles
        sub = 0
        for j, i in enumerate(rest):
            if m >> i & 1:
                sub |= 1 << j
        s, t = map_monomial(sub, phi)
        out[t] = out.get(t, 0) + sign * s * c
    return ExteriorElement(cob.n_target, out)


def apply_cobordism(v: ExteriorElement, cob: Cobordism) -> ExteriorElement:
    return {MERGE: merge_map, SPLIT: split_map, BIRTH: birth_map, DEATH: death_map}[cob.kind](v, cob)


# ---------------------------------------------------------------------------
# Even (Khovanov) TQFT on labellings; coefficients over Z.

class EvenElement:
    """Integer combination of labellings; bit ``i`` set means circle ``i`` is ``x``."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[int, int] | None = None):
        self.n = n
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    def __eq__(self, other) -> bool:
        return isinstance(other, EvenElement) and self.terms == other.terms

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        return " ".join(
            f"{c:+d}*" + "(" + ",".join("x" if m >> i & 1 else "1" for i in range(self.n)) + ")"
            for m, c in sorted(self.terms.items())
        )


def even_map(v: EvenElement, cob: Cobordism) -> EvenElement:
    """Multiplication on merges, ``1 -> 1x + x1``, ``x -> xx`` on splits."""
    out: dict[int, int] = {}

    def add(m, c):
        out[m] = out.get(m, 0) + c

    for m, c in v.terms.items():
        t = 0
        for i in bits(m):
            t |= 1 << cob.phi[i]
        if cob.kind == MERGE:
            if m >> cob.a1 & 1 and m >> cob.a2 & 1:
                continue
            add(t, c)
        elif cob.kind == SPLIT:
            if t >> cob.a1 & 1:
                add(t | 1 << cob.a2, c)
            else:
                add(t | 1 << cob.a1, c)
                add(t | 1 << cob.a2, c)
        else:
            raise ValueError("even TQFT here only needs merges and splits")
    return EvenElement(cob.n_target, out)


# ---------------------------------------------------------------------------
# Vectorised edge maps: every basis monomial of the source at once.

def _parity(x: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(x) & 1).astype(np.int64)


def map_masks(masks: np.ndarray, phi: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``map_monomial``: returns (sign in {-1,0,1}, image mask)."""
    masks = masks.astype(np.int64, copy=False)
    out = np.zeros_like(masks)
    odd = np.zeros_like(masks)
    alive = np.ones(masks.shape, dtype=bool)
    n = len(phi)
    bit = [(masks >> i) & 1 for i in range(n)]
    for i in range(n):
        out |= bit[i] << phi[i]
        for j in range(i + 1, n):
            if phi[i] > phi[j]:
                odd ^= bit[i] & bit[j]
            elif phi[i] == phi[j]:
                alive &= (bit[i] & bit[j]) == 0
    sign = np.where(alive, 1 - 2 * odd, 0)
    return sign, out


def wedge_masks(g: int, masks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``wedge_generator``."""
    below = _parity(masks & ((1 << g) - 1))
    sign = np.where((masks >> g) & 1, 0, 1 - 2 * below)
    return sign, masks | (1 << g)


def edge_terms(cob: Cobordism, masks: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Odd edge map on source monomials as a list of (coefficient, target mask) arrays.

    Entry ``k`` of each pair is one term of the image of ``masks[k]``; zero
    coefficients mark absent terms.
    """
    sign, t = map_masks(masks, cob.phi)
    if cob.kind == MERGE:
        return [(sign, t)]
    if cob.kind == SPLIT:
        s1, t1 = wedge_masks(cob.a1, t)
        s2, t2 = wedge_masks(cob.a2, t)
        return [(sign * s1, t1), (-sign * s2, t2)]
    raise ValueError("edge maps are merges or splits")


def even_edge_terms(cob: Cobordism, masks: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Even edge map, same layout as ``edge_terms`` (all coefficients 0 or 1)."""
    masks = masks.astype(np.int64, copy=False)
    t = np.zeros_like(masks)
    for i, j in enumerate(cob.phi):
        t |= ((masks >> i) & 1) << j
    if cob.kind == MERGE:
        dead = ((masks >> cob.a1) & 1) & ((masks >> cob.a2) & 1)
        return [(1 - dead, t)]
    if cob.kind == SPLIT:
        has_x = (t >> cob.a1) & 1
        # x -> x(x): t already carries a1; 1 -> x1 + 1x
        first = (1 - has_x, t | (1 << cob.a1))
        second = (np.ones_like(masks), t | (1 << cob.a2))
        return [first, second]
    raise ValueError("edge maps are merges or splits")


def batch_edge_terms(cobs: list[Cobordism], masks: np.ndarray, owner: np.ndarray,
                     flavor: str = "odd") -> list[tuple[np.ndarray, np.ndarray]]:
    """``edge_terms`` for many edges at once.

    Monomial ``masks[k]`` is fed to the edge ``cobs[owner[k]]``.  Per edge we
    tabulate, for each source circle i, its image and the bitmasks of later
    circles that land below it (inversions) or on it (collisions); the sign
    then costs a handful of array operations per circle position.
    """
    width = max((cob.n_source for cob in cobs), default=0)
    phi = np.zeros((len(cobs), max(width, 1)), dtype=np.int64)
    inv = np.zeros_like(phi)
    coll = np.zeros_like(phi)
    for e, cob in enumerate(cobs):
        if cob.kind not in (MERGE, SPLIT):
            raise ValueError("edge maps are merges or splits")
        f = cob.phi
        for i, fi in enumerate(f):
            phi[e, i] = fi
            for j in range(i + 1, len(f)):
                if f[j] < fi:
                    inv[e, i] |= 1 << j
                elif f[j] == fi:
                    coll[e, i] |= 1 << j
    is_split = np.array([cob.kind == SPLIT for cob in cobs], dtype=bool)[owner]
    a1 = np.array([cob.a1 for cob in cobs], dtype=np.int64)[owner]
    a2 = np.array([cob.a2 for cob in cobs], dtype=np.int64)[owner]
    masks = masks.astype(np.int64, copy=False)
    image = np.zeros_like(masks)
    odd = np.zeros_like(masks)
    dead = np.zeros(masks.shape, dtype=bool)
    for i in range(width):
        b = (masks >> i) & 1
        image |= b << phi[owner, i]
        odd ^= b & _parity(masks & inv[owner, i])
        dead |= (b == 1) & ((masks & coll[owner, i]) != 0)
    if flavor == "even":
        live = (~dead).astype(np.int64)
        has_x = (image >> np.maximum(a1, 0)) & 1
        first = np.where(is_split, 1 - has_x, live)
        target1 = np.where(is_split, image | (1 << np.maximum(a1, 0)), image)
        second = is_split.astype(np.int64)
        return [(first, target1), (second, image | (1 << np.maximum(a2, 0)))]
    sign = np.where(dead, 0, 1 - 2 * odd)
    s1, t1 = _wedge_var(np.maximum(a1, 0), image)
    s2, t2 = _wedge_var(np.maximum(a2, 0), image)
    first = np.where(is_split, sign * s1, sign)
    target1 = np.where(is_split, t1, image)
    second = np.where(is_split, -sign * s2, 0)
    return [(first, target1), (second, t2)]


def _wedge_var(g: np.ndarray, masks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``wedge_masks`` with a per-entry generator."""
    below = _parity(masks & ((1 << g) - 1))
    sign = np.where((masks >> g) & 1, 0, 1 - 2 * below)
    return sign, masks | (1 << g)


def terms_to_dict(terms: Iterable[tuple[np.ndarray, np.ndarray]], k: int) -> dict[int, int]:
    """Image of the ``k``-th source monomial as ``{mask: coeff}`` (testing aid)."""
    out: dict[int, int] = {}
    for coeff, target in terms:
        c = int(coeff[k])
        if c:
            t = int(target[k])
            out[t] = out.get(t, 0) + c
    return {m: c for m, c in out.items() if c}
