"""Bigraded homology: integral groups, field dimensions, Euler characteristics.

Homology is computed in two stages.  Sparse Gaussian cancellation removes
pairs of generators joined by an invertible matrix entry (a unit over Z, any
nonzero entry over GF(p)); this is a chain homotopy equivalence and leaves
the homology unchanged.  Whatever survives over Z has only non-unit entries
and is small, and a Smith normal form of each residual differential gives
ranks and torsion.

Gradings are cohomological: ``d`` raises ``m``.  The torsion of H at ``m`` is
given by the invariant factors > 1 of the differential arriving at ``m``.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .linkdiag import OrientedDiagram, all_resolutions

Bidegree = tuple[int, int]


# ---------------------------------------------------------------------------
# Groups and polynomials

@dataclass
class BigradedGroup:
    """``groups[(m, s)] = (free rank, invariant factors > 1)``; zero groups omitted."""

    groups: dict[Bidegree, tuple[int, tuple[int, ...]]] = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {}
        for key, (rank, tors) in sorted(self.groups.items()):
            tors = tuple(sorted(int(t) for t in tors if t != 1))
            if rank or tors:
                cleaned[(int(key[0]), int(key[1]))] = (int(rank), tors)
        self.groups = cleaned

    def __eq__(self, other) -> bool:
        return isinstance(other, BigradedGroup) and self.groups == other.groups

    def __repr__(self) -> str:
        return f"BigradedGroup({self.groups})"

    def rank(self, m: int, s: int) -> int:
        return self.groups.get((m, s), (0, ()))[0]

    def torsion(self, m: int, s: int) -> tuple[int, ...]:
        return self.groups.get((m, s), (0, ()))[1]

    @property
    def total_rank(self) -> int:
        return sum(r for r, _ in self.groups.values())

    def rational(self) -> dict[Bidegree, int]:
        return {k: r for k, (r, _) in self.groups.items() if r}

    def field_dims(self, p: int) -> dict[Bidegree, int]:
        """Dimensions over GF(p) by universal coefficients (p = 0 gives Q)."""
        if p == 0:
            return self.rational()
        out: dict[Bidegree, int] = {}
        for (m, s), (r, tors) in self.groups.items():
            k = sum(1 for t in tors if t % p == 0)
            out[(m, s)] = out.get((m, s), 0) + r + k
            if k:  # Tor term from the torsion of H^m lands in degree m - 1
                out[(m - 1, s)] = out.get((m - 1, s), 0) + k
        return {k: v for k, v in sorted(out.items()) if v}

    def shifted(self, ds: int = 0, dm: int = 0) -> "BigradedGroup":
        return BigradedGroup({(m + dm, s + ds): v for (m, s), v in self.groups.items()})

    def direct_sum(self, other: "BigradedGroup") -> "BigradedGroup":
        out = dict(self.groups)
        for key, (r, t) in other.groups.items():
            r0, t0 = out.get(key, (0, ()))
            out[key] = (r0 + r, t0 + t)
        return BigradedGroup(out)

    def normalized(self) -> "BigradedGroup":
        """Torsion rewritten as invariant factors (for comparing direct sums)."""
        return BigradedGroup({k: (r, invariant_factors(list(t))) for k, (r, t) in self.groups.items()})

    def to_rows(self) -> list[dict]:
        return [{"m": m, "s": s, "rank": r, "torsion": list(t)}
                for (m, s), (r, t) in self.groups.items()]


def invariant_factors(diagonal: list[int]) -> tuple[int, ...]:
    """Invariant factors > 1 of a diagonal matrix with the given entries."""
    primes: dict[int, list[int]] = {}
    for d in diagonal:
        d = abs(d)
        if d <= 1:
            continue
        q = 2
        while q * q <= d:
            if d % q == 0:
                e = 1
                while d % q == 0:
                    d //= q
                    e *= q
                primes.setdefault(q, []).append(e)
            q += 1
        if d > 1:
            primes.setdefault(d, []).append(d)
    if not primes:
        return ()
    length = max(len(v) for v in primes.values())
    factors = [1] * length
    for q, powers in primes.items():
        powers.sort(reverse=True)
        for i, e in enumerate(powers):
            factors[length - 1 - i] *= e
    return tuple(f for f in factors if f > 1)


def poincare_string(terms: dict[Bidegree, int]) -> str:
    """``3 q^-20 t^-7 + q^6`` style; terms ordered by (m, s)."""
    parts = []
    for (m, s), c in sorted(terms.items()):
        if not c:
            continue
        pieces = []
        if s:
            pieces.append("q" if s == 1 else f"q^{s}")
        if m:
            pieces.append("t" if m == 1 else f"t^{m}")
        mono = " ".join(pieces)
        if not mono:
            parts.append(str(c))
        else:
            parts.append(mono if c == 1 else f"{c} {mono}")
    return " + ".join(parts) if parts else "0"


_TERM = re.compile(
    r"^(?P<c>\d+)?\s*\*?\s*(?:q\^?\{?(?P<s>-?\d+)?\}?)?\s*\*?\s*(?:t\^?\{?(?P<m>-?\d+)?\}?)?$"
)


def parse_poincare(text: str) -> dict[Bidegree, int]:
    """Inverse of ``poincare_string``; also reads ``q^{10}t^2`` braces."""
    text = text.replace("$", "").strip()
    out: dict[Bidegree, int] = {}
    if text in ("", "0"):
        return out
    for raw in text.split("+"):
        term = raw.strip()
        has_q = "q" in term
        has_t = "t" in term
        mt = _TERM.match(term)
        if not mt:
            raise ValueError(f"cannot read term {term!r}")
        c = int(mt.group("c") or 1)
        s = int(mt.group("s")) if mt.group("s") else (1 if has_q else 0)
        m = int(mt.group("m")) if mt.group("m") else (1 if has_t else 0)
        out[(m, s)] = out.get((m, s), 0) + c
    return out


# Laurent polynomials in q: dict exponent -> coefficient

def laurent_mul(a: dict[int, int], b: dict[int, int]) -> dict[int, int]:
    out: dict[int, int] = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = out.get(i + j, 0) + x * y
    return {k: v for k, v in sorted(out.items()) if v}


def laurent_add(a: dict[int, int], b: dict[int, int], scale: int = 1) -> dict[int, int]:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + scale * v
    return {k: v for k, v in sorted(out.items()) if v}


def laurent_shift(a: dict[int, int], k: int, sign: int = 1) -> dict[int, int]:
    return {e + k: sign * c for e, c in a.items()}


def laurent_string(a: dict[int, int]) -> str:
    parts = []
    for e, c in sorted(a.items()):
        mono = "" if e == 0 else ("q" if e == 1 else f"q^{e}")
        if not mono:
            body = str(abs(c))
        else:
            body = mono if abs(c) == 1 else f"{abs(c)}*{mono}"
        parts.append(("- " if c < 0 else "+ ") + body)
    if not parts:
        return "0"
    s = " ".join(parts)
    return s[2:] if s.startswith("+ ") else "-" + s[2:]


_LAURENT_TERM = re.compile(r"([+-])?(\d+)?\*?(q(?:\^\{?(-?\d+)\}?)?)?")


def parse_laurent(text: str) -> dict[int, int]:
    """Read ``q^2 + q^6 - q^8`` or ``-2*q^-3 + 1``."""
    s = text.replace(" ", "")
    out: dict[int, int] = {}
    if s in ("", "0"):
        return out
    pos = 0
    while pos < len(s):
        m = _LAURENT_TERM.match(s, pos)
        if m.end() == pos or (m.group(2) is None and m.group(3) is None) \
                or (pos and m.group(1) is None):
            raise ValueError(f"cannot read Laurent polynomial {text!r} at {s[pos:]!r}")
        coeff = (-1 if m.group(1) == "-" else 1) * int(m.group(2) or 1)
        e = 0
        if m.group(3):
            e = int(m.group(4)) if m.group(4) else 1
        out[e] = out.get(e, 0) + coeff
        pos = m.end()
    return {k: v for k, v in sorted(out.items()) if v}


def equal_up_to_unit(a: dict[int, int], b: dict[int, int]) -> bool:
    """``a = +-q^j b`` for some j."""
    if not a or not b:
        return not a and not b
    shift = min(a) - min(b)
    for sign in (1, -1):
        if laurent_shift(b, shift, sign) == {k: v for k, v in a.items() if v}:
            return True
    return False


# ---------------------------------------------------------------------------
# Euler characteristic and the Jones state sum

def euler_characteristic(g: BigradedGroup | dict[Bidegree, int]) -> dict[int, int]:
    """``sum (-1)^m rank q^s``."""
    ranks = g.rational() if isinstance(g, BigradedGroup) else g
    out: dict[int, int] = {}
    for (m, s), r in ranks.items():
        out[s] = out.get(s, 0) + (-1 if m % 2 else 1) * r
    return {k: v for k, v in sorted(out.items()) if v}


def complex_euler_characteristic(c) -> dict[int, int]:
    return euler_characteristic(c.ranks())


def jones_state_sum(d: OrientedDiagram) -> dict[int, int]:
    """``(-1)^n- q^(n+ - 2n-) sum_I (-q)^|I| (q + 1/q)^k(I)`` over all resolutions."""
    by_state: dict[tuple[int, int], int] = {}
    for r in all_resolutions(d):
        key = (bin(r.vertex).count("1"), r.n_circles)
        by_state[key] = by_state.get(key, 0) + 1
    total: dict[int, int] = {}
    q_plus_inv = {1: 1, -1: 1}
    for (m0, k), count in by_state.items():
        term = {m0: (-1) ** m0 * count}
        for _ in range(k):
            term = laurent_mul(term, q_plus_inv)
        total = laurent_add(total, term)
    sign = -1 if d.n_minus % 2 else 1
    return laurent_shift(total, d.n_plus - 2 * d.n_minus, sign) if total else {}


# ---------------------------------------------------------------------------
# Cancellation

def _build_graph(c, p: int):
    coo = c.d.tocoo()
    n = c.dimension
    out: list[dict[int, int]] = [dict() for _ in range(n)]
    inn: list[dict[int, int]] = [dict() for _ in range(n)]
    for r, col, v in zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()):
        if p:
            v %= p
        if v:
            out[col][r] = v
            inn[r][col] = v
    return out, inn


def _cancel(out, inn, p: int) -> list[bool]:
    """Cancel invertible entries in place; returns the alive flags."""
    n = len(out)
    alive = [True] * n
    queue = deque(i for i in range(n) if out[i])
    queued = [bool(o) for o in out]
    while queue:
        x = queue.popleft()
        queued[x] = False
        if not alive[x]:
            continue
        ox = out[x]
        best, best_cost = -1, -1
        for y, v in ox.items():
            if p or v in (1, -1):
                cost = len(inn[y])
                if best < 0 or cost < best_cost:
                    best, best_cost = y, cost
                    if cost == 1:
                        break
        if best < 0:
            continue
        y = best
        u = ox[y]
        uinv = u if not p else pow(u, -1, p)
        iy = inn[y]
        del ox[y]
        del iy[x]
        for z, a in iy.items():
            oz = out[z]
            del oz[y]
            f = a * uinv
            for w, b in ox.items():
                val = oz.get(w, 0) - f * b
                if p:
                    val %= p
                if val:
                    oz[w] = val
                    inn[w][z] = val
                elif w in oz:
                    del oz[w]
                    del inn[w][z]
            if not queued[z]:
                queued[z] = True
                queue.append(z)
        for w in ox:
            del inn[w][x]
        for w in out[y]:
            del inn[w][y]
        for z in inn[x]:
            del out[z][x]
        out[x], out[y], inn[x], inn[y] = {}, {}, {}, {}
        alive[x] = alive[y] = False
    return alive


def _residual(c, p: int):
    out, inn = _build_graph(c, p)
    alive = _cancel(out, inn, p)
    m = c.m.tolist()
    s = c.s.tolist()
    by_degree: dict[Bidegree, list[int]] = {}
    for i, a in enumerate(alive):
        if a:
            by_degree.setdefault((m[i], s[i]), []).append(i)
    return by_degree, out


# ---------------------------------------------------------------------------
# Smith normal form on small dense integer matrices

def smith_diagonal(rows: list[list[int]]) -> list[int]:
    """Nonzero diagonal of a Smith form (Python ints, minimal-pivot strategy)."""
    a = [list(r) for r in rows]
    n_rows = len(a)
    n_cols = len(a[0]) if a else 0
    diag = []
    t = 0
    while t < n_rows and t < n_cols:
        best = None
        for i in range(t, n_rows):
            row = a[i]
            for j in range(t, n_cols):
                v = row[j]
                if v:
                    key = (abs(v), sum(1 for x in row[t:] if x) + sum(1 for r in a[t:] if r[j]))
                    if best is None or key < best[0]:
                        best = (key, i, j)
                        if abs(v) == 1:
                            break
            if best is not None and best[0][0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        a[t], a[i] = a[i], a[t]
        for r in a:
            r[t], r[j] = r[j], r[t]
        while True:
            piv = a[t][t]
            done = True
            for i in range(t + 1, n_rows):
                if a[i][t]:
                    q = a[i][t] // piv
                    if q:
                        ri, rt = a[i], a[t]
                        for k in range(t, n_cols):
                            ri[k] -= q * rt[k]
                    if a[i][t]:
                        done = False
            for j in range(t + 1, n_cols):
                if a[t][j]:
                    q = a[t][j] // piv
                    if q:
                        for r in a[t:]:
                            r[j] -= q * r[t]
                    if a[t][j]:
                        done = False
            if done:
                bad = next(((i, j) for i in range(t + 1, n_rows) for j in range(t + 1, n_cols)
                            if a[i][j] % piv), None)
                if bad is None:
                    break
                # fold the offending row into row t to expose a smaller remainder
                ri = a[bad[0]]
                for k in range(t, n_cols):
                    a[t][k] += ri[k]
                continue
            # bring the smallest remaining entry of row/column t to the pivot
            cands = [(abs(a[i][t]), i, t) for i in range(t, n_rows) if a[i][t]]
            cands += [(abs(a[t][j]), t, j) for j in range(t, n_cols) if a[t][j]]
            _, i, j = min(cands)
            a[t], a[i] = a[i], a[t]
            for r in a:
                r[t], r[j] = r[j], r[t]
        diag.append(abs(a[t][t]))
        t += 1
    return diag


def _residual_maps(c, by_degree, out):
    """Dense residual differentials ``(m, s) -> (m + 1, s)`` keyed by source degree."""
    maps = {}
    for (m, s), sources in by_degree.items():
        targets = by_degree.get((m + 1, s), [])
        if not targets:
            continue
        col = {y: k for k, y in enumerate(targets)}
        mat = [[0] * len(sources) for _ in targets]
        nonzero = False
        for j, x in enumerate(sources):
            for y, v in out[x].items():
                mat[col[y]][j] = v
                nonzero = True
        if nonzero:
            maps[(m, s)] = mat
    return maps


def smith_homology(c) -> BigradedGroup:
    """Integral homology: free ranks and invariant factors per bidegree."""
    by_degree, out = _residual(c, 0)
    maps = _residual_maps(c, by_degree, out)
    rank: dict[Bidegree, int] = {}
    tors: dict[Bidegree, tuple[int, ...]] = {}
    for (m, s), mat in maps.items():
        diag = smith_diagonal(mat)
        rank[(m, s)] = len(diag)
        tors[(m + 1, s)] = invariant_factors(diag)
    groups = {}
    for (m, s), gens in by_degree.items():
        free = len(gens) - rank.get((m, s), 0) - rank.get((m - 1, s), 0)
        groups[(m, s)] = (free, tors.get((m, s), ()))
    return BigradedGroup(groups)


def _rank_mod(mat: list[list[int]], p: int) -> int:
    rows = [[v % p for v in r] for r in mat]
    rank = 0
    n_cols = len(rows[0]) if rows else 0
    for j in range(n_cols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][j]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][j], -1, p)
        for i in range(len(rows)):
            if i != rank and rows[i][j]:
                f = rows[i][j] * inv % p
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def field_homology(c, p: int = 0) -> dict[Bidegree, int]:
    """Bigraded dimensions over GF(p), or over Q when ``p == 0``."""
    if p == 0:
        return smith_homology(c).rational()
    by_degree, out = _residual(c, p)
    # everything invertible has cancelled, so the residual differential is zero
    if any(out[x] for gens in by_degree.values() for x in gens):
        raise AssertionError("cancellation over a field left a nonzero differential")
    return {k: len(v) for k, v in sorted(by_degree.items()) if v}


# ---------------------------------------------------------------------------
# Thinness and reports

def thinness(g: BigradedGroup | dict[Bidegree, int], sigma: int | None):
    """``(thin, witnesses)``: bidegrees off the diagonal ``s - 2m = sigma``.

    With ``sigma`` unknown, returns ``(None, diagonals)`` listing the occupied
    values of ``s - 2m``.
    """
    support = list(g.groups) if isinstance(g, BigradedGroup) else [k for k, v in g.items() if v]
    if sigma is None:
        return None, sorted({s - 2 * m for m, s in support})
    off = [(m, s) for m, s in support if s - 2 * m != sigma]
    return not off, off


COEFFS = {"Z": None, "Q": 0, "F2": 2, "F3": 3}


def results_json(knot: str, flavor: str, reduced: bool, coeffs: str,
                 group: BigradedGroup | dict[Bidegree, int]) -> dict:
    if isinstance(group, BigradedGroup):
        rows = group.to_rows()
        poly = group.rational()
    else:
        rows = [{"m": m, "s": s, "rank": r, "torsion": []} for (m, s), r in sorted(group.items())]
        poly = group
    return {"knot": knot, "flavor": flavor, "reduced": reduced, "coeffs": coeffs,
            "groups": rows, "poincare": poincare_string(poly)}


def group_from_json(obj: dict) -> BigradedGroup:
    return BigradedGroup({(g["m"], g["s"]): (g["rank"], tuple(g["torsion"])) for g in obj["groups"]})


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=False)


def to_numpy_ranks(g: dict[Bidegree, int]) -> np.ndarray:
    """``(m, s, dim)`` rows, handy for plotting in the demos."""
    return np.array([(m, s, v) for (m, s), v in sorted(g.items())], dtype=np.int64).reshape(-1, 3)
