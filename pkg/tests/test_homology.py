import json
import random
from fractions import Fraction
from itertools import combinations
from math import gcd

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from oddkh import homology as H
from oddkh.complex import ChainComplex, assemble, reduce_basepoint
from oddkh.cube import Cube
from oddkh.linkdiag import disjoint_union, load_table, orient, parse_pd
from oddkh.signs import edge_assignment, gauge_transform


@pytest.fixture(scope="module")
def table():
    return load_table()


def det(mat):
    """Exact determinant by fraction-valued elimination."""
    a = [[Fraction(x) for x in row] for row in mat]
    n, out = len(a), Fraction(1)
    for j in range(n):
        piv = next((i for i in range(j, n) if a[i][j]), None)
        if piv is None:
            return 0
        if piv != j:
            a[j], a[piv] = a[piv], a[j]
            out = -out
        out *= a[j][j]
        for i in range(j + 1, n):
            f = a[i][j] / a[j][j]
            a[i] = [x - f * y for x, y in zip(a[i], a[j])]
    return int(out)


def determinantal_divisors(mat):
    """Invariant factors from gcds of k x k minors: d_k = D_k / D_{k-1}."""
    rows, cols = len(mat), len(mat[0]) if mat else 0
    out, prev = [], 1
    for k in range(1, min(rows, cols) + 1):
        g = 0
        for r in combinations(range(rows), k):
            for c in combinations(range(cols), k):
                g = gcd(g, det([[mat[i][j] for j in c] for i in r]))
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return out


def complex_from_blocks(blocks, s=0):
    """A chain complex on degrees 0..len(blocks) with the given differentials."""
    sizes = [len(blocks[0][0]) if blocks[0] else 0] + [len(b) for b in blocks]
    offsets = np.cumsum([0] + sizes)
    n = int(offsets[-1])
    d = sp.lil_matrix((n, n), dtype=np.int64)
    for k, b in enumerate(blocks):
        for i, row in enumerate(b):
            for j, v in enumerate(row):
                if v:
                    d[offsets[k + 1] + i, offsets[k] + j] = v
    m = np.repeat(np.arange(len(sizes)), sizes)
    z = np.zeros(n, dtype=np.int64)
    return ChainComplex(m, np.full(n, s), d.tocsr(), z, z)


def test_zero_differential():
    c = complex_from_blocks([[[0, 0], [0, 0]]])
    g = H.smith_homology(c)
    assert g.groups == {(0, 0): (2, ()), (1, 0): (2, ())}


def test_multiplication_by_two():
    g = H.smith_homology(complex_from_blocks([[[2]]]))
    assert g.groups == {(1, 0): (0, (2,))}
    assert H.field_homology(complex_from_blocks([[[2]]]), 2) == {(0, 0): 1, (1, 0): 1}
    assert H.field_homology(complex_from_blocks([[[2]]]), 3) == {}


def test_torsion_and_free_parts():
    # Z^3 -> Z^3 by diag(1, 6, 0) composed with a unimodular change of basis
    blocks = [[[1, 2, 0], [0, 6, 0], [1, 8, 0]]]
    g = H.smith_homology(complex_from_blocks(blocks))
    assert g.groups == {(0, 0): (1, ()), (1, 0): (1, (6,))}


def test_smith_diagonal_examples():
    assert sorted(H.smith_diagonal([[2, 4], [6, 8]])) == [2, 4]
    assert H.invariant_factors(H.smith_diagonal([[2, 0], [0, 3]])) == (6,)
    assert H.smith_diagonal([[0, 0], [0, 0]]) == []
    assert H.smith_diagonal([]) == []


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4).flatmap(lambda r: st.integers(1, 4).flatmap(
    lambda c: st.lists(st.lists(st.integers(-6, 6), min_size=c, max_size=c), min_size=r, max_size=r))))
def test_smith_diagonal_matches_determinantal_divisors(mat):
    expected = determinantal_divisors(mat)
    got = H.smith_diagonal(mat)
    assert len(got) == len(expected)
    assert H.invariant_factors(got) == tuple(x for x in expected if x > 1)


@pytest.mark.parametrize("diagonal,factors", [
    ([2, 3], (6,)),
    ([2, 2], (2, 2)),
    ([4, 6], (2, 12)),
    ([1, 1, 5], (5,)),
    ([12, 18, 8], (2, 12, 72)),
    ([], ()),
])
def test_invariant_factors(diagonal, factors):
    got = H.invariant_factors(diagonal)
    assert got == factors
    assert all(b % a == 0 for a, b in zip(got, got[1:]))


@pytest.mark.parametrize("name", ["8_19", "9_42", "10_124"])
@pytest.mark.parametrize("p", [2, 3])
def test_universal_coefficients(table, name, p):
    c = assemble(Cube(orient(table[name].pd)))
    assert H.field_homology(c, p) == H.smith_homology(c).field_dims(p)


def test_random_two_term_complexes():
    rng = random.Random(2)
    for _ in range(20):
        d0 = [[rng.randint(-4, 4) for _ in range(2)] for _ in range(3)]
        g = H.smith_homology(complex_from_blocks([d0]))
        r = int(np.linalg.matrix_rank(np.array(d0)))
        assert g.rank(0, 0) == 2 - r
        assert g.rank(1, 0) == 3 - r
        assert g.torsion(1, 0) == tuple(x for x in determinantal_divisors(d0) if x > 1)


def test_euler_characteristics_agree(table):
    for name in ("3_1", "4_1", "6_2", "8_19"):
        d = orient(table[name].pd)
        c = assemble(Cube(d))
        e = H.complex_euler_characteristic(c)
        assert H.euler_characteristic(H.smith_homology(c)) == e
        assert H.jones_state_sum(d) == e


def test_unknot_and_unlinks():
    q = {-1: 1, 1: 1}
    assert H.jones_state_sum(orient(parse_pd("PD[Loop[1]]"))) == q
    assert H.jones_state_sum(orient(parse_pd("PD[]"))) == {0: 1}
    two = orient(disjoint_union(parse_pd("PD[Loop[1]]"), parse_pd("PD[X[1,1,2,2]]")))
    assert H.jones_state_sum(two) == H.laurent_mul(q, q)


def test_jones_matches_the_table(table):
    for name in ("3_1", "5_1", "7_2", "8_19", "10_132"):
        rec = table[name]
        mine = H.jones_state_sum(orient(rec.pd))
        # the table stores the normalized Jones polynomial in q
        assert H.laurent_mul(H.parse_laurent(rec.jones), {-1: 1, 1: 1}) == mine


def test_thinness():
    thin, off = H.thinness({(0, 0): 1}, 0)
    assert thin and off == []
    # the reduced odd 8_19 group sits on s - 2m = 6
    g = H.BigradedGroup({(0, 6): (1, ()), (2, 10): (1, ()), (5, 16): (1, ())})
    assert H.thinness(g, 6) == (True, [])
    assert H.thinness(g, None) == (None, [6])
    thin, off = H.thinness(g.direct_sum(H.BigradedGroup({(3, 16): (1, ())})), 6)
    assert not thin and off == [(3, 16)]


def test_poincare_round_trip():
    for text in ("q^6 + q^10 t^2 + q^16 t^5", "3 q^-20 t^-7 + q^6", "1", "q t", "0"):
        terms = H.parse_poincare(text)
        assert H.parse_poincare(H.poincare_string(terms)) == terms
    assert H.parse_poincare("q^6 + q^{10}t^2 + q^{16}t^5") == {(0, 6): 1, (2, 10): 1, (5, 16): 1}
    assert H.poincare_string({(0, 6): 1, (2, 10): 1, (5, 16): 1}) == "q^6 + q^10 t^2 + q^16 t^5"
    with pytest.raises(ValueError):
        H.parse_poincare("x^2")


def test_laurent_helpers():
    a = H.parse_laurent("q^2 + q^6 - q^8")
    assert a == {2: 1, 6: 1, 8: -1}
    assert H.parse_laurent(H.laurent_string(a)) == a
    assert H.parse_laurent("-2*q^-3 + 1") == {-3: -2, 0: 1}
    assert H.equal_up_to_unit(a, H.laurent_shift(a, 5, -1))
    assert not H.equal_up_to_unit(a, {2: 1, 6: 1, 8: 1})
    with pytest.raises(ValueError):
        H.parse_laurent("q^2 + + q")


def test_direct_sum_and_shift():
    g = H.BigradedGroup({(0, 1): (1, (2,))})
    s = g.direct_sum(g.shifted(ds=2))
    assert s.groups == {(0, 1): (1, (2,)), (0, 3): (1, (2,))}
    assert g.direct_sum(g).groups == {(0, 1): (2, (2, 2))}
    assert H.BigradedGroup({(0, 0): (0, (2, 3))}).normalized().groups == {(0, 0): (0, (6,))}


def test_results_json_schema(table):
    c = reduce_basepoint(assemble(Cube(orient(table["8_19"].pd))), Cube(orient(table["8_19"].pd)))
    g = H.smith_homology(c)
    obj = H.results_json("8_19", "odd", True, "Z", g)
    assert set(obj) == {"knot", "flavor", "reduced", "coeffs", "groups", "poincare"}
    assert obj["poincare"] == "q^6 + q^10 t^2 + q^16 t^5"
    back = H.group_from_json(json.loads(H.dumps(obj)))
    assert back == g
    dims = H.results_json("8_19", "odd", True, "F2", H.field_homology(c, 2))
    assert all(row["torsion"] == [] for row in dims["groups"])
    assert H.to_numpy_ranks(H.field_homology(c, 2)).shape[1] == 3


def test_homology_ignores_generator_order(table):
    c = assemble(Cube(orient(table["7_6"].pd)))
    g = H.smith_homology(c)
    perm = np.random.default_rng(4).permutation(c.dimension)
    P = sp.csr_matrix((np.ones(c.dimension, dtype=np.int64), (np.arange(c.dimension), perm)))
    shuffled = ChainComplex(c.m[perm], c.s[perm], (P @ c.d @ P.T).tocsr(), c.vertex[perm], c.mask[perm])
    assert H.smith_homology(shuffled) == g
    assert H.field_homology(shuffled, 2) == H.field_homology(c, 2)


def test_homology_ignores_gauge(table):
    cube = Cube(orient(table["8_21"].pd))
    eps = edge_assignment(cube)
    eta = [(-1) ** bin(v).count("1") * (-1 if v % 3 == 0 else 1) for v in range(1 << cube.n)]
    assert H.smith_homology(assemble(cube, gauge_transform(eps, eta))) == H.smith_homology(assemble(cube, eps))
