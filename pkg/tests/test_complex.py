import json
import random

import numpy as np
import pytest
import scipy.sparse as sp

from oddkh import homology as H
from oddkh.complex import (
    ComplexError,
    assemble,
    gradings,
    kernel_basis,
    reduce_basepoint,
    reduce_kernel,
    skein_decompose,
    with_signs,
)
from oddkh.cube import Cube
from oddkh.linkdiag import REVERSED, STANDARD, disjoint_union, load_table, orient, parse_pd, smooth_crossing
from oddkh.signs import TYPE_Y, edge_assignment, gauge_transform


@pytest.fixture(scope="module")
def table():
    return load_table()


def cube_of(pd, arrows=None):
    return Cube(orient(pd, arrows))


def test_crossingless_unknot():
    c = assemble(cube_of(parse_pd("PD[Loop[1]]")), check=True)
    assert c.ranks() == {(0, -1): 1, (0, 1): 1}
    assert c.d.nnz == 0


def test_positive_kink_gradings():
    cube = cube_of(parse_pd("PD[X[1,1,2,2]]"))
    assert (cube.diagram.n_plus, cube.diagram.n_minus) == (1, 0)
    c = assemble(cube, check=True)
    # two circles at M0 = 0 (rank 4), one circle at M0 = 1 (rank 2)
    assert c.ranks() == {(0, -1): 1, (0, 1): 2, (0, 3): 1, (1, 1): 1, (1, 3): 1}
    assert H.smith_homology(c).rational() == {(0, -1): 1, (0, 1): 1}


def test_negative_kink_gradings():
    c = assemble(cube_of(parse_pd("PD[X[1,2,2,1]]")), check=True)
    assert c.ranks() == {(-1, -3): 1, (-1, -1): 1, (0, -3): 1, (0, -1): 2, (0, 1): 1}


def test_gradings_recomputed_from_generators(table):
    cube = cube_of(table["6_3"].pd)
    m, s = gradings(cube)
    d = cube.diagram
    for j in range(0, cube.dimension, 7):
        v, mono = int(cube.generator_vertex[j]), int(cube.generator_mask[j])
        m0 = bin(v).count("1")
        assert m[j] == m0 - d.n_minus
        assert s[j] == cube.n_circles[v] - 2 * bin(mono).count("1") + d.n_plus - 2 * d.n_minus + m0


def test_generator_order_is_vertex_then_monomial(table):
    c = assemble(cube_of(table["4_1"].pd))
    keys = list(zip(c.vertex.tolist(), c.mask.tolist()))
    assert keys == sorted(keys)


@pytest.mark.parametrize("name", ["3_1", "4_1", "7_7", "8_19", "8_20", "10_124"])
@pytest.mark.parametrize("kind", ["X", "Y"])
def test_differential_squares_to_zero_and_has_degree_one(table, name, kind):
    c = assemble(cube_of(table[name].pd), kind, check=True)
    assert c.square_is_zero()


def test_wrong_signs_are_caught(table):
    cube = cube_of(table["3_1"].pd)
    eps = edge_assignment(cube).negated(0, 0)
    with pytest.raises(ComplexError):
        assemble(cube, eps, check=True)


def test_trefoil_homology(table):
    g = H.smith_homology(assemble(cube_of(table["3_1"].pd), check=True))
    assert g.total_rank == 6
    assert g.rational() == {(0, 1): 1, (0, 3): 1, (2, 5): 1, (2, 7): 1, (3, 7): 1, (3, 9): 1}


def test_reduced_unknot_sits_at_origin():
    for text in ("PD[Loop[1]]", "PD[X[1,1,2,2]]", "PD[X[1,2,2,1]]"):
        cube = cube_of(parse_pd(text))
        for p in (None, *cube.diagram.pd.arcs):
            r = reduce_basepoint(assemble(cube), cube, p)
            assert H.smith_homology(r).rational() == {(0, 0): 1}


def test_basepoint_subcomplex_is_closed(table):
    cube = cube_of(table["8_19"].pd)
    c = assemble(cube)
    for p in (1, 5, 12):
        keep = np.zeros(c.dimension, dtype=bool)
        r = reduce_basepoint(c, cube, p)
        idx = cube.offsets[r.vertex] + r.mask
        keep[idx] = True
        # no kept generator maps outside the kept span
        assert c.d[~keep][:, keep].nnz == 0
        circles = np.array([cube.resolutions[v].arc_circle[p] for v in r.vertex.tolist()])
        assert np.all(r.mask >> circles & 1)


def test_basepoint_rejects_unknown_arc(table):
    cube = cube_of(table["3_1"].pd)
    with pytest.raises(ValueError):
        reduce_basepoint(assemble(cube), cube, 99)


@pytest.mark.parametrize("name", ["3_1", "8_19"])
def test_every_basepoint_gives_the_same_homology(table, name):
    cube = cube_of(table[name].pd)
    c = assemble(cube)
    groups = {repr(H.smith_homology(reduce_basepoint(c, cube, p))) for p in cube.diagram.pd.arcs}
    assert len(groups) == 1


def test_kernel_basis_two_circles():
    # {1, a1 - a0} with circles indexed from 0
    assert kernel_basis(2) == [(0, {0: 1}), (2, {2: 1, 1: -1})]
    assert kernel_basis(1) == [(0, {0: 1})]
    assert len(kernel_basis(4)) == 8


def test_kernel_basis_three_circles():
    # (a1 - a0) ^ (a2 - a0) = a1a2 - a1a0 - a0a2 = a1a2 + a0a1 - a0a2
    terms = dict(kernel_basis(3))[6]
    assert terms == {6: 1, 3: 1, 5: -1}


def wedge_matrix(k, b):
    """a_0 ^ b_S = a_0 ^ a_S: the kernel generator (v, S) goes to basepoint generator (v, S | 1)."""
    index = {(int(v), int(m)): j for j, (v, m) in enumerate(zip(b.vertex, b.mask))}
    rows = [index[(int(v), int(m) | 1)] for v, m in zip(k.vertex, k.mask)]
    return sp.csr_matrix((np.ones(k.dimension, dtype=np.int64), (rows, np.arange(k.dimension))),
                         shape=(b.dimension, k.dimension))


@pytest.mark.parametrize("name", ["4_1", "8_19"])
def test_wedge_with_basepoint_is_an_isomorphism(table, name):
    cube = cube_of(table[name].pd)
    c = assemble(cube)
    k, b = reduce_kernel(c, cube), reduce_basepoint(c, cube)
    W = wedge_matrix(k, b)
    assert W.shape[0] == W.shape[1]
    # a permutation matrix: invertible over Z
    assert np.all(W.sum(axis=0) == 1) and np.all(W.sum(axis=1) == 1)
    assert np.all(b.m[W.indices] == k.m) and np.all(b.s[W.indices] == k.s)
    # merges commute with a_0 ^ -, splits anticommute: W d_k = d_b W up to the split-edge sign
    L, R = (W @ k.d).tocoo(), (b.d @ W).tocsr()
    split = cube.n_circles[b.vertex[L.row]] > cube.n_circles[k.vertex[L.col]]
    assert L.nnz == R.nnz
    assert np.all(L.data == np.where(split, -1, 1) * np.asarray(R[L.row, L.col]).ravel())


@pytest.mark.parametrize("name", ["3_1", "5_2", "8_19", "8_20"])
def test_kernel_and_basepoint_homology_agree(table, name):
    cube = cube_of(table[name].pd)
    c = assemble(cube)
    k = reduce_kernel(c, cube)
    k.check_square()
    k.check_gradings()
    assert H.smith_homology(k) == H.smith_homology(reduce_basepoint(c, cube))


@pytest.mark.parametrize("name", ["3_1", "6_2", "8_19", "9_42"])
def test_unreduced_is_two_shifted_copies_of_reduced(table, name):
    cube = cube_of(table[name].pd)
    c = assemble(cube)
    r = H.smith_homology(reduce_basepoint(c, cube))
    assert H.smith_homology(c) == r.shifted(ds=-1).direct_sum(r.shifted(ds=1))


def test_adding_a_split_unknot_doubles_homology(table):
    t = table["3_1"].pd
    g = H.smith_homology(assemble(cube_of(t)))
    u = H.smith_homology(assemble(cube_of(disjoint_union(t, parse_pd("PD[X[1,1,2,2]]")))))
    assert u == g.shifted(ds=-1).direct_sum(g.shifted(ds=1))


@pytest.mark.parametrize("name,x", [("3_1", 0), ("4_1", 2), ("5_2", 1), ("6_2", 3)])
def test_skein_decomposition(table, name, x):
    pd = table[name].pd
    c = assemble(cube_of(pd))
    sk = skein_decompose(c, x)
    sk.quotient.check_square()
    sk.sub.check_square()
    # rank bookkeeping
    merged = dict(sk.quotient.ranks())
    for key, r in sk.sub.ranks().items():
        merged[key] = merged.get(key, 0) + r
    assert merged == c.ranks()
    # Euler characteristics add, and each piece is the Jones polynomial of a smoothing up to a unit
    e, e0, e1 = (H.complex_euler_characteristic(z) for z in (c, sk.quotient, sk.sub))
    assert H.laurent_add(e0, e1) == e
    smooth = [smooth_crossing(pd, x, i) for i in (0, 1)]
    assert H.equal_up_to_unit(e0, H.jones_state_sum(orient(smooth[0])))
    assert H.equal_up_to_unit(e1, H.jones_state_sum(orient(smooth[1])))
    # long exact sequence: dim H(C) <= dim H(C0) + dim H(C1) in every bidegree
    h, h0, h1 = (H.field_homology(z, 0) for z in (c, sk.quotient, sk.sub))
    for key, r in h.items():
        assert r <= h0.get(key, 0) + h1.get(key, 0)
    # the pieces compute the homology of the smoothed diagrams, up to shifts
    for piece, link in ((h0, smooth[0]), (h1, smooth[1])):
        assert sum(piece.values()) == H.smith_homology(assemble(cube_of(link))).total_rank


def test_connecting_map_is_the_cross_block(table):
    c = assemble(cube_of(table["3_1"].pd))
    sk = skein_decompose(c, 1)
    assert sk.connecting.shape == (sk.sub.dimension, sk.quotient.dimension)
    assert sk.connecting.nnz + sk.sub.d.nnz + sk.quotient.d.nnz == c.d.nnz


def test_with_signs_regauge_and_types(table):
    cube = cube_of(table["8_19"].pd)
    c = assemble(cube)
    g = H.smith_homology(c)
    rng = random.Random(5)
    eta = [rng.choice((1, -1)) for _ in range(1 << cube.n)]
    other = with_signs(c, cube, gauge_transform(edge_assignment(cube), eta))
    other.check_square()
    assert H.smith_homology(other) == g
    assert H.smith_homology(with_signs(c, cube, edge_assignment(cube, TYPE_Y))) == g


def test_arrow_reversal_keeps_homology(table):
    pd = table["8_19"].pd
    g = H.smith_homology(assemble(cube_of(pd)))
    arrows = [REVERSED if i % 3 == 0 else STANDARD for i in range(pd.n)]
    assert H.smith_homology(assemble(cube_of(pd, arrows), check=True)) == g


def test_complex_dump(table):
    c = assemble(cube_of(table["3_1"].pd))
    dump = json.loads(c.dumps())
    assert dump["flavor"] == "odd" and dump["reduced"] is None
    assert sum(r["rank"] for r in dump["ranks"]) == c.dimension == sum(
        2 ** k for k in (2, 1, 1, 2, 1, 2, 2, 3))
    assert len(dump["differential"]) == c.d.nnz
    assert len(dump["generators"]) == c.dimension
    assert json.loads(c.dumps()) == dump
