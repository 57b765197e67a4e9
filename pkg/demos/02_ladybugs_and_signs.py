"""Ladybug faces, the two assignment types, and what arrows do to them."""

from collections import Counter

from oddkh import homology as H
from oddkh.complex import assemble
from oddkh.cube import Cube
from oddkh.linkdiag import REVERSED, STANDARD, load_table, orient, select
from oddkh.signs import TYPE_X, TYPE_Y, edge_assignment, find_gauge

table = load_table()

# %% alternating diagrams never produce a ladybug; the first ones appear at 8 crossings
for rec in select(table, max_crossings=8):
    types = Counter(Cube(orient(rec.pd)).face_types.values())
    if types["X"] or types["Y"]:
        print(rec.name, "alternating" if rec.alternating else "non-alternating", dict(types))

# %% 8_19: the type X and type Y sign choices are genuinely different
cube = Cube(orient(table["8_19"].pd))
ex, ey = edge_assignment(cube, TYPE_X), edge_assignment(cube, TYPE_Y)
print("gauge between X and Y:", find_gauge(ex, ey))

# %% yet both complexes have the same homology
gx = H.smith_homology(assemble(cube, ex))
gy = H.smith_homology(assemble(cube, ey))
print("same homology:", gx == gy)

# %% reversing one arrow: ladybugs swap X <-> Y, some A/C faces swap too
arrows = [STANDARD] * cube.n
arrows[0] = REVERSED
flipped = Cube(orient(table["8_19"].pd, arrows))
moves = Counter((cube.face_types[k], flipped.face_types[k]) for k in cube.face_types
                if cube.face_types[k] != flipped.face_types[k])
print("face type changes:", dict(moves))
print("homology unchanged:", H.smith_homology(assemble(flipped)) == gx)
