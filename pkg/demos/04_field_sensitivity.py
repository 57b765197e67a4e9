"""9_42: thin over Q, not over GF(2).  Torsion is what moves the support."""

from oddkh import homology as H
from oddkh.complex import assemble, reduce_basepoint
from oddkh.cube import Cube
from oddkh.linkdiag import load_table, orient

rec = load_table()["9_42"]
cube = Cube(orient(rec.pd))
red = reduce_basepoint(assemble(cube), cube)
print("signature:", rec.signature)

# %% over Z: free part plus torsion
g = H.smith_homology(red)
for (m, s), (rank, tors) in g.groups.items():
    print(f"m={m:3d} s={s:3d} s-2m={s - 2 * m:3d} rank={rank} torsion={list(tors)}")

# %% over Q the support lies on one diagonal
q = H.field_homology(red, 0)
print("Q   :", H.poincare_string(q), " thin:", H.thinness(q, rec.signature)[0])

# %% over GF(2) the 2-torsion adds classes off that diagonal
f2 = H.field_homology(red, 2)
print("GF2 :", H.poincare_string(f2), " thin:", H.thinness(f2, rec.signature)[0])
print("off diagonal:", H.thinness(f2, rec.signature)[1])

# %% universal coefficients predict the GF(2) answer from the integral one
print("UCT agrees:", g.field_dims(2) == f2)
