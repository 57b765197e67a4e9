"""Khovanov's original (even) theory on the same cube.

Only the TQFT and the signs differ from the odd complex: merges multiply and
splits comultiply in Z[x]/(x^2) per circle, and the edge along crossing ``c``
from ``I`` carries ``(-1)^(number of 1s of I before c)``.  Generators use the
same masks as the odd complex (a set bit labels its circle ``x``), so the two
complexes share gradings and basis order.
"""

from __future__ import annotations

from .complex import ChainComplex, gradings, reduce_basepoint, signed_sum
from .cube import Cube
from .linkdiag import OrientedDiagram
from .signs import even_signs


def assemble_even(diagram: OrientedDiagram | Cube, check: bool = False) -> ChainComplex:
    """Khovanov's complex with the sign ``(-1)^(#1s of I before c)``."""
    cube = diagram if isinstance(diagram, Cube) else Cube(diagram)
    m, s = gradings(cube)
    c = ChainComplex(m, s, signed_sum(cube, even_signs(cube.n), "even"),
                     cube.generator_vertex, cube.generator_mask, "even")
    if check:
        c.check_square()
        c.check_gradings()
    return c


def reduce_even(c: ChainComplex, cube: Cube, p: int | None = None) -> ChainComplex:
    """Subcomplex where the circle through ``p`` carries ``x``; ``s`` raised by 1."""
    if c.flavor != "even":
        raise ValueError("reduce_even expects an even complex")
    return reduce_basepoint(c, cube, p)
