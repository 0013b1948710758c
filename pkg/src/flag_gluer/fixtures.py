"""Built-in triangulations and solution curves for the three worked examples:
the figure-eight knot complement, its sister manifold, and the order-3 Hopf
link orbifold.

The parameter curves assign each edge ratio t^{+1} or t^{-1} per tetrahedron
and carry the distinguished gluing parameters t^{+-2}; at t = 1 every value is
1 (the complete hyperbolic structure).  The transcriptions are certified by
the edge-matrix identity checks in the acceptance suite; see
fixtures/generate.py for how they were derived.
"""
from __future__ import annotations

from .edgeface import ALL_EDGE_FACES, EdgeFace, from_text
from .params import ParamSet, TetParams
from .triangulation import Triangulation

__all__ = [
    "figure_eight", "figure_eight_sister", "hopf_orbifold",
    "figure_eight_params", "sister_params", "hopf_solution_params",
]

_EF_ORDER = ["(12)3", "(21)4", "(34)1", "(43)2", "(13)4", "(31)2",
             "(24)3", "(42)1", "(14)2", "(41)3", "(23)1", "(32)4"]


def _tet_from_signs(signs: dict[str, int], t: float) -> TetParams:
    ratios = {}
    for text, sgn in signs.items():
        ef = from_text(text)
        ratios[ef.edge_key] = t ** sgn
    return TetParams.from_edge_dict(ratios)


def figure_eight() -> Triangulation:
    """Two-tetrahedron ideal triangulation of the figure-eight knot complement."""
    return Triangulation([
        [(1, (1, 2, 4, 3)), (1, (2, 4, 1, 3)), (1, (2, 1, 3, 4)), (1, (3, 1, 4, 2))],
        [(0, (1, 2, 4, 3)), (0, (2, 4, 1, 3)), (0, (2, 1, 3, 4)), (0, (3, 1, 4, 2))],
    ])


# edge-ratio exponents of t along the deformation curve, per edge-face
_FIG8_E = dict(zip(_EF_ORDER, [+1, +1, +1, +1, -1, -1, +1, +1, -1, -1, -1, -1]))
_FIG8_F = dict(zip(_EF_ORDER, [-1, -1, -1, -1, +1, +1, -1, -1, +1, +1, +1, +1]))


def figure_eight_params(t: float) -> ParamSet:
    """The 1-parameter solution curve; the distinguished gluing parameters sit
    at (23)1 and (41)3 (t^-2 on tet 0, t^2 on tet 1) and every canonical
    gluing parameter equals 1."""
    if not (t > 0):
        raise ValueError("t must be positive")
    tri = figure_eight()
    return ParamSet(
        (_tet_from_signs(_FIG8_E, t), _tet_from_signs(_FIG8_F, t)),
        (1.0,) * len(tri.face_classes()))


def figure_eight_sister() -> Triangulation:
    """Two-tetrahedron ideal triangulation of the figure-eight sister manifold."""
    return Triangulation([
        [(1, (3, 4, 2, 1)), (1, (3, 1, 4, 2)), (1, (1, 3, 2, 4)), (1, (2, 1, 3, 4))],
        [(0, (2, 4, 1, 3)), (0, (1, 3, 2, 4)), (0, (4, 3, 1, 2)), (0, (2, 1, 3, 4))],
    ])


_SISTER_E = dict(zip(_EF_ORDER, [+1, +1, +1, +1, -1, -1, -1, -1, +1, +1, -1, -1]))
_SISTER_F = dict(zip(_EF_ORDER, [+1, +1, -1, -1, -1, -1, -1, -1, +1, +1, +1, +1]))


def sister_params(t: float) -> ParamSet:
    """The sister's solution curve; completed gluing parameters carry t^2 at
    (21)4/(34)1 of tet 0 and t^-2 at (13)4/(24)3 of tet 1."""
    if not (t > 0):
        raise ValueError("t must be positive")
    tri = figure_eight_sister()
    return ParamSet(
        (_tet_from_signs(_SISTER_E, t), _tet_from_signs(_SISTER_F, t)),
        (1.0,) * len(tri.face_classes()))


def hopf_orbifold(order: int = 3) -> Triangulation:
    """One-tetrahedron ideal triangulation of the Hopf link orbifold, all three
    edges carrying the given cone order."""
    tri = Triangulation([
        [(0, (2, 1, 3, 4)), (0, (2, 1, 3, 4)), (0, (1, 2, 4, 3)), (0, (1, 2, 4, 3))],
    ], edge_orders={0: order, 1: order, 2: order})
    return tri


def hopf_solution_params() -> ParamSet:
    """The hyperbolic orbifold solution (regular ideal tetrahedron shape)."""
    tri = hopf_orbifold()
    tp = TetParams.from_edge_dict({
        (1, 2): 1.0, (3, 4): 1.0, (1, 3): 1 / 3, (2, 4): 1 / 3, (1, 4): 3.0, (2, 3): 3.0})
    # canonical gluing parameters: kappa at (12)3 and at (13)4
    gluings = []
    table = {"(12)3": 1.0, "(21)4": 1.0, "(34)1": 1.0, "(43)2": 1.0,
             "(13)4": 1 / 3, "(31)2": 1 / 3, "(24)3": 1 / 3, "(42)1": 1 / 3,
             "(14)2": 3.0, "(41)3": 3.0, "(23)1": 3.0, "(32)4": 3.0}
    for fc in tri.face_classes():
        gluings.append(table[repr(fc.sigma0)])
    return ParamSet((tp,), tuple(gluings))
