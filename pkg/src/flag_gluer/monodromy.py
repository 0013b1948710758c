"""The monodromy complex: matrix cochains, 2-cells, edge matrices, holonomy.

Vertices of the complex are (tet, edge-face) pairs; red edges rotate within a
face, blue edges flip to the conjugate edge-face, green edges cross a face
pairing.  Every 2-cell boundary below is traversed so that only forward
cochain values appear (rot-steps go to sigma-, never sigma+), which keeps the
edge-matrix block structure exact.
"""
from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .edgeface import ALL_EDGE_FACES, EdgeFace, conj, from_text, pred, succ
from .flags import TetOfFlags, is_scalar_identity, proj_distance, standard_representative
from .params import DerivedTet, ParamSet, complete_gluings
from .triangulation import EdgeCycle, Triangulation

__all__ = [
    "rot_matrix", "flip_matrix", "glue_matrix",
    "MonodromyComplex", "Cochain", "PathSpec", "parse_path",
    "evaluate_path", "holonomy", "edge_matrices", "EdgeMatrixReport",
    "verify_cocycle", "CocycleReport", "peripheral_loops", "develop", "Placement",
    "CocycleError", "PathError",
]


class PathError(ValueError):
    """Inapplicable move or malformed path specification."""


class CocycleError(ValueError):
    """Operation requires the cocycle condition, which does not hold."""


def rot_matrix(d: DerivedTet, sigma: EdgeFace) -> np.ndarray:
    """Cochain of the red edge from (T, sigma+) to (T, sigma)."""
    t = d.t(sigma)
    return np.array([
        [0.0, 1.0, 0.0, 0.0],
        [t, 1.0, -(1.0 + t), 0.0],
        [0.0, 1.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0 / d.params.e(succ(sigma))],
    ])


def flip_matrix(d: DerivedTet, sigma: EdgeFace) -> np.ndarray:
    """Cochain of the blue edge from (T, conj(sigma)) to (T, sigma)."""
    e = d.params.e(sigma)
    x = d.X(sigma)
    xb = d.X(conj(sigma))
    return np.array([
        [0.0, e, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, xb, x * xb - e],
        [0.0, 0.0, -1.0, -x],
    ])


def glue_matrix(kappa: float) -> np.ndarray:
    """Cochain of the green edge from (T', tau) into (T, sigma), kappa = kappa^T_sigma."""
    if kappa == 0.0:
        raise ValueError("gluing parameter must be nonzero")
    if kappa < 0.0:
        warnings.warn("negative gluing parameter: the gluing is not geometric", stacklevel=2)
    return np.array([
        [0.0, 1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, -kappa],
    ])


# -- the complex -------------------------------------------------------------


class MonodromyComplex:
    """Vertices, colored edges and 2-cells of the complex dual to ``tri``."""

    def __init__(self, tri: Triangulation):
        self.tri = tri
        n = tri.num_tetrahedra
        self.vertices = [(t, s) for t in range(n) for s in ALL_EDGE_FACES]
        self.red_edges = [((t, succ(s)), (t, s)) for t in range(n) for s in ALL_EDGE_FACES]
        self.blue_edges = [((t, conj(s)), (t, s)) for t in range(n) for s in ALL_EDGE_FACES
                           if s.index < conj(s).index]
        self.green_edges = []
        for t in range(n):
            for s in ALL_EDGE_FACES:
                t2, tau = tri.glued(t, s)
                if (t, s.index) <= (t2, tau.index):
                    self.green_edges.append(((t, s), (t2, tau)))
        self.triangles = self._triangles()
        self.hexagons = self._hexagons()
        self.quadrilaterals = self._quadrilaterals()
        self.edge_polygons = self._edge_polygons()

    def _triangles(self):
        # boundaries are move words: the complex is a multigraph (a face glued
        # to itself along (sigma, conj sigma) puts a green edge in parallel
        # with a blue edge), so vertex pairs alone do not name an edge
        cells = []
        for t in range(self.tri.num_tetrahedra):
            seen = set()
            for s in ALL_EDGE_FACES:
                if s.face in seen:
                    continue
                seen.add(s.face)
                cells.append((("triangle", t, repr(s)),
                              PathSpec(t, s, ("rot-",) * 3)))
        return cells

    def _hexagons(self):
        cells = []
        for t in range(self.tri.num_tetrahedra):
            for v in (1, 2, 3, 4):
                s = next(x for x in ALL_EDGE_FACES if x.perm[1] == v)
                cells.append((("hexagon", t, v),
                              PathSpec(t, s, ("rot-", "flip") * 3)))
        return cells

    def _quadrilaterals(self):
        cells = []
        for fc in self.tri.face_classes():
            for base in (fc.sigma0, succ(fc.sigma0), pred(fc.sigma0)):
                cells.append((("quadrilateral", fc.face_id, repr(base)),
                              PathSpec(fc.tet_a, base, ("glue", "rot-", "glue", "rot-"))))
        return cells

    def _edge_polygons(self):
        cells = []
        for cyc in self.tri.edge_cycles():
            tet0, _, tau0 = cyc.slots[0]
            cells.append((("edge_polygon", cyc.edge_id, cyc.valence),
                          PathSpec(tet0, tau0, ("flip", "glue") * cyc.valence)))
        return cells

    def counts(self) -> dict:
        return {
            "vertices": len(self.vertices),
            "red_edges": len(self.red_edges),
            "blue_edges": len(self.blue_edges),
            "green_edges": len(self.green_edges),
            "triangles": len(self.triangles),
            "quadrilaterals": len(self.quadrilaterals),
            "hexagons": len(self.hexagons),
            "edge_polygons": len(self.edge_polygons),
        }


# -- cochain evaluation ------------------------------------------------------

MOVES = ("rot+", "rot-", "flip", "glue")


@dataclass(frozen=True)
class PathSpec:
    """A start vertex and a move word over {rot+, rot-, flip, glue}."""
    tet: int
    sigma: EdgeFace
    moves: tuple[str, ...]

    def __str__(self):
        return " ".join([f"{self.tet}:{self.sigma}", *self.moves])


def parse_path(text: str) -> PathSpec:
    parts = text.split()
    if not parts:
        raise PathError("empty path specification")
    tet_s, _, ef_s = parts[0].partition(":")
    try:
        tet, sigma = int(tet_s), from_text(ef_s)
    except ValueError as exc:
        raise PathError(f"bad start vertex {parts[0]!r}: {exc}") from exc
    for m in parts[1:]:
        if m not in MOVES:
            raise PathError(f"unknown move {m!r}; expected one of {MOVES}")
    return PathSpec(tet, sigma, tuple(parts[1:]))


def apply_move(tri: Triangulation, vertex: tuple[int, EdgeFace], move: str):
    t, s = vertex
    if move == "rot+":
        return (t, succ(s))
    if move == "rot-":
        return (t, pred(s))
    if move == "flip":
        return (t, conj(s))
    if move == "glue":
        return tri.glued(t, s)
    raise PathError(f"unknown move {move!r}")


def _invert_word(moves: Iterable[str]) -> tuple[str, ...]:
    swap = {"rot+": "rot-", "rot-": "rot+", "flip": "flip", "glue": "glue"}
    return tuple(swap[m] for m in reversed(moves))


class Cochain:
    """Matrix values of the cochain of a parameter set on a triangulation."""

    def __init__(self, tri: Triangulation, ps: ParamSet):
        ps.check_shape(tri)
        self.tri = tri
        self.ps = ps
        self.derived = ps.derived()
        self.kappas = complete_gluings(ps, tri)

    def rot(self, tet: int, sigma: EdgeFace) -> np.ndarray:
        return rot_matrix(self.derived[tet], sigma)

    def flip(self, tet: int, sigma: EdgeFace) -> np.ndarray:
        return flip_matrix(self.derived[tet], sigma)

    def glue(self, tet: int, sigma: EdgeFace) -> np.ndarray:
        return glue_matrix(self.kappas[tet][sigma])

    def move_value(self, vertex: tuple[int, EdgeFace], move: str):
        """Target vertex and cochain value of the 1-cell a move traverses."""
        nxt = apply_move(self.tri, vertex, move)
        if move == "rot-":
            return nxt, self.rot(*nxt)
        if move == "rot+":
            return nxt, np.linalg.inv(self.rot(*vertex))
        if move == "flip":
            return nxt, self.flip(*nxt)
        return nxt, self.glue(*nxt)

    def path_value(self, path: PathSpec) -> tuple[np.ndarray, tuple[int, EdgeFace]]:
        if not (0 <= path.tet < self.tri.num_tetrahedra):
            raise PathError(f"no tetrahedron {path.tet}")
        cur = (path.tet, path.sigma)
        g = np.eye(4)
        for m in path.moves:
            cur, val = self.move_value(cur, m)
            g = g @ val
        return g, cur


def evaluate_path(tri: Triangulation, ps: ParamSet, path: PathSpec) -> np.ndarray:
    g, _ = Cochain(tri, ps).path_value(path)
    return g


# -- edge matrices and the cocycle check --------------------------------------


@dataclass(frozen=True)
class EdgeMatrixReport:
    """Edge matrix of one edge class with its gluing-equation residuals."""
    edge_id: int
    valence: int
    order: int
    matrix: np.ndarray
    entries: dict
    residuals: tuple[float, ...]
    block_defect: float      # largest entry outside the expected block pattern
    g11_product: float       # independent product of outgoing edge ratios
    det_product: float       # independent product of e^2 * kappa over the cycle

    @property
    def max_residual(self) -> float:
        return max(abs(r) for r in self.residuals)


def _edge_matrix(co: Cochain, cyc: EdgeCycle) -> np.ndarray:
    """Product Flip_{sigma_i} Glue_{tau_{i+1}} around the edge polygon, based
    at the first incoming edge-face; has exact (2,2)-entry 1."""
    g = np.eye(4)
    k = cyc.valence
    for n in range(k):
        tet, sigma, _ = cyc.slots[n]
        tet2, _, tau2 = cyc.slots[(n + 1) % k]
        assert co.tri.glued(tet, sigma) == (tet2, tau2)
        g = g @ co.flip(tet, sigma)
        g = g @ co.glue(tet2, tau2)
    return g


def _residuals_for_order(g: np.ndarray, order: int) -> tuple[float, ...]:
    if order == 1:
        return (g[0, 0] - 1.0, g[2, 2] - 1.0, g[3, 3] - 1.0, g[2, 3], g[3, 2])
    trace_target = 2.0 * math.cos(2.0 * math.pi / order)
    block_det = g[2, 2] * g[3, 3] - g[2, 3] * g[3, 2]
    return (g[0, 0] - 1.0, g[2, 2] + g[3, 3] - trace_target, block_det - 1.0)


def edge_matrices(tri: Triangulation, ps: ParamSet) -> list[EdgeMatrixReport]:
    co = Cochain(tri, ps)
    out = []
    for cyc in tri.edge_cycles():
        g = _edge_matrix(co, cyc)
        block = np.zeros_like(g)
        block[0, 0] = g[0, 0]
        block[1, 1] = g[1, 1]
        block[2:, 2:] = g[2:, 2:]
        defect = float(np.max(np.abs(g - block)) / max(np.linalg.norm(g), 1e-300))
        g11 = 1.0
        detp = 1.0
        for tet, sigma, tau in cyc.slots:
            e = ps.tets[tet].e(sigma)
            g11 *= e
            detp *= e * e * co.kappas[tet][tau]
        entries = {"g11": g[0, 0], "g33": g[2, 2], "g34": g[2, 3],
                   "g43": g[3, 2], "g44": g[3, 3]}
        out.append(EdgeMatrixReport(
            edge_id=cyc.edge_id, valence=cyc.valence, order=cyc.order, matrix=g,
            entries=entries, residuals=_residuals_for_order(g, cyc.order),
            block_defect=defect, g11_product=g11, det_product=detp))
    return out


def edge_residual_vector(tri: Triangulation, ps: ParamSet) -> np.ndarray:
    """Concatenated edge residuals in edge-id order (5 per manifold edge,
    3 per orbifold edge of order >= 2)."""
    return np.concatenate([r.residuals for r in edge_matrices(tri, ps)])


@dataclass(frozen=True)
class CellCheck:
    cell: tuple
    defect: float
    passed: bool


@dataclass(frozen=True)
class CocycleReport:
    passed: bool
    cells: tuple[CellCheck, ...]

    def failing(self) -> list[CellCheck]:
        return [c for c in self.cells if not c.passed]


def verify_cocycle(tri: Triangulation, ps: ParamSet, tol: float = 1e-9) -> CocycleReport:
    """Evaluate every 2-cell boundary.  Triangles, quadrilaterals and hexagons
    must be scalar multiples of the identity; edge polygons must satisfy the
    (order-aware) edge gluing equations."""
    co = Cochain(tri, ps)
    cx = MonodromyComplex(tri)
    checks = []
    for label, boundary in cx.triangles + cx.quadrilaterals + cx.hexagons:
        g, end = co.path_value(boundary)
        assert end == (boundary.tet, boundary.sigma)
        d = proj_distance(g, np.eye(4))
        checks.append(CellCheck(label, d, d < tol))
    for rep in edge_matrices(tri, ps):
        d = max(rep.max_residual, rep.block_defect)
        checks.append(CellCheck(("edge_polygon", rep.edge_id, rep.order), d, d < tol))
    return CocycleReport(all(c.passed for c in checks), tuple(checks))


def holonomy(tri: Triangulation, ps: ParamSet, loop: PathSpec,
             tol: float = 1e-9, check_cocycle: bool = True) -> np.ndarray:
    """Holonomy of a closed loop in the monodromy complex."""
    if check_cocycle:
        report = verify_cocycle(tri, ps, tol)
        if not report.passed:
            raise CocycleError(
                f"cocycle condition fails on {len(report.failing())} cells; "
                "holonomy is not homotopy-invariant")
    g, end = Cochain(tri, ps).path_value(loop)
    if end != (loop.tet, loop.sigma):
        raise PathError(f"path is not a loop: ends at {end[0]}:{end[1]}")
    return g


# -- peripheral loops ----------------------------------------------------------

# each 2-move word keeps the initial vertex of the underlying oriented edge
PERIPHERAL_MOVES = (("flip", "rot-"), ("rot+", "flip"), ("glue", "flip"), ("glue", "rot-"))


def peripheral_loops(tri: Triangulation, cusp_id: int, count: int = 3) -> list[PathSpec]:
    """Independent loops around a cusp, as fundamental cycles of the cusp-link
    graph (nodes: edge-faces anchored at the cusp; arcs: 2-move words)."""
    nodes = sorted((t, s) for t in range(tri.num_tetrahedra) for s in ALL_EDGE_FACES
                   if tri.cusp_of(t, s.vertex) == cusp_id)
    if not nodes:
        raise ValueError(f"no cusp {cusp_id}")
    root = nodes[0]
    tree_word = {root: ()}
    queue = deque([root])
    arcs = []
    while queue:
        u = queue.popleft()
        for word in PERIPHERAL_MOVES:
            v = u
            for m in word:
                v = apply_move(tri, v, m)
            assert tri.cusp_of(v[0], v[1].vertex) == cusp_id
            if v not in tree_word:
                tree_word[v] = tree_word[u] + word
                queue.append(v)
            else:
                arcs.append((u, word, v))
    loops = []
    for u, word, v in arcs:
        moves = tree_word[u] + word + _invert_word(tree_word[v])
        if not moves:
            continue
        loops.append(PathSpec(root[0], root[1], moves))
        if len(loops) == count:
            break
    return loops


# -- developing ----------------------------------------------------------------


@dataclass(frozen=True)
class Placement:
    copy_id: int
    parent: int | None
    tet: int
    anchor: EdgeFace
    transform: np.ndarray
    flags: TetOfFlags

    @property
    def vertices(self) -> np.ndarray:
        return self.flags.points()


def _route_table():
    """Shortest move words between edge-faces of one tetrahedron."""
    table = {}
    for start in ALL_EDGE_FACES:
        words = {start: ()}
        queue = deque([start])
        while queue:
            s = queue.popleft()
            for move, nxt in (("rot-", pred(s)), ("rot+", succ(s)), ("flip", conj(s))):
                if nxt not in words:
                    words[nxt] = words[s] + (move,)
                    queue.append(nxt)
        for end, w in words.items():
            table[(start, end)] = w
    return table


_ROUTES = _route_table()


def develop(tri: Triangulation, ps: ParamSet, base: tuple[int, EdgeFace], depth: int,
            tol: float = 1e-9, check_cocycle: bool = True) -> list[Placement]:
    """Breadth-first development: place tetrahedron copies by crossing faces
    up to ``depth`` gluings, each copy as (path matrix) . (standard rep)."""
    if check_cocycle:
        report = verify_cocycle(tri, ps, tol)
        if not report.passed:
            raise CocycleError("cocycle condition fails; the development is path-dependent")
    co = Cochain(tri, ps)
    base_tet, base_sigma = base
    placements = [Placement(0, None, base_tet, base_sigma, np.eye(4),
                            standard_representative(ps.tets[base_tet], base_sigma))]
    frontier = [(0, base_tet, base_sigma, np.eye(4), None)]
    for _ in range(depth):
        nxt_frontier = []
        for copy_id, tet, anchor, g, entered in frontier:
            for face in sorted({s.face for s in ALL_EDGE_FACES}, key=sorted):
                if face == entered:
                    continue
                sigma_f = min(s for s in ALL_EDGE_FACES if s.face == face)
                gg = g.copy()
                cur = (tet, anchor)
                for move in _ROUTES[(anchor, sigma_f)]:
                    cur, val = co.move_value(cur, move)
                    gg = gg @ val
                cur, val = co.move_value(cur, "glue")
                gg = gg @ val
                tet2, tau = cur
                new_id = len(placements)
                placements.append(Placement(
                    new_id, copy_id, tet2, tau, gg,
                    standard_representative(ps.tets[tet2], tau).transform(gg)))
                nxt_frontier.append((new_id, tet2, tau, gg, tau.face))
        frontier = nxt_frontier
    return placements
