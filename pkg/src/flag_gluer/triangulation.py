"""Ideal triangulations: data model, JSON parser, and derived combinatorics.

Vertices are 1..4 internally (matching the edge-face conventions) and 0..3 in
the file format; tetrahedra are 0-based everywhere.  The file entry at face
``k`` of tet ``i`` describes the pairing of the face opposite vertex ``k``,
and ``perm`` sends vertex ``v`` of the source tetrahedron to ``perm[v]`` of
the target.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from .edgeface import ALL_EDGE_FACES, EdgeFace, conj

__all__ = [
    "Triangulation", "EdgeCycle", "VertexClass", "FaceClass",
    "TriangulationError", "parse_triangulation",
]


class TriangulationError(ValueError):
    """Malformed or inconsistent triangulation data."""


def _perm_parity(perm: Sequence[int]) -> int:
    return sum(1 for a in range(4) for b in range(a + 1, 4) if perm[a] > perm[b]) % 2


@dataclass(frozen=True)
class EdgeCycle:
    """One edge class: the cyclic tuple of tetrahedra glued around it.

    ``slots[i] = (tet, sigma, tau)`` with outgoing ``sigma``, incoming
    ``tau = conj(sigma)``; tet ``i`` is glued to tet ``i+1`` along
    ``(sigma_i, tau_{i+1})``.
    """
    edge_id: int
    slots: tuple[tuple[int, EdgeFace, EdgeFace], ...]
    order: int = 1

    @property
    def valence(self) -> int:
        return len(self.slots)


@dataclass(frozen=True)
class VertexClass:
    """An ideal vertex (cusp) class: set of (tet, vertex) incidences."""
    cusp_id: int
    members: frozenset[tuple[int, int]]


@dataclass(frozen=True)
class FaceClass:
    """A face pairing, anchored at its canonical glued edge-face pair."""
    face_id: int
    tet_a: int
    sigma0: EdgeFace
    tet_b: int
    tau0: EdgeFace

    def key(self) -> str:
        return f"{self.tet_a}:{self.sigma0}|{self.tet_b}:{self.tau0}"


class Triangulation:
    """An ideal triangulation with validated, involutive face pairings."""

    def __init__(self, gluings, edge_orders: Mapping[int, int] | None = None):
        """``gluings[tet][k] = (tet', perm)`` for the face opposite vertex k+1;
        perm is a 1-based tuple image (perm[v-1] = image of vertex v)."""
        self.num_tetrahedra = len(gluings)
        self.gluings = tuple(tuple((t, tuple(p)) for t, p in tet) for tet in gluings)
        self._validate()
        self._ef_glue = self._build_edge_face_gluing()
        self._edge_cycles = self._build_edge_cycles(edge_orders or {})
        self._vertex_classes = self._build_vertex_classes()
        self._face_classes = self._build_face_classes()

    # -- validation ------------------------------------------------------

    def _validate(self):
        n = self.num_tetrahedra
        if n == 0:
            raise TriangulationError("empty triangulation")
        for tet, faces in enumerate(self.gluings):
            if len(faces) != 4:
                raise TriangulationError(f"tet {tet} must list 4 face gluings")
            for k, (tet2, perm) in enumerate(faces):
                if not (0 <= tet2 < n):
                    raise TriangulationError(f"tet {tet} face {k}: target {tet2} out of range")
                if sorted(perm) != [1, 2, 3, 4]:
                    raise TriangulationError(f"tet {tet} face {k}: {perm} is not a permutation")
                if _perm_parity(perm) != 1:
                    raise TriangulationError(
                        f"tet {tet} face {k}: gluing to tet {tet2} is orientation-preserving "
                        f"(even permutation {perm}); face maps must reverse orientation")
                # involution: the target face's entry must point back with the inverse
                k2 = perm[k] - 1
                tet3, perm2 = self.gluings[tet2][k2]
                inv = tuple(perm.index(v + 1) + 1 for v in range(4))
                if tet3 != tet or tuple(perm2) != inv:
                    raise TriangulationError(
                        f"gluing not involutive at tet {tet} face {k}: pairs to "
                        f"tet {tet2} face {k2}, which pairs back to tet {tet3} face entry {perm2}")
        # connectivity
        seen = {0}
        stack = [0]
        while stack:
            t = stack.pop()
            for t2, _ in self.gluings[t]:
                if t2 not in seen:
                    seen.add(t2)
                    stack.append(t2)
        if len(seen) != n:
            raise TriangulationError("triangulation is not connected")

    # -- derived structure -------------------------------------------------

    def _build_edge_face_gluing(self):
        gl = {}
        for tet in range(self.num_tetrahedra):
            for s in ALL_EDGE_FACES:
                k = s.opposite_vertex - 1            # face slot opposite vertex l
                tet2, perm = self.gluings[tet][k]
                phi = lambda v: perm[v - 1]
                i, j, kk, _ = s.perm
                tau3 = (phi(j), phi(i), phi(kk))
                lp = ({1, 2, 3, 4} - set(tau3)).pop()
                gl[(tet, s)] = (tet2, _EF_BY_PERM[(*tau3, lp)])
        for key, val in gl.items():
            if gl[val] != key:
                raise TriangulationError(f"edge-face gluing not involutive at {key}")
        return gl

    def glued(self, tet: int, sigma: EdgeFace) -> tuple[int, EdgeFace]:
        """The (tet', tau) glued to (tet, sigma) across the containing face."""
        return self._ef_glue[(tet, sigma)]

    def _build_edge_cycles(self, orders: Mapping[int, int]):
        seen = set()
        cycles = []
        for tet in range(self.num_tetrahedra):
            for s in ALL_EDGE_FACES:
                if (tet, s) in seen:
                    continue
                slots = []
                cur = (tet, s)
                while True:
                    slots.append((cur[0], cur[1], conj(cur[1])))
                    seen.add(cur)
                    seen.add((cur[0], conj(cur[1])))
                    nxt_tet, tau = self._ef_glue[cur]
                    cur = (nxt_tet, conj(tau))
                    if cur == (tet, s):
                        break
                    if len(slots) > 6 * self.num_tetrahedra:
                        raise TriangulationError("edge cycle fails to close")
                eid = len(cycles)
                order = int(orders.get(eid, 1))
                if order < 1:
                    raise TriangulationError(f"edge {eid}: cone order must be >= 1")
                cycles.append(EdgeCycle(eid, tuple(slots), order))
        total = sum(c.valence for c in cycles)
        assert total == 6 * self.num_tetrahedra
        # orders keyed past the actual edge count are user errors
        for eid in orders:
            if not (0 <= int(eid) < len(cycles)):
                raise TriangulationError(f"edge_orders names unknown edge id {eid}")
        return tuple(cycles)

    def edge_cycles(self) -> tuple[EdgeCycle, ...]:
        return self._edge_cycles

    def _build_vertex_classes(self):
        parent = {(t, v): (t, v) for t in range(self.num_tetrahedra) for v in (1, 2, 3, 4)}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for tet in range(self.num_tetrahedra):
            for k in range(4):
                tet2, perm = self.gluings[tet][k]
                for v in range(1, 5):
                    if v == k + 1:
                        continue
                    a, b = find((tet, v)), find((tet2, perm[v - 1]))
                    if a != b:
                        parent[a] = b
        groups = {}
        for x in parent:
            groups.setdefault(find(x), []).append(x)
        classes = []
        for members in sorted(groups.values(), key=min):
            classes.append(VertexClass(len(classes), frozenset(members)))
        return tuple(classes)

    def vertex_classes(self) -> tuple[VertexClass, ...]:
        return self._vertex_classes

    def cusp_of(self, tet: int, vertex: int) -> int:
        for c in self._vertex_classes:
            if (tet, vertex) in c.members:
                return c.cusp_id
        raise KeyError((tet, vertex))

    def _build_face_classes(self):
        seen = set()
        classes = []
        for tet in range(self.num_tetrahedra):
            for s in ALL_EDGE_FACES:
                if (tet, s) in seen:
                    continue
                tet2, tau = self._ef_glue[(tet, s)]
                group = set()
                for a in _FACE_TRIO[s]:
                    group.add((tet, a))
                    group.add(self._ef_glue[(tet, a)])
                seen |= group
                classes.append(FaceClass(len(classes), tet, s, tet2, tau))
        assert len(classes) == 2 * self.num_tetrahedra
        return tuple(classes)

    def face_classes(self) -> tuple[FaceClass, ...]:
        return self._face_classes

    def face_class_of(self, tet: int, sigma: EdgeFace) -> FaceClass:
        for fc in self._face_classes:
            if (fc.tet_a, fc.sigma0.face) == (tet, sigma.face) or \
               (fc.tet_b, fc.tau0.face) == (tet, sigma.face):
                return fc
        raise KeyError((tet, sigma))

    @property
    def edge_orders(self) -> dict[int, int]:
        return {c.edge_id: c.order for c in self._edge_cycles if c.order != 1}

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        out = {
            "num_tetrahedra": self.num_tetrahedra,
            "gluings": [
                [{"tet": t2, "perm": [p - 1 for p in perm]} for t2, perm in faces]
                for faces in self.gluings
            ],
        }
        orders = self.edge_orders
        if orders:
            out["edge_orders"] = {str(k): v for k, v in sorted(orders.items())}
        return out

    @classmethod
    def from_json(cls, doc: dict) -> "Triangulation":
        try:
            n = int(doc["num_tetrahedra"])
            raw = doc["gluings"]
        except (KeyError, TypeError, ValueError) as exc:
            raise TriangulationError(f"missing or malformed field: {exc}") from exc
        if not isinstance(raw, list) or len(raw) != n:
            raise TriangulationError("gluings must list one 4-entry row per tetrahedron")
        gluings = []
        for tet, faces in enumerate(raw):
            if not isinstance(faces, list) or len(faces) != 4:
                raise TriangulationError(f"tet {tet}: expected 4 face entries")
            row = []
            for k, entry in enumerate(faces):
                try:
                    t2 = int(entry["tet"])
                    perm0 = [int(v) for v in entry["perm"]]
                except (KeyError, TypeError, ValueError) as exc:
                    raise TriangulationError(f"tet {tet} face {k}: bad entry ({exc})") from exc
                if sorted(perm0) != [0, 1, 2, 3]:
                    raise TriangulationError(
                        f"tet {tet} face {k}: perm {perm0} is not a permutation of 0..3")
                row.append((t2, tuple(p + 1 for p in perm0)))
            gluings.append(row)
        orders = {}
        for key, val in (doc.get("edge_orders") or {}).items():
            orders[int(key)] = int(val)
        return cls(gluings, orders)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


_EF_BY_PERM = {ef.perm: ef for ef in ALL_EDGE_FACES}
_FACE_TRIO = {s: tuple(a for a in ALL_EDGE_FACES if a.face == s.face) for s in ALL_EDGE_FACES}


def parse_triangulation(text: str) -> Triangulation:
    """Parse and validate a triangulation file (JSON, 0-based)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TriangulationError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise TriangulationError("triangulation file must contain a JSON object")
    return Triangulation.from_json(doc)
