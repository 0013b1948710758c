"""The twelve edge-faces of a tetrahedron, identified with Alt(4).

An edge-face ``(ij)k`` is the oriented edge ``(i,j)`` inside the oriented face
``<ijk>`` of a tetrahedron with vertices 1..4, encoded as the even permutation
``[i,j,k,l]``.  Values are interned as indices 0..11 with precomputed tables
for the operations, since they index the hot loops of residual assembly.
"""
from __future__ import annotations

import itertools
import re

__all__ = [
    "EdgeFace", "ALL_EDGE_FACES", "from_perm", "from_text",
    "succ", "pred", "conj", "opp", "conj_opp",
]


def _parity(p):
    return sum(1 for a in range(4) for b in range(a + 1, 4) if p[a] > p[b]) % 2


_PERMS = tuple(sorted(p for p in itertools.permutations((1, 2, 3, 4)) if _parity(p) == 0))
_INDEX = {p: n for n, p in enumerate(_PERMS)}


class EdgeFace:
    """One of the 12 edge-faces, interned: identity comparison is safe."""

    __slots__ = ("index", "perm")

    def __init__(self, index: int, perm: tuple[int, int, int, int]):
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "perm", perm)

    def __setattr__(self, *a):
        raise AttributeError("EdgeFace is immutable")

    @property
    def edge(self) -> tuple[int, int]:
        """The oriented edge (i, j)."""
        return self.perm[:2]

    @property
    def edge_key(self) -> tuple[int, int]:
        """The unoriented edge as a sorted pair; storage key for edge ratios."""
        i, j = self.perm[:2]
        return (i, j) if i < j else (j, i)

    @property
    def face(self) -> frozenset[int]:
        """The vertex set {i, j, k} of the face containing this edge-face."""
        return frozenset(self.perm[:3])

    @property
    def vertex(self) -> int:
        """Initial vertex i of the oriented edge (anchors cusp bookkeeping)."""
        return self.perm[0]

    @property
    def opposite_vertex(self) -> int:
        """The vertex l not on the face."""
        return self.perm[3]

    def __repr__(self):
        i, j, k, _ = self.perm
        return f"({i}{j}){k}"

    def __hash__(self):
        return self.index

    def __eq__(self, other):
        return self is other or (isinstance(other, EdgeFace) and self.index == other.index)

    def __lt__(self, other):
        return self.index < other.index

    def __reduce__(self):
        return (_by_index, (self.index,))


ALL_EDGE_FACES: tuple[EdgeFace, ...] = tuple(EdgeFace(n, p) for n, p in enumerate(_PERMS))


def _by_index(n: int) -> EdgeFace:
    return ALL_EDGE_FACES[n]


def from_perm(perm) -> EdgeFace:
    """Edge-face for an even permutation [i, j, k, l] of (1, 2, 3, 4)."""
    p = tuple(perm)
    if p not in _INDEX:
        raise ValueError(f"{perm!r} is not an even permutation of (1, 2, 3, 4)")
    return ALL_EDGE_FACES[_INDEX[p]]


_TEXT_RE = re.compile(r"^\((\d)(\d)\)(\d)$")


def from_text(text: str) -> EdgeFace:
    """Parse the rendering "(ij)k", e.g. "(12)3"."""
    m = _TEXT_RE.match(text.strip())
    if not m:
        raise ValueError(f"malformed edge-face {text!r}, expected \"(ij)k\"")
    i, j, k = (int(g) for g in m.groups())
    rest = {1, 2, 3, 4} - {i, j, k}
    if len(rest) != 1:
        raise ValueError(f"edge-face {text!r} does not name three distinct vertices in 1..4")
    ef = from_perm((i, j, k, rest.pop()))
    return ef


def _table(fn):
    return tuple(ALL_EDGE_FACES[_INDEX[fn(p)]] for p in _PERMS)


_SUCC = _table(lambda p: (p[2], p[0], p[1], p[3]))       # (ij)k -> (ki)j
_PRED = _table(lambda p: (p[1], p[2], p[0], p[3]))       # (ij)k -> (jk)i
_CONJ = _table(lambda p: (p[1], p[0], p[3], p[2]))       # (ij)k -> (ji)l
_OPP = _table(lambda p: (p[3], p[2], p[1], p[0]))        # (ij)k -> (lk)j
_CONJ_OPP = _table(lambda p: (p[2], p[3], p[0], p[1]))   # (ij)k -> (kl)i


def succ(s: EdgeFace) -> EdgeFace:
    """sigma+ : the next edge-face around the same face."""
    return _SUCC[s.index]


def pred(s: EdgeFace) -> EdgeFace:
    """sigma- : the previous edge-face around the same face."""
    return _PRED[s.index]


def conj(s: EdgeFace) -> EdgeFace:
    """The conjugate: same unoriented edge, reversed orientation, other face."""
    return _CONJ[s.index]


def opp(s: EdgeFace) -> EdgeFace:
    """The positive opposite: lives on the vertex-disjoint edge."""
    return _OPP[s.index]


def conj_opp(s: EdgeFace) -> EdgeFace:
    """The negative opposite, equal to opp(conj(s))."""
    return _CONJ_OPP[s.index]
