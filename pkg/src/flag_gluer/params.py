"""Parameter storage and scalar consistency residuals.

Per tetrahedron only the 6 edge ratios are stored (so ``e_sigma = e_conj(sigma)``
holds by construction) and per face class a single canonical gluing parameter;
triple ratios and the remaining gluing parameters are derived.  All residuals
are in log space: the equations are multiplicative and positivity is automatic.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .edgeface import ALL_EDGE_FACES, EdgeFace, conj, from_text, opp, pred, succ
from .triangulation import Triangulation

__all__ = [
    "TetParams", "DerivedTet", "ParamSet", "ParamError",
    "internal_residual", "face_residual", "complete_gluings",
    "parse_params", "params_to_json",
]

EDGE_KEYS = ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))

# canonical edge-face per unoriented edge: the lower-indexed of the conjugate pair
CANONICAL_EF = {}
for _s in ALL_EDGE_FACES:
    k = _s.edge_key
    if k not in CANONICAL_EF or _s.index < CANONICAL_EF[k].index:
        CANONICAL_EF[k] = _s


class ParamError(ValueError):
    """Malformed or inconsistent parameter data."""


@dataclass(frozen=True)
class TetParams:
    """The six edge ratios of one tetrahedron, keyed by unoriented edge."""
    edge_ratios: tuple[float, float, float, float, float, float]

    def __post_init__(self):
        if len(self.edge_ratios) != 6:
            raise ParamError("expected 6 edge ratios")
        if any(not (v > 0) for v in self.edge_ratios):
            raise ParamError(f"edge ratios must be strictly positive, got {self.edge_ratios}")

    @classmethod
    def from_edge_dict(cls, ratios: Mapping[tuple[int, int], float]) -> "TetParams":
        return cls(tuple(float(ratios[k]) for k in EDGE_KEYS))

    @classmethod
    def ones(cls) -> "TetParams":
        return cls((1.0,) * 6)

    def e(self, sigma: EdgeFace) -> float:
        return self.edge_ratios[EDGE_KEYS.index(sigma.edge_key)]

    def e_edge(self, key: tuple[int, int]) -> float:
        return self.edge_ratios[EDGE_KEYS.index(key)]

    def derive(self) -> "DerivedTet":
        return DerivedTet(self)


class DerivedTet:
    """Quantities derived from the edge ratios of one tetrahedron.

    Triple ratios come from the vertex-star products (``t_sigma =
    e_op(sigma) e_op(sigma+) e_op(sigma-)``), which makes them constant on each
    face by construction; ``mu`` and ``nu`` are the same expression and both
    names are kept for the two roles they play (standard position, flip map).
    """

    def __init__(self, tp: TetParams):
        self.params = tp
        self._t = {}
        self._mu = {}
        for s in ALL_EDGE_FACES:
            t = tp.e(opp(s)) * tp.e(opp(succ(s))) * tp.e(opp(pred(s)))
            if not (t > 0):
                raise ParamError(f"nonpositive triple ratio at {s}")
            self._t[s] = t
            self._mu[s] = tp.e(pred(s)) * tp.e(succ(s)) - tp.e(pred(s)) + 1.0

    def t(self, s: EdgeFace) -> float:
        return self._t[s]

    def mu(self, s: EdgeFace) -> float:
        return self._mu[s]

    nu = mu

    def X(self, s: EdgeFace) -> float:
        t = self._t[s]
        return self._mu[s] * t * self.params.e(s) / (t + 1.0)

    def Y(self, s: EdgeFace) -> float:
        t = self._t[s]
        d = t * self._mu[s]
        if d == 0.0:
            raise ParamError(f"Y undefined at {s}: t*mu = 0")
        return (t + 1.0) / d

    def mu_Y(self, s: EdgeFace) -> float:
        """The product mu(s) * Y(s) = (t+1)/t, defined even when mu = 0."""
        t = self._t[s]
        return (t + 1.0) / t

    def j(self, s: EdgeFace) -> float:
        return self.params.e(s) - self.X(s) ** 2


@dataclass(frozen=True)
class ParamSet:
    """Edge ratios per tetrahedron plus one canonical gluing parameter per
    face class (aligned with ``tri.face_classes()`` order)."""
    tets: tuple[TetParams, ...]
    gluings: tuple[float, ...]

    def __post_init__(self):
        if any(not (g > 0) for g in self.gluings):
            raise ParamError("gluing parameters must be strictly positive")

    @classmethod
    def ones(cls, tri: Triangulation) -> "ParamSet":
        return cls(tuple(TetParams.ones() for _ in range(tri.num_tetrahedra)),
                   (1.0,) * len(tri.face_classes()))

    def check_shape(self, tri: Triangulation):
        if len(self.tets) != tri.num_tetrahedra or len(self.gluings) != len(tri.face_classes()):
            raise ParamError("parameter set does not match the triangulation")

    def derived(self) -> tuple[DerivedTet, ...]:
        return tuple(tp.derive() for tp in self.tets)


def internal_residual(tp: TetParams) -> float:
    """log of the six-fold edge-ratio product; zero iff the one non-automatic
    internal consistency equation holds."""
    return math.fsum(math.log(v) for v in tp.edge_ratios)


def face_residual(ps: ParamSet, tri: Triangulation, face_id: int) -> float:
    """log(t_sigma0 * t_tau0) for the face class's canonical glued pair."""
    fc = tri.face_classes()[face_id]
    da = ps.tets[fc.tet_a].derive()
    db = ps.tets[fc.tet_b].derive()
    return math.log(da.t(fc.sigma0)) + math.log(db.t(fc.tau0))


def complete_gluings(ps: ParamSet, tri: Triangulation) -> tuple[dict[EdgeFace, float], ...]:
    """All 12 per-tet gluing parameters, derived from the canonical ones.

    Within a face glued along (sigma, tau):
        kappa_{sigma+} = kappa_sigma * e_tau^{T'} * e_{sigma+}^T
        kappa_{sigma-} = kappa_sigma / (e_{tau+}^{T'} * e_sigma^T)
    and reciprocally kappa_sigma^T * kappa_tau^{T'} = 1, so every gluing
    consistency equation holds by construction.
    """
    ps.check_shape(tri)
    out = tuple({} for _ in range(tri.num_tetrahedra))

    def put(tet, s, val):
        out[tet][s] = val
        tet2, tau = tri.glued(tet, s)
        out[tet2][tau] = 1.0 / val

    for fc, g in zip(tri.face_classes(), ps.gluings):
        ta, s0 = fc.tet_a, fc.sigma0
        tb, t0 = fc.tet_b, fc.tau0
        ea, eb = ps.tets[ta], ps.tets[tb]
        put(ta, s0, g)
        put(ta, succ(s0), g * eb.e(t0) * ea.e(succ(s0)))
        put(ta, pred(s0), g / (eb.e(succ(t0)) * ea.e(s0)))
    return out


def kappa_at(ps: ParamSet, tri: Triangulation, tet: int, sigma: EdgeFace) -> float:
    return complete_gluings(ps, tri)[tet][sigma]


# -- parameter files -------------------------------------------------------


def params_to_json(ps: ParamSet, tri: Triangulation) -> dict:
    """Reduced form: one edge ratio per unoriented edge (canonical edge-face
    key) and one gluing parameter per face class (canonical pair key)."""
    ps.check_shape(tri)
    edge_ratios = {}
    for tet, tp in enumerate(ps.tets):
        for key in EDGE_KEYS:
            edge_ratios[f"{tet}:{CANONICAL_EF[key]}"] = tp.e_edge(key)
    gluing = {fc.key(): g for fc, g in zip(tri.face_classes(), ps.gluings)}
    return {"edge_ratios": edge_ratios, "gluing_params": gluing}


def _parse_param_key(key: str) -> tuple[int, EdgeFace]:
    tet_s, _, ef_s = key.partition(":")
    try:
        return int(tet_s), from_text(ef_s)
    except ValueError as exc:
        raise ParamError(f"bad parameter key {key!r}: {exc}") from exc


def parse_params(text: str, tri: Triangulation) -> ParamSet:
    """Read a parameter file against a triangulation.

    ``edge_ratios`` may give all 12 per-tet values (validated for conjugation
    symmetry) or the reduced 6; ``gluing_params`` one value per face class,
    attached to any actually-glued edge-face pair.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParamError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "edge_ratios" not in doc:
        raise ParamError("parameter file must be an object with an edge_ratios field")

    per_tet: list[dict] = [dict() for _ in range(tri.num_tetrahedra)]
    for key, val in doc["edge_ratios"].items():
        tet, ef = _parse_param_key(key)
        if not (0 <= tet < tri.num_tetrahedra):
            raise ParamError(f"edge ratio {key!r}: no tetrahedron {tet}")
        val = float(val)
        if not (val > 0):
            raise ParamError(f"edge ratio {key!r} must be positive, got {val}")
        ek = ef.edge_key
        if ek in per_tet[tet]:
            old = per_tet[tet][ek]
            if abs(val - old) > 1e-9 * max(abs(val), abs(old)):
                raise ParamError(
                    f"edge ratio {key!r} = {val} conflicts with its conjugate value {old}")
        per_tet[tet][ek] = val
    tets = []
    for tet, ratios in enumerate(per_tet):
        missing = [k for k in EDGE_KEYS if k not in ratios]
        if missing:
            raise ParamError(f"tet {tet}: missing edge ratios for edges {missing}")
        tets.append(TetParams.from_edge_dict(ratios))

    classes = tri.face_classes()
    gluings = [None] * len(classes)
    for key, val in (doc.get("gluing_params") or {}).items():
        a, _, b = key.partition("|")
        ta, sa = _parse_param_key(a)
        tb, sb = _parse_param_key(b)
        if tri.glued(ta, sa) != (tb, sb):
            raise ParamError(f"gluing key {key!r}: those edge-faces are not glued")
        val = float(val)
        if not (val > 0):
            raise ParamError(f"gluing parameter {key!r} must be positive, got {val}")
        fc = tri.face_class_of(ta, sa)
        canon = _walk_to_canonical(tets, tri, fc, ta, sa, val)
        if gluings[fc.face_id] is not None and \
                abs(canon - gluings[fc.face_id]) > 1e-9 * abs(canon):
            raise ParamError(f"gluing key {key!r} conflicts with another value for its face")
        gluings[fc.face_id] = canon
    for fc in classes:
        if gluings[fc.face_id] is None:
            raise ParamError(f"missing gluing parameter for face class {fc.key()!r}")
    return ParamSet(tuple(tets), tuple(gluings))


def _walk_to_canonical(tets, tri: Triangulation, fc, tet: int, sigma: EdgeFace,
                       val: float) -> float:
    """Express a gluing value given at (tet, sigma) at the canonical pair."""
    if (tet, sigma) != (fc.tet_a, fc.sigma0):
        # move to the canonical side first
        if (tet, sigma) not in ((fc.tet_a, s) for s in (fc.sigma0, succ(fc.sigma0), pred(fc.sigma0))):
            tet2, tau = tri.glued(tet, sigma)
            tet, sigma, val = tet2, tau, 1.0 / val
    ea = tets[fc.tet_a]
    tb, eb = fc.tet_b, tets[fc.tet_b]
    if sigma == fc.sigma0:
        return val
    if sigma == succ(fc.sigma0):
        # val = canon * e_tau0^B * e_{sigma0+}^A
        return val / (eb.e(fc.tau0) * ea.e(succ(fc.sigma0)))
    if sigma == pred(fc.sigma0):
        return val * eb.e(succ(fc.tau0)) * ea.e(fc.sigma0)
    raise ParamError(f"edge-face {sigma} is not on face class {fc.key()!r}")
