"""Classification into hyperbolic / Anti-de Sitter / half-pipe geometry.

The two-dimensional algebras with ``iota^2 = star`` for star in {-1, +1, 0}
carry the classical tetrahedron shapes; the dictionary to the projective
parameters is ``e = |z|^2``, ``X = Re z``, ``j = -iota^2 (Im z)^2``, and the
sign of ``j = e - X^2`` picks the geometry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .edgeface import ALL_EDGE_FACES, EdgeFace, conj, opp, pred, succ
from .params import DerivedTet, ParamError, ParamSet, TetParams, complete_gluings
from .triangulation import Triangulation

__all__ = [
    "BNumber", "LightLikeError", "TetClassification", "classify_tet", "classify",
    "thurston_internal_check", "thurston_gluing_check",
    "phi_star", "psi_star", "check_S_star", "SStarReport",
    "hyperbolic_quadric_form",
]

KINDS = ("hyperbolic", "anti_de_sitter", "half_pipe", "non_x")
_STAR_OF_KIND = {"hyperbolic": -1, "anti_de_sitter": 1, "half_pipe": 0}


class LightLikeError(ZeroDivisionError):
    """Inversion of a light-like element of B_star."""


@dataclass(frozen=True)
class BNumber:
    """Element re + iota*im of the algebra with iota^2 = star in {-1, +1, 0}."""
    re: float
    im: float
    star: int

    def __post_init__(self):
        if self.star not in (-1, 0, 1):
            raise ValueError("star must be -1, 0 or +1")

    def _check(self, other: "BNumber"):
        if not isinstance(other, BNumber):
            raise TypeError("expected a BNumber")
        if other.star != self.star:
            raise ValueError("mixed B_star algebras")

    def __add__(self, other):
        if isinstance(other, (int, float)):
            return BNumber(self.re + other, self.im, self.star)
        self._check(other)
        return BNumber(self.re + other.re, self.im + other.im, self.star)

    __radd__ = __add__

    def __neg__(self):
        return BNumber(-self.re, -self.im, self.star)

    def __sub__(self, other):
        return self + (-other if isinstance(other, BNumber) else -float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return BNumber(self.re * other, self.im * other, self.star)
        self._check(other)
        return BNumber(self.re * other.re + self.star * self.im * other.im,
                       self.re * other.im + self.im * other.re, self.star)

    __rmul__ = __mul__

    def conjugate(self) -> "BNumber":
        return BNumber(self.re, -self.im, self.star)

    def norm2(self) -> float:
        """|z|^2 = re^2 - star * im^2; may be negative when star = +1."""
        return self.re * self.re - self.star * self.im * self.im

    def is_space_like(self) -> bool:
        return self.norm2() > 0

    def is_light_like(self, tol: float = 0.0) -> bool:
        return abs(self.norm2()) <= tol

    def inverse(self) -> "BNumber":
        n = self.norm2()
        if n == 0.0:
            raise LightLikeError(f"{self} is light-like and has no inverse")
        return BNumber(self.re / n, -self.im / n, self.star)

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return BNumber(self.re / other, self.im / other, self.star)
        self._check(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * float(other)

    def dist(self, other: "BNumber") -> float:
        """Componentwise (Euclidean) distance; the honest residual metric,
        since the B_star pseudo-norm vanishes on nonzero vectors for star=1."""
        self._check(other)
        return math.hypot(self.re - other.re, self.im - other.im)

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.re, self.star * self.im], [self.im, self.re]])


def _one(star: int) -> BNumber:
    return BNumber(1.0, 0.0, star)


# -- classification ------------------------------------------------------------


@dataclass(frozen=True)
class TetClassification:
    kind: str
    z: dict | None = None                  # EdgeFace -> BNumber for X-tets
    scale: float | None = None             # half-pipe fiber coordinate
    witness: tuple | None = None           # (EdgeFace, triple ratio) for non-X
    warning: str = ""


def _halfpipe_deltas(d: DerivedTet, seed: float) -> dict:
    """Imaginary parts for a half-pipe tet, propagated from the first slot."""
    tp = d.params
    delta = {ALL_EDGE_FACES[0]: seed}
    frontier = [ALL_EDGE_FACES[0]]
    while frontier:
        s = frontier.pop()
        v = delta[s]
        for nxt, val in ((succ(s), v * tp.e(succ(s))), (pred(s), v / tp.e(s)),
                         (conj(s), v), (opp(s), v)):
            if nxt not in delta:
                delta[nxt] = val
                frontier.append(nxt)
    return delta


def classify_tet(tp: TetParams, tol: float = 1e-8) -> TetClassification:
    """Classify one tetrahedron; X-tetrahedra have all triple ratios 1."""
    d = tp.derive()
    worst = max(ALL_EDGE_FACES, key=lambda s: abs(math.log(d.t(s))))
    if abs(d.t(worst) - 1.0) > tol:
        return TetClassification("non_x", witness=(worst, d.t(worst)))
    js = {s: d.j(s) for s in ALL_EDGE_FACES}
    if all(abs(j) < tol * tp.e(s) for s, j in js.items()):
        delta = _halfpipe_deltas(d, 1.0)
        z = {s: BNumber(d.X(s), delta[s], 0) for s in ALL_EDGE_FACES}
        return TetClassification("half_pipe", z=z, scale=1.0)
    if all(j > 0 for j in js.values()):
        z = {s: BNumber(d.X(s), math.sqrt(j), -1) for s, j in js.items()}
        return TetClassification("hyperbolic", z=z)
    if all(j < 0 for j in js.values()):
        z = {s: BNumber(d.X(s), math.sqrt(-j), 1) for s, j in js.items()}
        return TetClassification("anti_de_sitter", z=z)
    return TetClassification("non_x", witness=(worst, d.t(worst)),
                             warning="borderline: j-parameter signs are mixed at tolerance")


def classify(ps: ParamSet, tri: Triangulation, tol: float = 1e-8):
    """Per-tet classification plus whether the whole triangulation is uniform."""
    ps.check_shape(tri)
    entries = [classify_tet(tp, tol) for tp in ps.tets]
    kinds = {e.kind for e in entries}
    return entries, (kinds.pop() if len(kinds) == 1 else None)


# -- Thurston parameters and equations ------------------------------------------


def thurston_internal_check(z: Mapping[EdgeFace, BNumber]) -> list[tuple]:
    """Residuals of the internal relations z_conj = z, z_opp = z,
    z_{sigma+} (1 - z_sigma) = 1 on one tetrahedron."""
    out = []
    for s in ALL_EDGE_FACES:
        zs = z[s]
        out.append((s, "conj", zs.dist(z[conj(s)])))
        out.append((s, "opp", zs.dist(z[opp(s)])))
        w = 1.0 - zs
        if w.is_light_like():
            raise LightLikeError(f"1 - z_{s} is light-like")
        out.append((s, "succ", (z[succ(s)] * w).dist(_one(zs.star))))
    return out


def thurston_gluing_check(z: Mapping[tuple[int, EdgeFace], BNumber],
                          tri: Triangulation) -> list[float]:
    """Componentwise residual of prod z_{sigma_i} = 1 around each edge class."""
    out = []
    for cyc in tri.edge_cycles():
        prod = None
        for tet, sigma, _ in cyc.slots:
            w = z[(tet, sigma)]
            prod = w if prod is None else prod * w
        out.append(prod.dist(_one(prod.star)))
    return out


def _star_of(z: Mapping) -> int:
    return next(iter(z.values())).star


def phi_star(z: Mapping[tuple[int, EdgeFace], BNumber], tri: Triangulation,
             tol: float = 1e-9) -> ParamSet:
    """Projective parameters of a Thurston assignment: t = 1, e = |z|^2,
    kappa_sigma = Im(z_sigma) / Im(z_tau) across each gluing."""
    star = _star_of(z)
    for tet in range(tri.num_tetrahedra):
        per_tet = {s: z[(tet, s)] for s in ALL_EDGE_FACES}
        for s, w in per_tet.items():
            if w.im <= 0:
                raise ParamError(f"Im(z) must be positive at tet {tet}, {s}")
            if not w.is_space_like() or not (1.0 - w).is_space_like():
                raise ParamError(f"z and 1-z must be space-like at tet {tet}, {s}")
        for s, rel, r in thurston_internal_check(per_tet):
            if r > tol * max(1.0, abs(per_tet[s].re), abs(per_tet[s].im)):
                raise ParamError(f"internal relation {rel} fails at tet {tet}, {s} (residual {r})")
    tets = tuple(
        TetParams.from_edge_dict(
            {key: z[(tet, s)].norm2()
             for s in ALL_EDGE_FACES for key in [s.edge_key]})
        for tet in range(tri.num_tetrahedra))
    gluings = []
    for fc in tri.face_classes():
        gluings.append(z[(fc.tet_a, fc.sigma0)].im / z[(fc.tet_b, fc.tau0)].im)
    return ParamSet(tets, tuple(gluings))


@dataclass(frozen=True)
class SStarReport:
    passed: bool
    star: int
    opp_residual: float      # worst |log(e_sigma / e_opp(sigma))|
    j_glue_residual: float   # worst normalized |j_sigma - g^2 j_tau|
    sign_violation: float    # worst violation of the star-specific j sign

    def __bool__(self):
        return self.passed


def check_S_star(ps: ParamSet, tri: Triangulation, star: int,
                 tol: float = 1e-8) -> SStarReport:
    """Membership test for the image of the star-geometry deformation space."""
    ps.check_shape(tri)
    derived = ps.derived()
    opp_res = 0.0
    for tp in ps.tets:
        for s in ALL_EDGE_FACES:
            opp_res = max(opp_res, abs(math.log(tp.e(s) / tp.e(opp(s)))))
    kappas = complete_gluings(ps, tri)
    glue_res = 0.0
    for tet in range(tri.num_tetrahedra):
        for s in ALL_EDGE_FACES:
            tet2, tau = tri.glued(tet, s)
            js = derived[tet].j(s)
            jt = derived[tet2].j(tau)
            g = kappas[tet][s]
            r = abs(js - g * g * jt) / max(1.0, abs(js), g * g * abs(jt))
            glue_res = max(glue_res, r)
    sign_res = 0.0
    for tet, tp in enumerate(ps.tets):
        for s in ALL_EDGE_FACES:
            j = derived[tet].j(s)
            scaled = j / tp.e(s)
            if star == 0:
                sign_res = max(sign_res, abs(scaled))
            elif star == -1:
                sign_res = max(sign_res, -scaled)
            else:
                sign_res = max(sign_res, scaled)
    passed = opp_res < tol and glue_res < tol and sign_res < tol
    return SStarReport(passed, star, opp_res, glue_res, sign_res)


def psi_star(ps: ParamSet, tri: Triangulation, star: int, scale: float = 1.0,
             tol: float = 1e-8) -> dict[tuple[int, EdgeFace], BNumber]:
    """Thurston parameters of an S_star member: z = X + iota*delta with
    delta = sqrt|j| for star = +-1; for star = 0 delta is propagated from the
    given global scale (the fiber coordinate)."""
    report = check_S_star(ps, tri, star, tol)
    if not report:
        raise ParamError(f"parameters are not in the star={star} locus: {report}")
    if scale <= 0:
        raise ParamError("scale must be positive")
    derived = ps.derived()
    out = {}
    if star != 0:
        for tet in range(tri.num_tetrahedra):
            for s in ALL_EDGE_FACES:
                j = derived[tet].j(s)
                out[(tet, s)] = BNumber(derived[tet].X(s), math.sqrt(abs(j)), star)
        return out
    # star = 0: propagate delta over the whole triangulation
    kappas = complete_gluings(ps, tri)
    seed = (0, ALL_EDGE_FACES[0])
    delta = {seed: scale}
    frontier = [seed]
    while frontier:
        tet, s = frontier.pop()
        v = delta[(tet, s)]
        tp = ps.tets[tet]
        steps = [((tet, succ(s)), v * tp.e(succ(s))),
                 ((tet, pred(s)), v / tp.e(s)),
                 ((tet, conj(s)), v),
                 ((tet, opp(s)), v)]
        tet2, tau = tri.glued(tet, s)
        steps.append(((tet2, tau), v / kappas[tet][s]))
        for key, val in steps:
            if key in delta:
                if abs(delta[key] - val) > tol * max(delta[key], val):
                    raise ParamError(
                        f"inconsistent half-pipe delta propagation at {key[0]}:{key[1]}")
            else:
                delta[key] = val
                frontier.append(key)
    for tet in range(tri.num_tetrahedra):
        for s in ALL_EDGE_FACES:
            out[(tet, s)] = BNumber(derived[tet].X(s), delta[(tet, s)], 0)
    return out


def hyperbolic_quadric_form(tp: TetParams, sigma: EdgeFace) -> np.ndarray:
    """The symmetric bilinear form whose null quadric is the hyperbolic-model
    boundary inscribed in the sigma-standard position of this tetrahedron.
    Requires j_sigma > 0 (hyperbolic shape)."""
    j = tp.derive().j(sigma)
    if j <= 0:
        raise ParamError(f"quadric requires j > 0 at {sigma}, got {j}")
    return np.array([
        [0.0, -1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 2.0, 0.0],
        [0.0, 0.0, 0.0, 2.0 * j],
    ])
