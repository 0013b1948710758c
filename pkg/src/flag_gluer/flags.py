"""Numeric projective linear algebra on incomplete flags.

A flag is a point of RP^3 together with a plane through it; a tetrahedron of
flags is a nondegenerate quadruple whose ratios are all positive and which is
projectively equivalent to the standard representative of its ratio vector.
This module is the geometric oracle for the symbolic layer in ``params``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .edgeface import EdgeFace, conj, pred, succ
from .params import ALL_EDGE_FACES, EDGE_KEYS, ParamError, TetParams

__all__ = [
    "Flag", "TetOfFlags", "DegenerateFlags", "REL_TOL", "ABS_FLOOR", "DEGEN_TOL",
    "normal_form", "proj_distance", "is_scalar_identity",
    "cross_ratio", "triple_ratio", "edge_ratio", "gluing_parameter",
    "standard_representative", "is_tet_of_flags", "random_tet_of_flags",
    "random_tet_params",
]

REL_TOL = 1e-9       # default relative tolerance for identities
ABS_FLOOR = 1e-12    # absolute floor under the relative tolerance
DEGEN_TOL = 1e-12    # a pairing below DEGEN_TOL * |eta| * |V| counts as zero


class DegenerateFlags(ValueError):
    """Flags too degenerate for the requested ratio or construction."""


def normal_form(m: np.ndarray) -> np.ndarray:
    """Projective normal form: unit Frobenius norm, sign fixed so the first
    entry of largest magnitude is positive.  Works for vectors and matrices."""
    m = np.asarray(m, dtype=float)
    n = np.linalg.norm(m)
    if n == 0.0:
        raise ValueError("zero has no projective normal form")
    m = m / n
    flat = np.abs(m).ravel()
    lead = m.ravel()[int(np.argmax(flat))]
    return m if lead > 0 else -m


def proj_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius distance between projective normal forms."""
    return float(np.linalg.norm(normal_form(a) - normal_form(b)))


def is_scalar_identity(m: np.ndarray, tol: float = REL_TOL) -> bool:
    return proj_distance(m, np.eye(4)) < tol


@dataclass(frozen=True)
class Flag:
    """A point of RP^3 with an incident plane, both homogeneous."""
    point: np.ndarray
    plane: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.point, dtype=float).reshape(4)
        q = np.asarray(self.plane, dtype=float).reshape(4)
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "plane", q)
        np_, nq = np.linalg.norm(p), np.linalg.norm(q)
        if np_ == 0.0 or nq == 0.0:
            raise DegenerateFlags("flag with zero point or plane")
        if abs(float(q @ p)) > REL_TOL * np_ * nq:
            raise DegenerateFlags(f"point and plane are not incident: <eta,V> = {q @ p}")

    def transform(self, g: np.ndarray) -> "Flag":
        return Flag(g @ self.point, self.plane @ np.linalg.inv(g))

    def projectively_equal(self, other: "Flag", tol: float = REL_TOL) -> bool:
        return (proj_distance(self.point, other.point) < tol
                and proj_distance(self.plane, other.plane) < tol)


class TetOfFlags:
    """An ordered quadruple of flags; indexing is 1-based like the vertices."""

    def __init__(self, flags: Sequence[Flag]):
        if len(flags) != 4:
            raise ValueError("need exactly 4 flags")
        self.flags = tuple(flags)

    def __getitem__(self, vertex: int) -> Flag:
        return self.flags[vertex - 1]

    def pairing(self, i: int, j: int) -> float:
        """<eta_i, V_j>."""
        return float(self.flags[i - 1].plane @ self.flags[j - 1].point)

    def points(self) -> np.ndarray:
        return np.stack([f.point for f in self.flags])

    def transform(self, g: np.ndarray) -> "TetOfFlags":
        ginv = np.linalg.inv(g)
        return TetOfFlags([Flag(g @ f.point, f.plane @ ginv) for f in self.flags])

    def check_nondegenerate(self):
        for i in range(1, 5):
            for j in range(1, 5):
                if i == j:
                    continue
                scale = (np.linalg.norm(self.flags[i - 1].plane)
                         * np.linalg.norm(self.flags[j - 1].point))
                if abs(self.pairing(i, j)) < DEGEN_TOL * scale:
                    raise DegenerateFlags(f"degenerate pairing <eta_{i}, V_{j}> ~ 0")

    def projectively_equal(self, other: "TetOfFlags", tol: float = REL_TOL) -> bool:
        return all(a.projectively_equal(b, tol) for a, b in zip(self.flags, other.flags))


# -- ratios ------------------------------------------------------------------


def _hom2(x) -> tuple[float, float]:
    if isinstance(x, (int, float)):
        return (1.0, 0.0) if math.isinf(x) else (float(x), 1.0)
    raise TypeError(f"expected an extended real, got {type(x)}")


def cross_ratio(x1, x2, x3, x4, tol: float = REL_TOL) -> float:
    """Cross ratio (x1-x3)(x2-x4) / ((x1-x4)(x2-x3)) of four extended reals or
    four collinear homogeneous points."""
    if all(isinstance(x, (int, float)) for x in (x1, x2, x3, x4)):
        coords = [_hom2(x) for x in (x1, x2, x3, x4)]
    else:
        pts = np.stack([np.asarray(x, dtype=float) for x in (x1, x2, x3, x4)])
        pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
        u, s, vt = np.linalg.svd(pts)
        if s.size > 2 and s[2] > 1e-8 * s[0]:
            raise ValueError("cross ratio of non-collinear points")
        basis = vt[:2]
        coords = [tuple(basis @ p) for p in pts]

    def det(a, b):
        return coords[a][0] * coords[b][1] - coords[b][0] * coords[a][1]

    num = det(0, 2) * det(1, 3)
    den = det(0, 3) * det(1, 2)
    if abs(den) < ABS_FLOOR * max(1.0, abs(num)):
        raise ValueError("cross ratio undefined: repeated points")
    return num / den


def triple_ratio(flags: Sequence[Flag]) -> float:
    """Triple ratio of a cyclically ordered nondegenerate triple of flags."""
    if len(flags) != 3:
        raise ValueError("need exactly 3 flags")
    eta = [f.plane for f in flags]
    v = [f.point for f in flags]
    num = (eta[0] @ v[1]) * (eta[1] @ v[2]) * (eta[2] @ v[0])
    den = (eta[0] @ v[2]) * (eta[1] @ v[0]) * (eta[2] @ v[1])
    scale = np.prod([np.linalg.norm(e) for e in eta]) * np.prod([np.linalg.norm(p) for p in v])
    if min(abs(num), abs(den)) < DEGEN_TOL * scale:
        raise DegenerateFlags("triple ratio of a degenerate triple")
    return float(num / den)


def edge_ratio(tet: TetOfFlags, sigma: EdgeFace) -> float:
    """Edge ratio eta_i(V_k) eta_j(V_l) / (eta_i(V_l) eta_j(V_k))."""
    i, j, k, l = sigma.perm
    num = tet.pairing(i, k) * tet.pairing(j, l)
    den = tet.pairing(i, l) * tet.pairing(j, k)
    if den == 0.0:
        raise DegenerateFlags(f"edge ratio degenerate at {sigma}")
    return num / den


def triple_ratio_at(tet: TetOfFlags, sigma: EdgeFace) -> float:
    i, j, k, _ = sigma.perm
    return triple_ratio([tet[i], tet[j], tet[k]])


def plane_through(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Homogeneous covector of the plane spanned by three points."""
    _, s, vt = np.linalg.svd(np.stack([a, b, c]))
    if s[2] < 1e-10 * s[0]:
        raise DegenerateFlags("points do not span a plane")
    return vt[-1]


def gluing_parameter(f: TetOfFlags, e: TetOfFlags, sigma: EdgeFace, tau: EdgeFace,
                     tol: float = 1e-7) -> float:
    """Gluing parameter of the pair (f, e) glued along (sigma, tau)."""
    i, j, k, l = sigma.perm
    ip, jp, kp, lp = tau.perm
    for a, b in ((i, jp), (j, ip), (k, kp)):
        if not f[a].projectively_equal(e[b], tol):
            raise ValueError(f"flags are not glued along ({sigma}, {tau}): "
                             f"flag {a} of the first != flag {b} of the second")
    eta_face = plane_through(f[i].point, f[j].point, f[k].point)
    w = e[lp].point
    num = f.pairing(i, l) * f.pairing(j, k) * float(eta_face @ w)
    den = f.pairing(i, k) * float(f[j].plane @ w) * float(eta_face @ f[l].point)
    if den == 0.0:
        raise DegenerateFlags("gluing parameter degenerate")
    return -num / den


# -- standard position -------------------------------------------------------

_E = np.eye(4)


def standard_representative(tp: TetParams, sigma: EdgeFace) -> TetOfFlags:
    """The unique sigma-standard tetrahedron of flags with the given ratios."""
    d = tp.derive()
    i, j, k, l = sigma.perm
    sb = conj(sigma)
    t = d.t(sigma)
    flags = [None] * 4
    flags[i - 1] = Flag(_E[0], _E[1])
    flags[j - 1] = Flag(_E[1], _E[0])
    flags[k - 1] = Flag(np.array([1.0, 1.0, 1.0, 0.0]),
                        np.array([t, 1.0, -(t + 1.0), 0.0]))
    x = d.X(sigma)
    flags[l - 1] = Flag(
        np.array([tp.e(sigma), 1.0, x, -1.0]),
        np.array([tp.e(pred(sb)) * tp.e(succ(sb)), 1.0, -d.mu(sb), d.mu_Y(sb) - d.mu(sb) * x]),
    )
    return TetOfFlags(flags)


def extract_params(tet: TetOfFlags) -> TetParams:
    """Edge ratios of a quadruple of flags as a TetParams (must be positive)."""
    ratios = {}
    for key in EDGE_KEYS:
        s = next(s for s in ALL_EDGE_FACES if s.edge_key == key)
        v = edge_ratio(tet, s)
        if not (v > 0):
            raise ParamError(f"nonpositive edge ratio {v} at {s}")
        ratios[key] = v
    return TetParams.from_edge_dict(ratios)


@dataclass(frozen=True)
class TetCheck:
    ok: bool
    reason: str = ""

    def __bool__(self):
        return self.ok


def is_tet_of_flags(flags: Sequence[Flag], tol: float = 1e-7) -> TetCheck:
    """Decide whether four flags form a tetrahedron of flags.

    Uses the constructive normalization: renormalize to (12)3-standard position
    and compare with the standard representative built from the extracted
    ratios.  Returns a falsy TetCheck with a reason instead of raising.
    """
    if len(flags) != 4:
        return TetCheck(False, "need exactly 4 flags")
    tet = TetOfFlags(flags)
    try:
        tet.check_nondegenerate()
    except DegenerateFlags as exc:
        return TetCheck(False, f"degenerate: {exc}")
    pts = tet.points()
    scale = np.prod(np.linalg.norm(pts, axis=1))
    if abs(np.linalg.det(pts)) < 1e-10 * scale:
        return TetCheck(False, "points not in general position")
    try:
        tp = extract_params(tet)
    except ParamError:
        return TetCheck(False, "nonpositive edge ratio")
    for s in ALL_EDGE_FACES:
        if triple_ratio_at(tet, s) <= 0:
            return TetCheck(False, f"nonpositive triple ratio at {s}")
    try:
        norm = _normalize_to_standard(tet)
    except DegenerateFlags as exc:
        return TetCheck(False, f"standardization failed: {exc}")
    ref = standard_representative(tp, _SIGMA0)
    if not norm.projectively_equal(ref, tol):
        return TetCheck(False, "not projectively equivalent to the standard representative")
    return TetCheck(True)


_SIGMA0 = ALL_EDGE_FACES[0]   # (12)3


def _normalize_to_standard(tet: TetOfFlags) -> TetOfFlags:
    """Apply the unique projective map taking the quadruple to (12)3-standard
    position: V1 -> e1, V2 -> e2, V3 -> e1+e2+e3, eta1^eta2^eta3 -> e4, and the
    point (eta1^eta2) ^ (V1V2V3) -> e3; then rescale the last coordinate."""
    v1, v2, v3, v4 = (f.point for f in tet.flags)
    eta = [f.plane for f in tet.flags]
    # Q = intersection of the three planes
    _, s, vt = np.linalg.svd(np.stack(eta[:3]))
    if s[2] > 1e-9 * s[0]:
        q = vt[-1]
    else:
        raise DegenerateFlags("planes eta1, eta2, eta3 do not meet in a point")
    # P = (eta1 ^ eta2) intersected with the plane V1V2V3
    _, s2, vt2 = np.linalg.svd(np.stack(eta[:2]))
    u, w = vt2[2], vt2[3]
    nu = plane_through(v1, v2, v3)
    p = (nu @ w) * u - (nu @ u) * w
    if np.linalg.norm(p) < 1e-12:
        raise DegenerateFlags("eta1^eta2 lies in the plane V1V2V3")

    m = np.stack([v1, v2, v3, q], axis=1)
    if abs(np.linalg.det(m)) < 1e-12 * np.prod(np.linalg.norm(m, axis=0)):
        raise DegenerateFlags("V1, V2, V3, eta1^eta2^eta3 not in general position")
    targets = np.stack([_E[0], _E[1], np.array([1.0, 1.0, 1.0, 0.0]), _E[3]], axis=1)
    # p lies in the plane V1V2V3, so it has no q-component; its target e3 has
    # coefficients (-1, -1, 1, 0) in the target frame.  The q-column scale is
    # the residual diag(1,1,1,s) freedom, fixed by the rescaling step below.
    c = np.linalg.solve(m, p)
    if np.min(np.abs(c[:3])) < 1e-12 * np.max(np.abs(c)):
        raise DegenerateFlags("fifth reference point not in general position")
    lam = np.array([-1.0 / c[0], -1.0 / c[1], 1.0 / c[2], 1.0])
    g = targets @ np.diag(lam) @ np.linalg.inv(m)
    out = tet.transform(g)
    vl = out.flags[3].point
    if abs(vl[1]) < 1e-12 * np.linalg.norm(vl):
        raise DegenerateFlags("cannot normalize the fourth vertex")
    vl = vl / vl[1]
    if abs(vl[3]) < 1e-12:
        raise DegenerateFlags("fourth vertex lies in the plane of the first three")
    s4 = np.diag([1.0, 1.0, 1.0, -1.0 / vl[3]])
    return out.transform(s4)


# -- randomized generation ---------------------------------------------------


def random_tet_params(rng: np.random.Generator, low: float = 0.1, high: float = 10.0,
                      consistent: bool = True) -> TetParams:
    """Log-uniform edge ratios; with ``consistent`` the sixth is forced so the
    six-fold product is 1 (a point of the single-tet deformation space)."""
    logs = rng.uniform(math.log(low), math.log(high), size=6)
    if consistent:
        logs[5] = -logs[:5].sum()
    return TetParams(tuple(float(v) for v in np.exp(logs)))


def random_projective_map(rng: np.random.Generator, max_cond: float = 1e3) -> np.ndarray:
    while True:
        g = rng.normal(size=(4, 4))
        if np.linalg.cond(g) < max_cond:
            return g


def random_tet_of_flags(rng: np.random.Generator) -> tuple[TetOfFlags, TetParams]:
    """A random tetrahedron of flags: standard representative of random
    consistent parameters, moved by a random projective map."""
    tp = random_tet_params(rng)
    tet = standard_representative(tp, _SIGMA0).transform(random_projective_map(rng))
    return tet, tp
