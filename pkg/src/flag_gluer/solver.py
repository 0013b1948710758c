"""Residual system in log coordinates and a damped least-squares solver.

Variables are the per-tet log edge ratios and one log gluing parameter per
face class, so positivity is automatic and no barrier terms are needed.  The
system is generically rank-deficient along deformation curves; Levenberg
damping absorbs that and the local rank is reported.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .monodromy import edge_matrices
from .params import (CANONICAL_EF, EDGE_KEYS, ParamError, ParamSet, TetParams,
                     face_residual, internal_residual)
from .triangulation import Triangulation

__all__ = [
    "ResidualSystem", "SolveOptions", "SolveResult", "TraceResult",
    "assemble", "solve", "trace", "SolveError",
]


class SolveError(RuntimeError):
    """Unrecoverable solver failure (contradictory pins, breakdown)."""


@dataclass(frozen=True)
class SolveOptions:
    tol: float = 1e-11
    max_iter: int = 200
    lambda0: float = 1e-3
    diverge_norm: float = 1e6
    fd_step: float = 1e-7
    seed: int | None = None
    restarts: int = 8


@dataclass(frozen=True)
class SolveResult:
    params: ParamSet
    residual_norm: float
    iterations: int
    jacobian_rank: int
    status: str    # "converged" | "stalled" | "diverged"

    @property
    def converged(self) -> bool:
        return self.status == "converged"


@dataclass(frozen=True)
class TraceResult:
    steps: tuple[tuple[float, SolveResult], ...]
    completed: bool
    message: str = ""


class ResidualSystem:
    """All scalar residuals of a triangulation as one vector over log variables."""

    def __init__(self, tri: Triangulation, pins: Mapping[str, float] | None = None):
        self.tri = tri
        self.var_names: list[str] = []
        for tet in range(tri.num_tetrahedra):
            for key in EDGE_KEYS:
                self.var_names.append(f"{tet}:{CANONICAL_EF[key]}")
        for fc in tri.face_classes():
            self.var_names.append(fc.key())
        self._index = {name: n for n, name in enumerate(self.var_names)}
        self.pinned: dict[int, float] = {}
        for name, value in (pins or {}).items():
            if name not in self._index:
                raise SolveError(f"unknown pin {name!r}; variables are {self.var_names}")
            if not (value > 0):
                raise SolveError(f"pin {name!r} must be positive, got {value}")
            idx = self._index[name]
            logv = math.log(value)
            if idx in self.pinned and abs(self.pinned[idx] - logv) > 1e-14:
                raise SolveError(f"contradictory pins for {name!r}")
            self.pinned[idx] = logv
        self.free = [n for n in range(len(self.var_names)) if n not in self.pinned]
        self.residual_names: list[str] = []
        for tet in range(tri.num_tetrahedra):
            self.residual_names.append(f"internal:{tet}")
        for fc in tri.face_classes():
            self.residual_names.append(f"face:{fc.key()}")
        for cyc in tri.edge_cycles():
            if cyc.order == 1:
                tags = ("g11", "g33", "g44", "g34", "g43")
            else:
                tags = ("g11", "trace", "det")
            self.residual_names.extend(f"edge:{cyc.edge_id}:{t}" for t in tags)

    @property
    def num_variables(self) -> int:
        return len(self.var_names)

    @property
    def num_free(self) -> int:
        return len(self.free)

    # -- vector <-> ParamSet ------------------------------------------------

    def to_vector(self, ps: ParamSet) -> np.ndarray:
        ps.check_shape(self.tri)
        vals = []
        for tp in ps.tets:
            vals.extend(math.log(v) for v in tp.edge_ratios)
        vals.extend(math.log(g) for g in ps.gluings)
        return np.array(vals)

    def to_params(self, x: np.ndarray) -> ParamSet:
        n = self.tri.num_tetrahedra
        tets = tuple(TetParams(tuple(np.exp(x[6 * t:6 * t + 6]))) for t in range(n))
        gluings = tuple(np.exp(x[6 * n:]))
        return ParamSet(tets, gluings)

    def clamp(self, x: np.ndarray) -> np.ndarray:
        x = x.copy()
        for idx, logv in self.pinned.items():
            x[idx] = logv
        return x

    # -- residuals ------------------------------------------------------------

    def residual(self, x: np.ndarray) -> np.ndarray:
        ps = self.to_params(x)
        out = [internal_residual(tp) for tp in ps.tets]
        for fc in self.tri.face_classes():
            out.append(face_residual(ps, self.tri, fc.face_id))
        out = np.array(out)
        edge = np.concatenate([r.residuals for r in edge_matrices(self.tri, ps)])
        return np.concatenate([out, edge])

    def jacobian(self, x: np.ndarray, step: float = 1e-7, central: bool = False) -> np.ndarray:
        """Finite-difference Jacobian over the free variables."""
        r0 = None if central else self.residual(x)
        cols = []
        for idx in self.free:
            xp = x.copy()
            xp[idx] += step
            rp = self.residual(xp)
            if central:
                xm = x.copy()
                xm[idx] -= step
                cols.append((rp - self.residual(xm)) / (2 * step))
            else:
                cols.append((rp - r0) / step)
        return np.stack(cols, axis=1)


def assemble(tri: Triangulation, pins: Mapping[str, float] | None = None) -> ResidualSystem:
    return ResidualSystem(tri, pins)


def _lm_minimize(system: ResidualSystem, x0: np.ndarray, opts: SolveOptions):
    x = system.clamp(x0)
    r = system.residual(x)
    lam = opts.lambda0
    jac = None
    iterations = 0
    while iterations < opts.max_iter:
        norm = np.linalg.norm(r)
        if norm < opts.tol or norm > opts.diverge_norm:
            break
        if jac is None:
            jac = system.jacobian(x, opts.fd_step)
        iterations += 1
        h = jac.T @ jac
        g = jac.T @ r
        try:
            dx_free = np.linalg.solve(h + lam * np.eye(h.shape[0]), -g)
        except np.linalg.LinAlgError:
            dx_free = np.linalg.lstsq(h + lam * np.eye(h.shape[0]), -g, rcond=None)[0]
        xn = x.copy()
        for m, idx in enumerate(system.free):
            xn[idx] += dx_free[m]
        rn = system.residual(xn)
        if np.linalg.norm(rn) < norm:
            x, r = xn, rn
            lam = max(lam * 0.3, 1e-14)
            jac = None
        else:
            lam *= 3.0
    return x, r, iterations


def _fit_null_correction(system: ResidualSystem, x: np.ndarray, null: np.ndarray,
                         range_basis: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """Correction along near-null directions of the Jacobian.

    At a degenerate isolated zero the residual is quadratic along the null
    slice, so pointwise descent stalls at sqrt(eval floor).  Sampling the
    residual on a stencil of width h and minimizing the fitted quadratic
    model locates the vertex to (floor / h) accuracy instead.  Only the
    projection orthogonal to the Jacobian's column range is minimized: the
    range part is cancelled afterwards by an ordinary Newton step, and
    keeping it here would bias the vertex by sqrt(range residual).
    """
    import itertools

    k = null.shape[0]
    offsets = np.array(list(itertools.product((-h, 0.0, h), repeat=k)))
    monos = [lambda c: 1.0]
    monos += [(lambda a: lambda c: c[a])(a) for a in range(k)]
    monos += [(lambda a, b: lambda c: c[a] * c[b])(a, b)
              for a in range(k) for b in range(a, k)]
    design = np.array([[m(c) for m in monos] for c in offsets])
    samples = []
    for c in offsets:
        xs = x.copy()
        for idx_pos, idx in enumerate(system.free):
            xs[idx] += float(c @ null[:, idx_pos])
        samples.append(system.residual(xs))
    samples = np.stack(samples)
    samples = samples - (samples @ range_basis) @ range_basis.T
    coef, *_ = np.linalg.lstsq(design, samples, rcond=None)

    def model(c):
        row = np.array([m(c) for m in monos])
        return row @ coef

    def model_jac(c):
        rows = []
        for a in range(k):
            eps = 1e-6 * h
            ca, cb = c.copy(), c.copy()
            ca[a] += eps
            cb[a] -= eps
            rows.append((model(ca) - model(cb)) / (2 * eps))
        return np.stack(rows, axis=1)

    c = np.zeros(k)
    for _ in range(40):
        mv = model(c)
        J = model_jac(c)
        try:
            step = np.linalg.lstsq(J, -mv, rcond=1e-8)[0]
        except np.linalg.LinAlgError:
            break
        c = c + step
        if np.linalg.norm(c) > 2 * h:      # outside the model's trust region
            c = c / np.linalg.norm(c) * 2 * h
            break
        if np.linalg.norm(step) < 1e-15:
            break
    return c @ null


def _polish(system: ResidualSystem, x: np.ndarray, opts: SolveOptions,
            stencils: tuple[float, ...] = (1e-3, 1e-4, 1e-5), theta: float = 1e-5):
    """Newton polish with separate treatment of degenerate directions.

    Shrinking the stencil over the rounds trades the cubic contamination of
    the quadratic model (~h^2) against sampling noise (~floor/h)."""
    extra_iters = 0
    for h in stencils:
        r = system.residual(x)
        if np.linalg.norm(r) < 2e-14:
            break
        jac = system.jacobian(x, 1e-6, central=True)
        u, s, vt = np.linalg.svd(jac, full_matrices=False)
        keep = s > theta * s[0]
        k = int((~keep).sum())
        dx_free = -vt[keep].T @ ((u[:, keep].T @ r) / s[keep])
        if 1 <= k <= 3:
            dx_free = dx_free + _fit_null_correction(system, x, vt[~keep], u[:, keep], h)
        xn = x.copy()
        for pos, idx in enumerate(system.free):
            xn[idx] += dx_free[pos]
        extra_iters += 1
        # the residual norm is noise-dominated at a degenerate zero, so only
        # reject steps that clearly leave the solution
        if np.linalg.norm(system.residual(xn)) <= max(np.linalg.norm(r), 2 * opts.tol):
            x = xn
    return x, extra_iters


def solve(system: ResidualSystem, init: ParamSet | None = None,
          opts: SolveOptions = SolveOptions()) -> SolveResult:
    """Levenberg-Marquardt minimization of the squared residual norm."""
    if init is None:
        init = ParamSet.ones(system.tri)
    attempts = [system.to_vector(init)]
    if opts.seed is not None:
        rng = np.random.default_rng(opts.seed)
        span = math.log(4.0)
        for _ in range(opts.restarts):
            attempts.append(rng.uniform(-span, span, size=system.num_variables))
    best = None
    total_iter = 0
    for x0 in attempts:
        x, r, it = _lm_minimize(system, x0, opts)
        total_iter += it
        norm = float(np.linalg.norm(r))
        if best is None or norm < best[1]:
            best = (x, norm)
        if norm < opts.tol:
            break
    x, norm = best
    if norm < opts.tol and system.free:
        x, extra = _polish(system, x, opts)
        total_iter += extra
        norm = float(np.linalg.norm(system.residual(x)))
    if norm < opts.tol:
        status = "converged"
    elif norm > opts.diverge_norm:
        status = "diverged"
    else:
        status = "stalled"
    rank = int(np.linalg.matrix_rank(system.jacobian(x, opts.fd_step))) if system.free else 0
    return SolveResult(system.to_params(x), norm, total_iter, rank, status)


def trace(tri: Triangulation, init: ParamSet | None, pin_name: str,
          start: float, stop: float, steps: int,
          base_pins: Mapping[str, float] | None = None,
          opts: SolveOptions = SolveOptions(),
          max_bisections: int = 8) -> TraceResult:
    """Natural-parameter continuation of the pinned variable from start to stop.

    Each step warm-starts from the previous solution; a failing step is
    bisected up to ``max_bisections`` times before aborting with the partial
    results collected so far.
    """
    if steps < 1:
        raise SolveError("steps must be >= 1")
    targets = [start] if (steps == 1 or start == stop) else \
        list(np.linspace(start, stop, steps))
    base_pins = dict(base_pins or {})

    def solve_at(value: float, warm: ParamSet | None) -> SolveResult:
        system = assemble(tri, {**base_pins, pin_name: value})
        return solve(system, warm, opts)

    results: list[tuple[float, SolveResult]] = []
    current = solve_at(targets[0], init)
    if not current.converged:
        return TraceResult(tuple([(targets[0], current)]), False,
                           f"initial solve at {pin_name}={targets[0]} did not converge")
    results.append((targets[0], current))
    warm = current.params
    last_value = targets[0]
    for target in targets[1:]:
        res = solve_at(target, warm)
        if not res.converged:
            lo, hi = last_value, target
            depth = 0
            while depth < max_bisections and not res.converged:
                mid = 0.5 * (lo + hi)
                mid_res = solve_at(mid, warm)
                if mid_res.converged:
                    warm = mid_res.params
                    lo = mid
                else:
                    hi = mid
                    depth += 1
                    continue
                res = solve_at(target, warm)
                depth += 1
            if not res.converged:
                return TraceResult(tuple(results), False,
                                   f"continuation breakdown near {pin_name}={target}")
        results.append((target, res))
        warm = res.params
        last_value = target
    return TraceResult(tuple(results), True)
