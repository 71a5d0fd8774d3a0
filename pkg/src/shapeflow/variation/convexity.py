"""Convexity of the first eigenvalue along interpolation paths.

Two paths are covered: pointwise interpolation of radial functions (with a
quadratic defect measured in ``W^{1,2}`` of the circle) and Minkowski
combinations of convex bodies (support functions add).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..eigen.solver import BoundaryCondition, solve
from ..errors import InvalidInput, InvalidSigma
from ..flow.config import mesh_slack
from ..geometry.metrics import sobolev_sq
from ..geometry.shapes import (
    ConvexBody,
    RadialDomain,
    minkowski_combine,
    radial_interpolate,
)
from ..meshing import polygon_mesh, template_for

__all__ = [
    "BrunnMinkowskiReport",
    "ConvexityReport",
    "alpha_convexity_check",
    "brunn_minkowski_check",
    "chord_margins",
    "general_sigma_check",
    "sigma_margins",
]

PASS, FAIL, REPORT = "PASS", "FAIL", "REPORT"


def _uniform_grid(t):
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or t.size < 3:
        raise InvalidInput("need at least three t points")
    if t[0] != 0.0 or t[-1] != 1.0:
        raise InvalidInput("t grid must start at 0 and end at 1")
    dt = np.diff(t)
    if np.any(dt <= 0.0) or np.ptp(dt) > 1e-12:
        raise InvalidInput("t grid must be uniform and strictly increasing")
    return t


def _grid(points):
    if np.isscalar(points):
        return np.linspace(0.0, 1.0, int(points))
    return _uniform_grid(points)


def chord_margins(t, values, alpha, d2):
    """``(1-t) h(0) + t h(1) - alpha/2 t(1-t) d2 - h(t)``; nonnegative where the inequality holds."""
    t = np.asarray(t, dtype=float)
    h = np.asarray(values, dtype=float)
    chord = (1.0 - t) * h[0] + t * h[-1]
    return chord - 0.5 * alpha * t * (1.0 - t) * d2 - h


@dataclass
class ConvexityReport:
    t_grid: np.ndarray
    values: np.ndarray
    second_differences: np.ndarray
    d2: float
    alpha_estimate: float
    alpha_used: float
    margins: np.ndarray
    verify_grid: np.ndarray
    verify_values: np.ndarray
    verify_margins: np.ndarray
    slack: float
    mesh_h: float

    @property
    def verdict(self):
        ok = np.min(self.margins) >= -1e-12 * np.max(np.abs(self.values))
        ok = ok and (self.verify_margins.size == 0 or np.min(self.verify_margins) >= -self.slack)
        return PASS if ok else FAIL

    def rows(self):
        chord = (1.0 - self.t_grid) * self.values[0] + self.t_grid * self.values[-1]
        return [
            dict(t=float(t), h=float(h), chord=float(c), margin=float(m))
            for t, h, c, m in zip(self.t_grid, self.values, chord, self.margins)
        ]


def _path_eigenvalues(eta0, eta1, bc, t, template):
    return np.array([solve(template.map(radial_interpolate(eta0, eta1, float(s))), bc).lambda1 for s in t])


def alpha_convexity_check(
    eta0: RadialDomain,
    eta1: RadialDomain,
    bc: BoundaryCondition,
    t_points=11,
    verify_points=21,
    alpha=None,
    target_h=0.04,
) -> ConvexityReport:
    """Estimate ``alpha`` for ``h(t) = lambda(Omega((1-t) eta0 + t eta1))``.

    ``alpha_estimate`` is the smallest interior second difference of ``h``
    divided by ``||eta1 - eta0||^2_{W^{1,2}}``.  The chord inequality is then
    checked with ``alpha`` (default: the estimate) on the grid, where it holds
    by construction, and on ``verify_points`` with mesh slack.  All meshes
    share one template so ``h`` is smooth in ``t``.
    """
    if not isinstance(eta0, RadialDomain) or not isinstance(eta1, RadialDomain):
        raise InvalidInput("alpha convexity is defined on radial domains")
    t = _grid(t_points)
    tv = _grid(verify_points) if verify_points else np.empty(0)
    hull = RadialDomain.from_samples(np.maximum(eta0.samples, eta1.samples))
    template = template_for(hull, target_h)
    mesh_h = template.map(hull).h_max
    vals = _path_eigenvalues(eta0, eta1, bc, t, template)
    dt = t[1] - t[0]
    sd = (vals[2:] - 2.0 * vals[1:-1] + vals[:-2]) / dt**2
    d2 = sobolev_sq(np.asarray(eta1.samples) - np.asarray(eta0.samples))
    est = float(np.min(sd) / d2) if d2 > 0.0 else 0.0
    a = est if alpha is None else float(alpha)
    margins = chord_margins(t, vals, a, d2)
    if tv.size:
        vv = _path_eigenvalues(eta0, eta1, bc, tv, template)
        vm = chord_margins(tv, vv, a, d2)
    else:
        vv = vm = np.empty(0)
    slack = mesh_slack(mesh_h) * float(np.max(np.abs(vals)))
    return ConvexityReport(t, vals, sd, d2, est, a, margins, tv, vv, vm, slack, mesh_h)


def sigma_margins(F_values, sigma, t=None):
    """Margins of the power form and of the linear form it implies.

    Power form: ``F(t)^(1/sigma) >= (1-t) F(0)^(1/sigma) + t F(1)^(1/sigma)``.
    For ``sigma < 0`` it implies ``F(t) <= (1-t) F(0) + t F(1)``; for
    ``0 < sigma <= 1`` it implies ``F(t) >= ...``.  For ``sigma > 1`` no
    linear form follows and the returned linear margins are ``None``.
    """
    if sigma == 0:
        raise InvalidSigma("sigma must be nonzero")
    f = np.asarray(F_values, dtype=float)
    if np.any(f <= 0.0):
        raise InvalidInput("F values must be positive")
    t = np.linspace(0.0, 1.0, f.size) if t is None else np.asarray(t, dtype=float)
    g = f ** (1.0 / sigma)
    power = g - ((1.0 - t) * g[0] + t * g[-1])
    lin = (1.0 - t) * f[0] + t * f[-1] - f
    if sigma < 0:
        return power, lin
    if sigma <= 1:
        return power, -lin
    return power, None


def general_sigma_check(F_values, sigma, t=None, tol=1e-12) -> bool:
    """True when the power form holds (within ``tol``) and so does the linear form it implies.

    ``tol`` is relative to the largest value of each form; the default only
    absorbs round-off, so equality cases pass.
    """
    power, lin = sigma_margins(F_values, sigma, t)
    scale = float(np.max(np.abs(F_values)))
    ok = bool(np.min(power) >= -tol * scale ** (1.0 / sigma))
    if lin is not None:
        ok = ok and bool(np.min(lin) >= -tol * scale)
    return ok


@dataclass
class BrunnMinkowskiReport:
    t: np.ndarray
    values: np.ndarray
    strong_margins: np.ndarray
    weak_margins: np.ndarray
    strong_slack: float
    weak_slack: float
    mesh_h: float
    bc: BoundaryCondition
    extra: dict = field(default_factory=dict)

    @property
    def verdict(self):
        if not self.bc.is_dirichlet:
            return REPORT  # Robin is an open question; margins are data only
        ok = np.min(self.strong_margins) >= -self.strong_slack and np.min(self.weak_margins) >= -self.weak_slack
        return PASS if ok else FAIL

    def rows(self):
        return [
            dict(t=float(t), lam=float(v), strong_margin=float(s), weak_margin=float(w))
            for t, v, s, w in zip(self.t, self.values, self.strong_margins, self.weak_margins)
        ]


def brunn_minkowski_check(
    k0: ConvexBody,
    k1: ConvexBody,
    t_points=11,
    bc: BoundaryCondition | None = None,
    target_h=0.04,
    center=True,
) -> BrunnMinkowskiReport:
    """Strong (``lambda^(-1/2)`` concave) and weak (``lambda`` below the chord) forms along ``(1-t) K0 + t K1``.

    Bodies are centred first, which leaves the eigenvalues unchanged.  The
    tolerance is the mesh slack relative to the largest value of each form.
    """
    bc = BoundaryCondition.dirichlet() if bc is None else bc
    t = np.linspace(0.0, 1.0, int(t_points)) if np.isscalar(t_points) else np.asarray(t_points, dtype=float)
    if t[0] != 0.0 or t[-1] != 1.0:
        raise InvalidInput("t points must include 0 and 1")
    if center:
        k0, k1 = k0.centered(), k1.centered()
    vals = []
    mesh_h = 0.0
    for s in t:
        mesh = polygon_mesh(minkowski_combine(k0, k1, float(s)), target_h)
        mesh_h = max(mesh_h, mesh.h_max)
        vals.append(solve(mesh, bc).lambda1)
    vals = np.array(vals)
    strong, weak = sigma_margins(vals, -2.0, t)
    rel = mesh_slack(mesh_h)
    return BrunnMinkowskiReport(
        t,
        vals,
        strong,
        weak,
        rel * float(np.max(vals ** -0.5)),
        rel * float(np.max(vals)),
        mesh_h,
        bc,
    )
