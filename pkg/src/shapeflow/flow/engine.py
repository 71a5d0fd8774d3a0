"""Implicit Euler (minimizing movement) steps for eigenvalue functionals."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import LinearConstraint, minimize

from ..eigen.fem import assemble
from ..eigen.solver import solve, solve_matrices
from ..errors import DegenerateTriangle, InvalidInput, IterationDivergence
from ..geometry.admissibility import is_admissible
from ..geometry.metrics import distance
from ..geometry.shapes import area
from ..meshing import refine
from .config import GRADIENT_ASSISTED, FlowConfig
from .space import FACET_FLOOR, ConvexSpace, ShapeSpace, make_space

__all__ = ["FlowTrajectory", "StepResult", "euler_step", "phi", "run_flow", "shape_eigenvalue"]

logger = logging.getLogger(__name__)

# a candidate must beat phi(x) by this much to count as a move
DECREASE_MARGIN = 1e-12


def shape_eigenvalue(space: ShapeSpace, shape):
    """Eigenvalue of an arbitrary shape on the space's template; inf if inadmissible."""
    if not is_admissible(shape, space.admissibility):
        return np.inf
    try:
        mesh = space.shape_mesh(shape)
        lam, _, _, _ = solve_matrices(*assemble(mesh), space.bc, mesh.boundary_vertices)
    except (DegenerateTriangle, IterationDivergence):
        return np.inf
    return float(lam[0])


def phi(h, x, y, cfg: FlowConfig, space: ShapeSpace | None = None):
    """``lambda(y) + d(x, y)^2 / (2h)``; ``inf`` when ``y`` is not admissible.

    ``h = inf`` drops the distance term.
    """
    if type(x) is not type(y):
        raise InvalidInput("x and y must be shapes of the same kind")
    if space is None:
        space = make_space(x, cfg)
    lam = shape_eigenvalue(space, y)
    if not np.isfinite(lam):
        return np.inf
    if np.isinf(h):
        return lam
    return lam + distance(x, y, cfg.metric) ** 2 / (2.0 * h)


@dataclass
class StepResult:
    shape: object
    params: np.ndarray
    phi: float  # lambda at the new point
    big_phi: float  # lambda + d^2 / (2h) as logged
    distance: float
    n_evals: int
    stagnated: bool
    message: str = ""


class _Objective:
    """Phi on parameters, tracking the best admissible point seen."""

    def __init__(self, space, px, h, phi_x, x_shape, metric):
        self.space = space
        self.px = px
        self.h = h
        self.x_shape = x_shape
        self.metric = metric
        self.best_f = phi_x
        self.best_q = px
        self.n = 0
        self.barrier = abs(phi_x) * 10.0 + 1e3

    def __call__(self, p, need_grad=False):
        self.n += 1
        q, vjp = self.space.project(p)
        ev = self.space.evaluate(q, need_grad)
        if not ev.admissible:
            return (self.barrier, np.zeros_like(p)) if need_grad else np.inf
        d2, dg = self.space.dist_sq(self.px, q)
        if d2 is None:
            d2 = distance(self.x_shape, self.space.shape(q), self.metric) ** 2
        f = ev.lam + d2 / (2.0 * self.h)
        if f < self.best_f:
            self.best_f = f
            self.best_q = q.copy()
        if need_grad:
            return f, vjp(ev.grad + dg / (2.0 * self.h))
        return f


def _simplex(p0, seed, scale):
    rng = np.random.default_rng(seed)
    n = p0.size
    steps = scale * rng.choice([-1.0, 1.0], size=n)
    return np.vstack([p0, p0 + np.diag(steps)])


def _run_inner(obj: _Objective, px, cfg: FlowConfig):
    space = obj.space
    budget = cfg.max_inner_evals
    use_grad = cfg.inner_solver == GRADIENT_ASSISTED and space.differentiable_metric
    if not use_grad:
        scale = 0.02 * float(np.max(np.abs(px)))
        res = minimize(
            obj,
            px,
            method="Nelder-Mead",
            options=dict(
                maxfev=budget,
                xatol=1e-9 * scale,
                fatol=cfg.inner_tol,
                initial_simplex=_simplex(px, cfg.seed, scale),
            ),
        )
        return res.message
    fun = lambda p: obj(p, need_grad=True)
    if isinstance(space, ConvexSpace) and space.volume is None:
        adm = space.admissibility
        # facets stay open so no boundary edge of the polygon mesh collapses
        floor = FACET_FLOOR * float(np.mean(px))
        cons = [LinearConstraint(space.facet_matrix, floor, np.inf)]
        bounds = [(adm.r_min, adm.container)] * px.size
        res = minimize(
            fun, px, jac=True, method="SLSQP", bounds=bounds, constraints=cons,
            options=dict(maxiter=budget, ftol=cfg.inner_tol),
        )
    else:
        res = minimize(
            fun, px, jac=True, method="L-BFGS-B",
            options=dict(maxfun=budget, ftol=cfg.inner_tol, gtol=1e-9, maxls=30),
        )
    return str(res.message)


def _step(space: ShapeSpace, px, cfg: FlowConfig):
    x_shape = space.shape(px)
    ev_x = space.evaluate(px)
    if not ev_x.admissible:
        raise InvalidInput("Euler step started from an inadmissible shape")
    phi_x = ev_x.lam
    n0 = space.n_evals
    obj = _Objective(space, px, cfg.h, phi_x, x_shape, cfg.metric)
    message = _run_inner(obj, px, cfg)
    q = obj.best_q
    if q is not px:
        y = space.shape(q)
        lam_y = space.evaluate(q).lam
        d = distance(x_shape, y, cfg.metric)
        big = lam_y + d * d / (2.0 * cfg.h)
        if big <= phi_x - DECREASE_MARGIN:
            return StepResult(y, q, lam_y, big, d, space.n_evals - n0, False, message)
    return StepResult(x_shape, px, phi_x, phi_x, 0.0, space.n_evals - n0, True, message)


def euler_step(x, cfg: FlowConfig, space: ShapeSpace | None = None, return_info=False):
    """One minimizing-movement step from ``x``.

    The result never has a larger ``Phi`` than ``x`` itself; if no candidate
    beats ``phi(x)`` the step returns ``x`` and reports stagnation.
    """
    if space is None:
        space = make_space(x, cfg)
    px = _initial_params(space, x, cfg)
    out = _step(space, px, cfg)
    return out if return_info else out.shape


def _initial_params(space, u0, cfg):
    p = space.params(u0)
    if cfg.volume is not None:
        p = space.project(p)[0]
    if not space.evaluate(p).admissible:
        raise InvalidInput("initial shape is not admissible for this flow")
    return p


@dataclass
class FlowTrajectory:
    h: float
    metric: object
    shapes: list = field(default_factory=list)
    params: list = field(default_factory=list)
    phi_values: list = field(default_factory=list)
    big_phi_values: list = field(default_factory=list)
    step_distances: list = field(default_factory=list)
    inner_eval_counts: list = field(default_factory=list)
    wall_times: list = field(default_factory=list)
    stagnated: list = field(default_factory=list)
    mesh_h: float = float("nan")
    refined_lambda: float = float("nan")

    @property
    def n_steps(self):
        return len(self.shapes) - 1

    @property
    def times(self):
        return np.arange(len(self.shapes)) * self.h

    def at(self, t):
        """Piecewise-constant interpolant ``u_h(t) = w(floor(t / h))``."""
        i = int(np.floor(t / self.h + 1e-9))
        return self.shapes[min(i, self.n_steps)]

    def step_margins(self):
        """``phi(w_i) - phi(w_{i+1}) - d_i^2 / (2h)`` per step (nonnegative for valid steps)."""
        f = np.asarray(self.phi_values)
        d = np.asarray(self.step_distances)
        return f[:-1] - f[1:] - d**2 / (2.0 * self.h)

    def areas(self):
        return np.array([area(s) for s in self.shapes])

    def summary_rows(self):
        rows = []
        for i, s in enumerate(self.shapes):
            rows.append(
                dict(
                    step=i,
                    t=i * self.h,
                    phi=self.phi_values[i],
                    area=area(s),
                    step_distance=self.step_distances[i - 1] if i else 0.0,
                    inner_evals=self.inner_eval_counts[i - 1] if i else 0,
                    stagnated=self.stagnated[i - 1] if i else False,
                )
            )
        return rows


def run_flow(u0, cfg: FlowConfig, space: ShapeSpace | None = None, refine_final=True):
    """Iterate ``ceil(T / h)`` Euler steps from ``u0`` on one fixed mesh template."""
    if space is None:
        space = make_space(u0, cfg)
    p = _initial_params(space, u0, cfg)
    ev0 = space.evaluate(p)
    traj = FlowTrajectory(h=cfg.h, metric=cfg.metric)
    traj.shapes.append(space.shape(p))
    traj.params.append(p)
    traj.phi_values.append(ev0.lam)
    traj.mesh_h = ev0.mesh.h_max
    for i in range(cfg.n_steps):
        t0 = time.perf_counter()
        out = _step(space, p, cfg)
        traj.wall_times.append(time.perf_counter() - t0)
        p = out.params
        traj.shapes.append(out.shape)
        traj.params.append(p)
        traj.phi_values.append(out.phi)
        traj.big_phi_values.append(out.big_phi)
        traj.step_distances.append(out.distance)
        traj.inner_eval_counts.append(out.n_evals)
        traj.stagnated.append(out.stagnated)
        logger.info(
            "step %d: phi=%.10f d=%.3e evals=%d%s",
            i + 1, out.phi, out.distance, out.n_evals, " (stagnated)" if out.stagnated else "",
        )
    if refine_final:
        last = traj.shapes[-1]
        mesh = space.shape_mesh(last)
        mesh = refine(mesh, None if isinstance(space, ConvexSpace) else last)
        traj.refined_lambda = solve(mesh, cfg.bc).lambda1
    return traj
