"""Empirical checks of the metric gradient-flow theory on computed trajectories."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..geometry.metrics import distance
from .config import FlowConfig
from .engine import FlowTrajectory, run_flow, shape_eigenvalue
from .space import make_space

__all__ = [
    "AprioriReport",
    "ContractionReport",
    "EviReport",
    "GmmReport",
    "apriori_check",
    "contraction_check",
    "evi_residual",
    "gmm_diagnostic",
]


@dataclass
class GmmReport:
    h_list: list
    times: list
    rows: list = field(default_factory=list)  # dicts: t, h_a, h_b, distance
    trajectories: dict = field(default_factory=dict)

    def cross(self, t, h_a, h_b):
        for r in self.rows:
            if r["t"] == t and {r["h_a"], r["h_b"]} == {h_a, h_b}:
                return r["distance"]
        raise KeyError((t, h_a, h_b))

    def consecutive(self, t):
        """Distances between successive refinements at time ``t``."""
        return [self.cross(t, a, b) for a, b in zip(self.h_list, self.h_list[1:])]


def gmm_diagnostic(u0, cfg: FlowConfig, h_list, times=None, space=None):
    """Cauchy table ``d(u_{h_a}(t), u_{h_b}(t))`` over pairs of time steps."""
    h_list = [float(h) for h in h_list]
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise ValueError("h_list must be strictly decreasing")
    if space is None:
        space = make_space(u0, cfg)
    if times is None:
        times = [cfg.T * k / 4.0 for k in range(1, 5)]
    rep = GmmReport(h_list, list(times))
    for h in h_list:
        rep.trajectories[h] = run_flow(u0, cfg.with_h(h), space=space, refine_final=False)
    for t in times:
        for a, b in itertools.combinations(h_list, 2):
            d = distance(rep.trajectories[a].at(t), rep.trajectories[b].at(t), cfg.metric)
            rep.rows.append(dict(t=t, h_a=a, h_b=b, distance=d))
    return rep


@dataclass
class ContractionReport:
    alpha: float
    d0: float
    times: np.ndarray
    distances: np.ndarray
    bound: np.ndarray
    slack: float
    passed: bool

    @property
    def max_excess(self):
        return float(np.max(self.distances - self.bound))


def contraction_check(u0, v0, cfg: FlowConfig, alpha=0.0, space=None, trajectories=None):
    """Compare ``d(u(t), v(t))`` with ``exp(-alpha t) d(u0, v0)`` along both flows.

    Both flows share one mesh template, so they minimise the same discrete
    functional.  PASS when the excess stays below ``slack * d(u0, v0)``.
    """
    if space is None:
        space = make_space(u0, cfg)
    if trajectories is None:
        trajectories = (run_flow(u0, cfg, space=space, refine_final=False),
                        run_flow(v0, cfg, space=space, refine_final=False))
    tu, tv = trajectories
    n = min(tu.n_steps, tv.n_steps)
    times = np.arange(n + 1) * cfg.h
    dist = np.array([distance(tu.shapes[i], tv.shapes[i], cfg.metric) for i in range(n + 1)])
    d0 = dist[0]
    bound = np.exp(-alpha * times) * d0
    slack = cfg.slack(cfg.h, tu.mesh_h)
    passed = bool(np.all(dist - bound <= slack * d0))
    return ContractionReport(alpha, d0, times, dist, bound, slack, passed)


@dataclass
class EviReport:
    alpha: float
    residuals: np.ndarray
    phi_z: float

    @property
    def max_positive(self):
        return float(max(0.0, np.max(self.residuals))) if self.residuals.size else 0.0


def evi_residual(traj: FlowTrajectory, z, alpha, cfg: FlowConfig, space=None):
    """Discrete EVI residuals ``r_i`` of a trajectory against the test point ``z``.

    ``r_i = [d^2(w_{i+1}, z) - d^2(w_i, z)] / (2h) + alpha/2 d^2(w_{i+1}, z)
    + phi(w_{i+1}) - phi(z)``.  ``phi(z)`` is evaluated on the flow's template.
    """
    if space is None:
        space = make_space(traj.shapes[0], cfg)
    phi_z = shape_eigenvalue(space, z)
    d2 = np.array([distance(w, z, cfg.metric) ** 2 for w in traj.shapes])
    f = np.asarray(traj.phi_values)
    r = (d2[1:] - d2[:-1]) / (2.0 * traj.h) + 0.5 * alpha * d2[1:] + f[1:] - phi_z
    return EviReport(alpha, r, phi_z)


@dataclass
class AprioriReport:
    t: float
    n_ref: int
    rows: list  # dicts: n, h, lhs, rhs, reference_error, slack, passed

    @property
    def passed(self):
        return all(r["passed"] for r in self.rows)


def apriori_check(u0, t, n_list, cfg: FlowConfig, space=None):
    """Compare ``d^2(J^n u0, S(t) u0)`` with ``(t/n)(phi(u0) - phi_{t/n}(u0))``.

    ``S(t) u0`` is approximated by the largest ``n`` in ``n_list``.  The
    reference itself sits within ``sqrt(RHS_ref)`` of the exact flow by the same
    estimate, so a row passes when
    ``sqrt(LHS) <= sqrt(RHS_n) + sqrt(RHS_ref) + slack * sqrt(phi(u0) t)``.
    ``phi_{t/n}(u0)`` is the value of ``Phi`` at the computed first step, an
    upper bound on the true infimum, so ``RHS`` is never overstated.
    """
    n_list = sorted(int(n) for n in n_list)
    n_ref = n_list[-1]
    if space is None:
        space = make_space(u0, cfg)
    trajs = {}
    rhs = {}
    for n in n_list:
        c = cfg.with_h(t / n, T=t)
        tr = run_flow(u0, c, space=space, refine_final=False)
        trajs[n] = tr
        phi0 = tr.phi_values[0]
        rhs[n] = max(0.0, (t / n) * (phi0 - tr.big_phi_values[0]))
    ref = trajs[n_ref].shapes[-1]
    rows = []
    scale = math.sqrt(trajs[n_ref].phi_values[0] * t)
    for n in n_list[:-1]:
        lhs = distance(trajs[n].shapes[-1], ref, cfg.metric) ** 2
        slack = cfg.slack(t / n, trajs[n].mesh_h) * scale
        ok = math.sqrt(lhs) <= math.sqrt(rhs[n]) + math.sqrt(rhs[n_ref]) + slack
        rows.append(
            dict(n=n, h=t / n, lhs=lhs, rhs=rhs[n], reference_error=math.sqrt(rhs[n_ref]), slack=slack, passed=ok)
        )
    return AprioriReport(t, n_ref, rows)
