"""Robin eigenvalues with negative beta on increasingly wiggly boundaries.

With ``beta < 0`` the boundary term rewards perimeter, so a zigzag boundary
that stays within a fixed Hausdorff distance of the disk drives the first
eigenvalue down without bound.  This is why the flow refuses ``beta <= 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..eigen.solver import BoundaryCondition, solve
from ..geometry.metrics import MetricKind, distance
from ..geometry.shapes import RadialDomain, angles
from ..meshing import DiskTemplate

__all__ = ["NegBetaReport", "negbeta_demo", "sawtooth_domain"]


def sawtooth_domain(m: int, amplitude=0.05, n_samples=1024) -> RadialDomain:
    """``eta = 1 + amplitude * tri(m theta)`` with a zero-mean triangle wave in ``[-1, 1]``."""
    th = angles(n_samples)
    x = np.mod(m * th / (2.0 * np.pi), 1.0)
    tri = 1.0 - 4.0 * np.abs(x - 0.5)
    return RadialDomain.from_samples(1.0 + amplitude * tri)


@dataclass
class NegBetaReport:
    beta: float
    amplitude: float
    levels: list
    lambdas: list = field(default_factory=list)
    perimeters: list = field(default_factory=list)  # of the meshed boundary polygon
    hausdorff: list = field(default_factory=list)

    @property
    def strictly_decreasing(self):
        lam = np.asarray(self.lambdas)
        return bool(np.all(np.diff(lam) < 0.0))

    def rows(self):
        return [
            dict(m=m, lam=float(lam), perimeter=float(p), hausdorff=float(d))
            for m, lam, p, d in zip(self.levels, self.lambdas, self.perimeters, self.hausdorff)
        ]


def negbeta_demo(levels=(8, 16, 32, 64, 128), amplitude=0.05, beta=-1.0, n_samples=1024, target_h=0.02):
    """First Robin eigenvalue of sawtooth domains of growing frequency.

    All levels share one template whose boundary has one node per sample, so
    every tooth is resolved by the same polygon the eigenvalue sees.
    """
    if beta >= 0.0:
        raise ValueError("the demo is about negative beta")
    bc = BoundaryCondition.robin(beta)
    n_rings = int(np.ceil((1.0 + amplitude) / target_h))
    template = DiskTemplate.build(n_rings, n_samples)
    disk = RadialDomain.disk(1.0, n_samples)
    metric = MetricKind.parse("hausdorff")
    rep = NegBetaReport(beta, amplitude, list(levels))
    for m in levels:
        dom = sawtooth_domain(m, amplitude, n_samples)
        mesh = template.map(dom)
        rep.lambdas.append(solve(mesh, bc).lambda1)
        rep.perimeters.append(float(mesh.boundary_lengths().sum()))
        rep.hausdorff.append(distance(dom, disk, metric))
    return rep
