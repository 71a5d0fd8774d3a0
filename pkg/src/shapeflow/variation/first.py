"""First and second domain variations of the first eigenvalue."""

from __future__ import annotations

from dataclasses import dataclass
from dataclasses import field as dc_field

import numpy as np
from scipy.sparse.linalg import spsolve

from ..eigen.fem import assemble
from ..eigen.solver import solve, solve_matrices
from ..geometry.admissibility import AdmissibilityConfig
from ..geometry.shapes import boundary_curvature, diameter
from ..meshing import template_for
from .fields import _frame, perturbed_mesh

__all__ = [
    "DEFAULT_TARGET_H",
    "SecondVariationReport",
    "finite_diff_variation",
    "first_variation",
    "second_variation_bound",
]

DEFAULT_TARGET_H = 0.04
FD_DELTAS = (1e-2, 5e-3)
# two self-similar templates (h, h/2); P1 eigen-data carry an O(h^2) bias
MESH_LEVELS = 2


def _mesh_extrapolate(values):
    if len(values) == 1:
        return values[0]
    return (4.0 * values[1] - values[0]) / 3.0


def _templates(domain, target_h, levels):
    if levels not in (1, 2):
        raise ValueError("levels must be 1 or 2")
    return [template_for(domain, target_h / 2**k) for k in range(levels)]


def _edge_nodes(mesh):
    e = mesh.boundary_edges
    th_a = mesh.boundary_theta
    th_b = np.roll(th_a, -1)
    span = np.mod(th_b - th_a, 2.0 * np.pi)
    return e[:, 0], e[:, 1], th_a, th_a + 0.5 * span, span


def _boundary_integral(domain, mesh, fa, fb, fm, weight):
    """Simpson rule over boundary edges of ``f * weight`` with respect to arclength.

    ``fa, fb, fm`` are the integrand at the edge ends and midpoints; ``weight``
    is a callable of the angle.
    """
    _, _, th_a, th_m, span = _edge_nodes(mesh)
    th_b = th_a + span
    total = 0.0
    for f, th, c in ((fa, th_a, 1.0), (fm, th_m, 4.0), (fb, th_b, 1.0)):
        _, _, _, speed = _frame(domain, th)
        total += c * np.sum(f * weight(th) * speed * span)
    return float(total / 6.0)


def _dirichlet_flux(mesh, matrices, lam, u):
    """Normal derivative at boundary nodes recovered from the discrete residual."""
    stiffness, mass, bmass = matrices
    r = stiffness @ u - lam * (mass @ u)
    b = mesh.boundary_vertices
    return spsolve(bmass[b][:, b].tocsc(), r[b])


def first_variation(domain, bc, field, target_h=DEFAULT_TARGET_H, levels=MESH_LEVELS, mesh=None):
    """Shape derivative of the first eigenvalue along ``field`` by the boundary integral.

    Robin: the integrand ``|grad u|^2 - lambda u^2 - 2 beta^2 u^2 + beta kappa u^2``
    is evaluated with the boundary condition substituted, i.e. as
    ``(d_s u)^2 - lambda u^2 - beta^2 u^2 + beta kappa u^2``, which only needs
    boundary traces of the P1 solution.  Dirichlet: ``-(d_nu u)^2`` with the
    flux recovered from the discrete residual.

    With ``levels=2`` the integral is evaluated on templates of size ``h`` and
    ``h/2`` and extrapolated in ``h``; an explicit ``mesh`` overrides this.
    """
    field.check(domain)
    if mesh is not None:
        return _first_variation_on(domain, bc, field, mesh)
    values = [_first_variation_on(domain, bc, field, t.map(domain)) for t in _templates(domain, target_h, levels)]
    return _mesh_extrapolate(values)


def _first_variation_on(domain, bc, field, mesh):
    matrices = assemble(mesh)
    lam, x, _, _ = solve_matrices(*matrices, bc, mesh.boundary_vertices)
    lam = float(lam[0])
    u = x[:, 0]
    a, b, *_ = _edge_nodes(mesh)
    g = field.normal_at
    if bc.is_dirichlet:
        q = _dirichlet_flux(mesh, matrices, lam, u)
        qa, qb = q, np.roll(q, -1)
        qm = 0.5 * (qa + qb)
        return -_boundary_integral(domain, mesh, qa**2, qb**2, qm**2, g)
    beta = bc.beta
    ua, ub = u[a], u[b]
    um = 0.5 * (ua + ub)
    length = mesh.boundary_lengths()
    dsu2 = ((ub - ua) / length) ** 2
    _, _, th_a, th_m, span = _edge_nodes(mesh)
    ka = boundary_curvature(domain, th_a)
    kb = boundary_curvature(domain, th_a + span)
    km = boundary_curvature(domain, th_m)
    c = -lam - beta**2
    fa = dsu2 + (c + beta * ka) * ua**2
    fb = dsu2 + (c + beta * kb) * ub**2
    fm = dsu2 + (c + beta * km) * um**2
    return _boundary_integral(domain, mesh, fa, fb, fm, g)


def _fd_step(domain, field, delta):
    """Parameter step whose largest boundary displacement is ``delta * diam``."""
    th = domain.angles
    v = np.linalg.norm(field.displacement(domain, th), axis=1).max()
    if v == 0.0:
        return 0.0
    return delta * diameter(domain) / v


def finite_diff_variation(
    domain,
    bc,
    field,
    delta=FD_DELTAS,
    order=1,
    target_h=DEFAULT_TARGET_H,
    admissibility: AdmissibilityConfig | None = None,
    levels=MESH_LEVELS,
    template=None,
):
    """Central differences of ``t -> lambda(Omega_t)`` on fixed mesh templates.

    ``delta`` is a pair of relative displacement sizes; the two estimates are
    Richardson-combined (both stencils have an ``O(t^2)`` leading error).
    A single float skips that extrapolation.  ``levels`` works as in
    :func:`first_variation`; an explicit ``template`` uses just that one.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    field.check(domain)
    templates = [template] if template is not None else _templates(domain, target_h, levels)
    values = [_fd_on(domain, bc, field, delta, order, admissibility, t) for t in templates]
    return _mesh_extrapolate(values)


def _fd_on(domain, bc, field, delta, order, admissibility, template):
    def lam_at(t):
        mesh = perturbed_mesh(template, domain, field, t, admissibility)
        return solve(mesh, bc).lambda1

    lam0 = lam_at(0.0) if order == 2 else None

    def estimate(d):
        t = _fd_step(domain, field, d)
        if t == 0.0:
            return 0.0
        lp, lm = lam_at(t), lam_at(-t)
        if order == 1:
            return (lp - lm) / (2.0 * t)
        return (lp - 2.0 * lam0 + lm) / (t * t)

    deltas = np.atleast_1d(delta)
    if deltas.size == 1:
        return estimate(float(deltas[0]))
    d1, d2 = float(deltas[0]), float(deltas[1])
    e1, e2 = estimate(d1), estimate(d2)
    r = (d1 / d2) ** 2
    return (r * e2 - e1) / (r - 1.0)


@dataclass
class SecondVariationReport:
    ratios: list = dc_field(default_factory=list)
    second: list = dc_field(default_factory=list)
    norms: list = dc_field(default_factory=list)

    @property
    def max_ratio(self):
        return float(max(self.ratios)) if self.ratios else 0.0

    @property
    def finite(self):
        return bool(np.all(np.isfinite(self.ratios)))


def second_variation_bound(pairs, bc, target_h=DEFAULT_TARGET_H, admissibility=None, levels=1):
    """Empirical constant ``max |lambda''| / ||v||^2_{W^{1,2}}`` over ``(domain, field)`` pairs."""
    rep = SecondVariationReport()
    for domain, fld in pairs:
        dd = finite_diff_variation(
            domain, bc, fld, order=2, target_h=target_h, admissibility=admissibility, levels=levels
        )
        nrm = fld.norm_sq(domain)
        rep.second.append(dd)
        rep.norms.append(nrm)
        rep.ratios.append(abs(dd) / nrm)
    return rep
