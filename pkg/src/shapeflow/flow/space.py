"""Finite-dimensional parametrisations of the shape classes used by the flow.

A space owns one mesh template for the whole flow, and mesh node positions
are smooth (radial) or linear (convex) functions of the parameters, so the
discrete eigenvalue is a smooth function that gradient-based inner solvers
can minimise.  Evaluations are memoised on the exact parameter bytes.
"""

from __future__ import annotations

import numpy as np

from ..eigen.fem import assemble
from ..eigen.shape_gradient import vertex_gradient
from ..eigen.solver import solve_matrices
from ..errors import DegenerateTriangle, InvalidInput, IterationDivergence
from ..geometry.admissibility import is_admissible
from ..geometry.metrics import CHAR, LP_SUPPORT, SOBOLEV_RADIAL
from ..geometry.shapes import ConvexBody, RadialDomain, angles, diameter
from ..meshing import polygon_mesh, template_for

# smallest facet length (relative to the mean support value) a convex flow keeps open
FACET_FLOOR = 1e-6


def fourier_basis(theta, n_modes):
    """Columns ``1, cos k theta, sin k theta`` in the coefficient layout of ``RadialDomain``."""
    theta = np.asarray(theta, dtype=float)
    k = np.arange(1, n_modes + 1)
    kt = np.outer(theta, k)
    return np.hstack([np.ones((theta.size, 1)), np.cos(kt), np.sin(kt)])


class Evaluation:
    __slots__ = ("admissible", "grad", "lam", "mesh", "u")

    def __init__(self, lam, grad=None, u=None, mesh=None, admissible=True):
        self.lam = lam
        self.grad = grad
        self.u = u
        self.mesh = mesh
        self.admissible = admissible


_INADMISSIBLE = Evaluation(np.inf, admissible=False)


class ShapeSpace:
    """Common machinery; subclasses define the parameter map."""

    differentiable_metric = False

    def __init__(self, shape0, bc, metric, admissibility, mesh_rel_h, volume=None, n_boundary=None):
        self.bc = bc
        self.metric = metric
        self.admissibility = admissibility
        self.volume = volume
        self.target_h = mesh_rel_h * diameter(shape0)
        self.template = template_for(shape0, self.target_h, n_boundary)
        self._cache = {}
        self.n_evals = 0

    # parameter map, provided by subclasses
    def params(self, shape):
        raise NotImplementedError

    def shape(self, p):
        raise NotImplementedError

    def node_points(self, p):
        raise NotImplementedError

    def pull_back(self, p, g):
        """Parameter gradient from the nodal gradient ``g`` of shape ``(n, 2)``."""
        raise NotImplementedError

    def area_and_grad(self, p):
        raise NotImplementedError

    def dist_sq(self, px, p):
        """``(d^2, gradient)`` in closed form matching ``distance``, or ``(None, None)``."""
        return None, None

    def mesh(self, p):
        return self.template.mesh_from_points(self.node_points(p))

    def shape_mesh(self, shape):
        """Mesh of an arbitrary shape of the right kind on this template."""
        return self.mesh(self.params(shape))

    def project(self, p):
        """Rescale onto the area constraint; returns ``(q, vjp)`` for the chain rule."""
        if self.volume is None:
            return p, lambda g: g
        a, da = self.area_and_grad(p)
        c = np.sqrt(self.volume / a)
        dc = -0.5 * c * da / a
        return p * c, lambda g: c * g + float(p @ g) * dc

    def evaluate(self, p, need_grad=False):
        key = p.tobytes()
        hit = self._cache.get(key)
        if hit is not None and (hit.grad is not None or not need_grad or not hit.admissible):
            return hit
        self.n_evals += 1
        ev = self._evaluate(p, need_grad)
        if len(self._cache) > 4096:
            self._cache.clear()
        self._cache[key] = ev
        return ev

    def _evaluate(self, p, need_grad):
        try:
            shape = self.shape(p)
        except InvalidInput:
            return _INADMISSIBLE
        if not is_admissible(shape, self.admissibility):
            return _INADMISSIBLE
        mesh = self.mesh(p)
        try:
            matrices = assemble(mesh)
            lam, x, _, _ = solve_matrices(*matrices, self.bc, mesh.boundary_vertices, k=1)
        except (DegenerateTriangle, IterationDivergence):
            return _INADMISSIBLE
        lam = float(lam[0])
        u = x[:, 0]
        grad = self.pull_back(p, vertex_gradient(mesh, self.bc, lam, u)) if need_grad else None
        return Evaluation(lam, grad, u, mesh)


class RadialSpace(ShapeSpace):
    """Band-limited radial functions with ``n_modes`` Fourier modes."""

    def __init__(self, shape0, n_modes, **kw):
        if not isinstance(shape0, RadialDomain):
            raise InvalidInput("RadialSpace needs a RadialDomain")
        self.n_modes = n_modes
        self.n_samples = shape0.n_samples
        super().__init__(shape0, **kw)
        self._node_basis = self.template.radial_operator(fourier_basis(self.template.theta, n_modes))
        self._dirs = self.template.unit_directions()
        self._fine = angles(4 * self.n_samples)
        self._fine_basis = fourier_basis(self._fine, n_modes)
        k = np.arange(1, n_modes + 1, dtype=float)
        self._area_w = np.concatenate([[np.pi], np.full(2 * n_modes, 0.5 * np.pi)])
        sob = np.pi * (1.0 + k**2)
        self._sob_w = np.concatenate([[2.0 * np.pi], sob, sob])

    @property
    def differentiable_metric(self):
        return self.metric.tag in (SOBOLEV_RADIAL, CHAR)

    def params(self, shape):
        return np.array(shape.with_modes(self.n_modes).fourier)

    def shape(self, p):
        return RadialDomain.from_fourier(p, self.n_samples)

    def node_points(self, p):
        return self._dirs * (self._node_basis @ p)[:, None]

    def shape_mesh(self, shape):
        # evaluate the shape itself rather than its truncation to n_modes
        return self.template.map(shape)

    def pull_back(self, p, g):
        return self._node_basis.T @ np.sum(g * self._dirs, axis=1)

    def area_and_grad(self, p):
        # exact for trigonometric polynomials: pi a0^2 + pi/2 sum(a_k^2 + b_k^2)
        return float(np.sum(self._area_w * p * p)), 2.0 * self._area_w * p

    def dist_sq(self, px, p):
        diff = p - px
        if self.metric.tag == SOBOLEV_RADIAL:
            return float(np.sum(self._sob_w * diff * diff)), 2.0 * self._sob_w * diff
        if self.metric.tag == CHAR:
            ex = self._fine_basis @ px
            ey = self._fine_basis @ p
            w = 2.0 * np.pi / self._fine.size
            d = 0.5 * float(np.sum(np.abs(ey**2 - ex**2))) * w
            dd = self._fine_basis.T @ (np.sign(ey**2 - ex**2) * ey) * w
            return d * d, 2.0 * d * dd
        return None, None


class ConvexSpace(ShapeSpace):
    """Support-function samples of convex bodies.

    The mesh is the circumscribed polygon.  Template angle ``theta`` in
    ``[i, i+1] * 2 pi / N`` is sent to the point of the boundary segment from
    vertex ``i`` to vertex ``i+1`` at the same fraction and then placed on its
    ray by the template.  Vertices are linear in the support values, so every node is
    too, and the eigenvalue is smooth as long as no facet collapses.
    """

    def __init__(self, shape0, **kw):
        if not isinstance(shape0, ConvexBody):
            raise InvalidInput("ConvexSpace needs a ConvexBody")
        n = self.n_samples = shape0.n_samples
        super().__init__(shape0, **kw)
        d = 2.0 * np.pi / n
        eye = np.eye(n)
        # facet lengths are linear in rho: ell = L rho
        self.facet_matrix = (np.roll(eye, 1, axis=0) + np.roll(eye, -1, axis=0) - 2.0 * np.cos(d) * eye) / np.sin(d)
        self._px, self._py = self.template.polygon_operator(n)

    @property
    def differentiable_metric(self):
        return self.metric.tag == LP_SUPPORT and np.isfinite(self.metric.p)

    def params(self, shape):
        if shape.n_samples != self.n_samples:
            raise InvalidInput("support resolution differs from the flow's")
        return np.array(shape.support)

    def shape(self, p):
        return ConvexBody(p)

    def shape_mesh(self, shape):
        """Template mesh when every facet is open, else a Delaunay mesh of the polygon."""
        p = self.params(shape)
        if np.min(self.facet_matrix @ p) > FACET_FLOOR * float(np.mean(p)):
            return self.mesh(p)
        return polygon_mesh(shape, self.target_h)

    def node_points(self, p):
        return np.column_stack([self._px @ p, self._py @ p])

    def pull_back(self, p, g):
        return self._px.T @ g[:, 0] + self._py.T @ g[:, 1]

    def area_and_grad(self, p):
        ell = self.facet_matrix @ p
        return 0.5 * float(p @ ell), ell

    def dist_sq(self, px, p):
        if not self.differentiable_metric:
            return None, None
        q = self.metric.p
        diff = p - px
        w = 2.0 * np.pi / diff.size
        if q == 2.0:
            return float(np.sum(diff * diff) * w), 2.0 * w * diff
        s = float(np.sum(np.abs(diff) ** q) * w)
        if s == 0.0:
            return 0.0, np.zeros_like(diff)
        d = s ** (1.0 / q)
        dd = d ** (1.0 - q) * w * np.abs(diff) ** (q - 1.0) * np.sign(diff)
        return d * d, 2.0 * d * dd


def make_space(shape0, cfg):
    kw = dict(
        bc=cfg.bc,
        metric=cfg.metric,
        admissibility=cfg.admissibility,
        mesh_rel_h=cfg.mesh_rel_h,
        volume=cfg.volume,
    )
    if isinstance(shape0, RadialDomain):
        return RadialSpace(shape0, cfg.n_modes, **kw)
    if isinstance(shape0, ConvexBody):
        return ConvexSpace(shape0, **kw)
    raise InvalidInput(f"cannot flow a {type(shape0).__name__}")
