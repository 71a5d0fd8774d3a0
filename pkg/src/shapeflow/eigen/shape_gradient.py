"""Exact derivative of the discrete eigenvalue with respect to vertex positions.

For a simple eigenvalue with ``u^T M u = 1`` one has
``d lambda = u^T (dK + beta dB - lambda dM) u``; the element contributions are
written in terms of the velocity of the three vertices, giving a nodal
gradient ``G`` with ``d lambda = sum_n G_n . V_n``.
"""

import numpy as np

from .fem import element_gradients

_MASS_REF = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0


def vertex_gradient(mesh, bc, lam, u):
    """Nodal gradient of ``lam`` (shape ``(n_vertices, 2)``) for eigenvector ``u``."""
    area, grads = element_gradients(mesh.vertices, mesh.triangles)
    ue = u[mesh.triangles]
    g = np.einsum("ti,tik->tk", ue, grads)
    g2 = np.sum(g * g, axis=1)
    m_e = area * np.einsum("ti,ij,tj->t", ue, _MASS_REF, ue)
    gdot = np.einsum("tik,tk->ti", grads, g)
    contrib = (
        (area * g2 - lam * m_e)[:, None, None] * grads
        - 2.0 * (area[:, None] * gdot)[:, :, None] * g[:, None, :]
    )
    out = np.zeros((mesh.n_vertices, 2))
    np.add.at(out, mesh.triangles.ravel(), contrib.reshape(-1, 2))
    if not bc.is_dirichlet:
        e = mesh.boundary_edges
        d = mesh.vertices[e[:, 1]] - mesh.vertices[e[:, 0]]
        length = np.linalg.norm(d, axis=1)
        tau = d / length[:, None]
        ua, ub = u[e[:, 0]], u[e[:, 1]]
        b_e = length * (2.0 * ua**2 + 2.0 * ua * ub + 2.0 * ub**2) / 6.0
        w = (bc.beta * b_e / length)[:, None] * tau
        np.add.at(out, e[:, 1], w)
        np.add.at(out, e[:, 0], -w)
    return out
