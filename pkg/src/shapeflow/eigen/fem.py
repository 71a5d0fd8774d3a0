"""P1 finite element matrices on triangle meshes."""

import numpy as np
from scipy import sparse

from ..errors import DegenerateTriangle

_MASS_REF = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0
_EDGE_REF = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0


def element_gradients(vertices, triangles):
    """Signed areas and gradients of the three hat functions on every triangle.

    Returns ``(area, grads)`` with ``grads`` of shape ``(n_tri, 3, 2)``.
    """
    p = vertices[triangles]
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    area = 0.5 * (e[:, 2, 0] * (-e[:, 1, 1]) - e[:, 2, 1] * (-e[:, 1, 0]))
    with np.errstate(divide="ignore", invalid="ignore"):
        grads = np.stack([-e[..., 1], e[..., 0]], axis=-1) / (2.0 * area[:, None, None])
    return area, grads


def assemble(mesh):
    """Stiffness, mass and boundary-mass matrices (CSR) of the P1 space on ``mesh``."""
    area, grads = element_gradients(mesh.vertices, mesh.triangles)
    if np.min(area) <= 0.0:
        raise DegenerateTriangle(f"{np.count_nonzero(area <= 0)} triangles with non-positive area")
    n = mesh.n_vertices
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    ke = area[:, None, None] * np.einsum("tik,tjk->tij", grads, grads)
    me = area[:, None, None] * _MASS_REF[None]
    stiffness = sparse.coo_matrix((ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    mass = sparse.coo_matrix((me.ravel(), (rows, cols)), shape=(n, n)).tocsr()

    b = mesh.boundary_edges
    length = mesh.boundary_lengths()
    be = length[:, None, None] * _EDGE_REF[None]
    brows = np.repeat(b, 2, axis=1).ravel()
    bcols = np.tile(b, (1, 2)).ravel()
    bmass = sparse.coo_matrix((be.ravel(), (brows, bcols)), shape=(n, n)).tocsr()
    return stiffness, mass, bmass
