"""Mapped-disk triangulations of star-shaped domains.

A :class:`DiskTemplate` triangulates the unit disk with concentric rings; a
domain is meshed by sending the template node ``(s, theta)`` to
``s * eta(theta) * (cos theta, sin theta)``.  The template is scale free, so
the same connectivity serves every domain whose radial function is sampled at
the same angles, which is what makes eigenvalues smooth functions of the shape
parameters during a flow.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay

from .errors import DegenerateTriangle, InvalidInput, OriginNotInterior, TargetTooCoarse
from .geometry.shapes import ConvexBody, RadialDomain, perimeter, radial_values

__all__ = [
    "DiskTemplate",
    "TriMesh",
    "mesh_quality",
    "polygon_mesh",
    "read_off",
    "refine",
    "template_for",
    "triangulate",
    "write_off",
]


@dataclass(frozen=True, eq=False)
class TriMesh:
    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_theta: np.ndarray  # polar angle of the first vertex of each boundary edge

    def __post_init__(self):
        for name in ("vertices", "triangles", "boundary_edges", "boundary_theta"):
            arr = np.array(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def boundary_vertices(self):
        return self.boundary_edges[:, 0]

    def signed_areas(self):
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def edges(self):
        t = self.triangles
        e = np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    @property
    def h_max(self):
        e = self.edges()
        return float(np.max(np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1)))

    def boundary_normals(self):
        """Outward unit normals of the boundary edges (the loop runs counterclockwise)."""
        d = self.vertices[self.boundary_edges[:, 1]] - self.vertices[self.boundary_edges[:, 0]]
        n = np.column_stack([d[:, 1], -d[:, 0]])
        return n / np.linalg.norm(n, axis=1)[:, None]

    def boundary_lengths(self):
        d = self.vertices[self.boundary_edges[:, 1]] - self.vertices[self.boundary_edges[:, 0]]
        return np.linalg.norm(d, axis=1)

    def area(self):
        return float(self.signed_areas().sum())

    def scaled(self, factor):
        return TriMesh(self.vertices * factor, self.triangles, self.boundary_edges, self.boundary_theta)


def _zipper(inner, outer, inner_frac, outer_frac):
    """Triangulate the strip between two closed rings by merging their angular order."""
    p, q = len(inner), len(outer)
    tris = []
    i = j = 0
    while i < p or j < q:
        ni = inner_frac[i + 1] if i < p else np.inf
        nj = outer_frac[j + 1] if j < q else np.inf
        if j >= q or (i < p and ni < nj):
            tris.append((inner[i % p], outer[j % q], inner[(i + 1) % p]))
            i += 1
        else:
            tris.append((inner[i % p], outer[j % q], outer[(j + 1) % q]))
            j += 1
    return tris


CORE = 0.25  # ring radius inside which angular detail is damped


def core_weight(s):
    """``q(s)``: equal to ``s`` outside the core and ``CORE (s / CORE)^1.5`` inside it."""
    s = np.asarray(s, dtype=float)
    return np.where(s < CORE, CORE * (np.minimum(s, CORE) / CORE) ** 1.5, s)


@dataclass(frozen=True, eq=False)
class DiskTemplate:
    """Concentric-ring triangulation of the unit disk."""

    s: np.ndarray
    theta: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray

    @classmethod
    def build(cls, n_rings, n_boundary):
        if n_rings < 3:
            raise TargetTooCoarse(f"only {n_rings} rings; need at least 3")
        if n_boundary < 6:
            raise TargetTooCoarse("need at least 6 boundary vertices")
        s = [0.0]
        theta = [0.0]
        rings = []
        fracs = []
        start = 1
        for k in range(1, n_rings + 1):
            nk = n_boundary if k == n_rings else max(6, int(round(n_boundary * k / n_rings)))
            idx = np.arange(start, start + nk)
            start += nk
            s.extend([k / n_rings] * nk)
            theta.extend(2.0 * np.pi * np.arange(nk) / nk)
            rings.append(idx)
            fracs.append(np.arange(nk + 1) / nk)
        tris = [(0, rings[0][j], rings[0][(j + 1) % len(rings[0])]) for j in range(len(rings[0]))]
        for k in range(1, n_rings):
            tris.extend(_zipper(rings[k - 1], rings[k], fracs[k - 1], fracs[k]))
        return cls(np.array(s), np.array(theta), np.array(tris, dtype=int), rings[-1])

    @property
    def n_rings(self):
        return int(round(1.0 / np.min(self.s[self.s > 0])))

    @property
    def n_nodes(self):
        return self.s.size

    def unit_directions(self):
        return np.column_stack([np.cos(self.theta), np.sin(self.theta)])

    def place(self, ray_points):
        """Node coordinates from the boundary point ``X`` on each node's ray.

        Node ``(s, theta)`` goes to ``q(s) X + (s - q(s)) c e(theta)``, with ``c``
        the mean boundary radius.  Outside the core this is the cone map ``s X``.
        Inside it the angular variation shrinks faster than ``s``, so the coarse
        central sectors cannot fold when the radius changes sharply.  The map is
        linear in ``X``.
        """
        e = self.unit_directions()
        q = core_weight(self.s)
        b = self.boundary
        c = float(np.mean(np.sum(ray_points[b] * e[b], axis=1)))
        return q[:, None] * ray_points + ((self.s - q) * c)[:, None] * e

    def radial_operator(self, basis):
        """Matrix ``R`` with node ``i`` at ``(R p)_i e(theta_i)`` when the radius samples are ``basis @ p``."""
        q = core_weight(self.s)
        mean_row = np.mean(basis[self.boundary], axis=0)
        return q[:, None] * basis + (self.s - q)[:, None] * mean_row[None, :]

    def mesh_from_radii(self, radii):
        """Mesh with the boundary radius ``radii[node]`` on each node's ray."""
        radii = np.asarray(radii, dtype=float)
        return self.mesh_from_points(self.place(self.unit_directions() * radii[:, None]))

    def mesh_from_points(self, points):
        """Template connectivity with explicitly placed nodes."""
        b = self.boundary
        edges = np.column_stack([b, np.roll(b, -1)])
        return TriMesh(points, self.triangles, edges, self.theta[b])

    def map(self, shape):
        return self.mesh_from_radii(radial_values(shape, self.theta))

    def polygon_operator(self, n_facets):
        """Linear maps ``(PX, PY)`` from support samples to node coordinates.

        Template angle ``theta`` in ``[i, i+1] * 2 pi / n`` goes to the point of
        the circumscribed polygon's edge from vertex ``i`` to vertex ``i+1`` at
        the same fraction, placed on its ray as in ``place``.
        """
        vx, vy = _vertex_operator(n_facets)
        d = 2.0 * np.pi / n_facets
        pos = self.theta / d
        i = np.minimum(np.floor(pos + 1e-12).astype(int), n_facets - 1) % n_facets
        tau = np.clip(pos - np.floor(pos + 1e-12), 0.0, 1.0)
        j = (i + 1) % n_facets
        w0 = (1.0 - tau)[:, None]
        w1 = tau[:, None]
        x0, y0 = w0 * vx[i] + w1 * vx[j], w0 * vy[i] + w1 * vy[j]
        b = self.boundary
        c, sn = np.cos(self.theta), np.sin(self.theta)
        mean_r = np.mean(c[b, None] * x0[b] + sn[b, None] * y0[b], axis=0)
        q = core_weight(self.s)[:, None]
        rest = (self.s - core_weight(self.s))[:, None]
        return q * x0 + rest * c[:, None] * mean_r, q * y0 + rest * sn[:, None] * mean_r

    def map_polygon(self, body):
        """Mesh of the circumscribed polygon of a convex body (exact polygon boundary)."""
        px, py = self.polygon_operator(body.n_samples)
        rho = np.asarray(body.support)
        return self.mesh_from_points(np.column_stack([px @ rho, py @ rho]))


def _vertex_operator(n):
    """Matrices ``X, Y`` with polygon vertex ``i`` (facets ``i``, ``i+1``) at ``(X rho, Y rho)``."""
    t = 2.0 * np.pi * np.arange(n) / n
    d = 2.0 * np.pi / n
    x = np.zeros((n, n))
    y = np.zeros((n, n))
    i = np.arange(n)
    j = (i + 1) % n
    x[i, i] = np.sin(t[j]) / np.sin(d)
    x[i, j] = -np.sin(t) / np.sin(d)
    y[i, j] = np.cos(t) / np.sin(d)
    y[i, i] = -np.cos(t[j]) / np.sin(d)
    return x, y


def _aligned_count(needed, n_samples):
    """Smallest divisor or power-of-two multiple of ``n_samples`` that is >= ``needed``."""
    divisors = [d for d in range(6, n_samples + 1) if n_samples % d == 0]
    for d in divisors:
        if d >= needed:
            return d
    m = n_samples
    while m < needed:
        m *= 2
    return m


def template_for(shape, target_h, n_boundary=None):
    """Choose ring and boundary counts so every edge is at most about ``target_h``."""
    if target_h <= 0.0:
        raise InvalidInput("target_h must be positive")
    n = shape.n_samples
    rmax = float(np.max(radial_values(shape, np.linspace(0.0, 2.0 * np.pi, 4 * n, endpoint=False))))
    n_rings = int(math.ceil(rmax / target_h))
    if n_boundary is None:
        n_boundary = _aligned_count(int(math.ceil(perimeter(shape) / target_h)), n)
    return DiskTemplate.build(n_rings, n_boundary)


def triangulate(shape, target_h, n_boundary=None):
    """Mapped-disk mesh of a radial domain or convex body (about the origin)."""
    if not isinstance(shape, (RadialDomain, ConvexBody)):
        raise InvalidInput(f"cannot mesh {type(shape).__name__}")
    mesh = template_for(shape, target_h, n_boundary).map(shape)
    if np.min(mesh.signed_areas()) <= 0.0:
        raise DegenerateTriangle("mapped template produced an inverted triangle")
    return mesh


def _distinct_vertices(body):
    v = body.vertices()
    scale = float(np.max(np.abs(body.support)))
    step = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
    keep = step > 1e-9 * scale
    return v[np.roll(keep, 1)] if keep.any() else v[:1]


def polygon_mesh(body, target_h):
    """Delaunay mesh of the circumscribed polygon of a convex body.

    Every polygon corner is a boundary node, edges are split into pieces of at
    most ``target_h``, and the interior is a triangular lattice kept at least
    ``0.45 target_h`` away from the boundary.  Zero-length facets are allowed.
    """
    if not isinstance(body, ConvexBody):
        raise InvalidInput("polygon_mesh needs a ConvexBody")
    if target_h <= 0.0:
        raise InvalidInput("target_h must be positive")
    rho = np.asarray(body.support)
    if np.min(rho) <= 0.0:
        raise OriginNotInterior("origin is not interior to the convex body")
    corners = _distinct_vertices(body)
    if corners.shape[0] < 3:
        raise DegenerateTriangle("convex body has empty interior")
    ring, bulge = [], []
    for a, b in zip(corners, np.roll(corners, -1, axis=0)):
        k = max(1, int(math.ceil(np.linalg.norm(b - a) / target_h)))
        f = np.arange(k)[:, None] / k
        ring.append(a + f * (b - a))
        out = np.array([b[1] - a[1], a[0] - b[0]])
        bulge.append(f * (1.0 - f) * out[None, :])
    ring = np.vstack(ring)
    # Qhull merges or drops collinear hull points; a tiny outward bulge makes
    # the hull strictly convex for the connectivity computation only
    bulged = ring + 1e-6 * np.vstack(bulge)

    lo, hi = ring.min(axis=0), ring.max(axis=0)
    dy = target_h * math.sqrt(3.0) / 2.0
    rows = np.arange(lo[1], hi[1] + dy, dy)
    pts = []
    for r, y in enumerate(rows):
        xs = np.arange(lo[0] + (0.5 * target_h if r % 2 else 0.0), hi[0] + target_h, target_h)
        pts.append(np.column_stack([xs, np.full_like(xs, y)]))
    lattice = np.vstack(pts)
    t = body.angles
    normals = np.column_stack([np.cos(t), np.sin(t)])
    gap = np.min(rho[None, :] - lattice @ normals.T, axis=1)
    lattice = lattice[gap > 0.45 * target_h]

    tri = Delaunay(np.vstack([bulged, lattice]), qhull_options="Qbb Qz Q12").simplices
    verts = np.vstack([ring, lattice])
    if np.unique(tri).size != verts.shape[0]:
        raise DegenerateTriangle("Delaunay dropped mesh points")
    nb = ring.shape[0]
    edges = np.column_stack([np.arange(nb), (np.arange(nb) + 1) % nb])
    theta = np.mod(np.arctan2(ring[:, 1], ring[:, 0]), 2.0 * np.pi)
    mesh = TriMesh(verts, tri, edges, theta)
    sa = mesh.signed_areas()
    mesh = TriMesh(verts, np.where((sa < 0.0)[:, None], tri[:, [0, 2, 1]], tri), edges, theta)
    if np.min(np.abs(sa)) <= 1e-6 * target_h**2:
        raise DegenerateTriangle("polygon mesh has a degenerate triangle")
    return mesh


def refine(mesh, shape=None):
    """Regular 4-split; boundary midpoints are projected onto ``r = eta(theta)``.

    With ``shape=None`` the boundary is taken to be the mesh polygon itself and
    midpoints stay where they are.
    """
    t = mesh.triangles
    nv = mesh.n_vertices
    e = np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    key = np.sort(e, axis=1)
    uniq, inv = np.unique(key, axis=0, return_inverse=True)
    inv = inv.ravel()
    mids = 0.5 * (mesh.vertices[uniq[:, 0]] + mesh.vertices[uniq[:, 1]])

    b = mesh.boundary_edges
    th0 = mesh.boundary_theta
    th1 = np.roll(th0, -1)
    th_mid = th0 + 0.5 * np.mod(th1 - th0, 2.0 * np.pi)
    th_mid = np.mod(th_mid, 2.0 * np.pi)
    bkey = np.sort(b, axis=1)
    lookup = {tuple(k): i for i, k in enumerate(uniq)}
    bidx = np.array([lookup[tuple(k)] for k in bkey])
    if shape is not None:
        r_mid = radial_values(shape, th_mid)
        mids[bidx] = np.column_stack([r_mid * np.cos(th_mid), r_mid * np.sin(th_mid)])

    m = inv.reshape(3, -1).T + nv  # midpoint ids of edges (01, 12, 20)
    a, bb, c = t[:, 0], t[:, 1], t[:, 2]
    m01, m12, m20 = m[:, 0], m[:, 1], m[:, 2]
    tris = np.vstack(
        [
            np.column_stack([a, m01, m20]),
            np.column_stack([m01, bb, m12]),
            np.column_stack([m20, m12, c]),
            np.column_stack([m01, m12, m20]),
        ]
    )
    verts = np.vstack([mesh.vertices, mids])
    new_b = np.empty((2 * b.shape[0], 2), dtype=int)
    new_b[0::2, 0] = b[:, 0]
    new_b[0::2, 1] = bidx + nv
    new_b[1::2, 0] = bidx + nv
    new_b[1::2, 1] = b[:, 1]
    new_th = np.empty(2 * th0.size)
    new_th[0::2] = th0
    new_th[1::2] = th_mid
    out = TriMesh(verts, tris, new_b, new_th)
    if np.min(out.signed_areas()) <= 0.0:
        raise DegenerateTriangle("refinement produced an inverted triangle")
    return out


def mesh_quality(mesh):
    """Minimum interior angle in degrees over all triangles."""
    p = mesh.vertices[mesh.triangles]
    worst = np.inf
    for i in range(3):
        u = p[:, (i + 1) % 3] - p[:, i]
        v = p[:, (i + 2) % 3] - p[:, i]
        cosang = np.sum(u * v, axis=1) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
        worst = min(worst, float(np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0))).min()))
    return worst


def write_off(mesh, fh=None):
    """OFF text plus a ``BOUNDARY`` section (edge vertices, outward normal, theta)."""
    out = io.StringIO() if fh is None else fh
    out.write("OFF\n")
    out.write(f"{mesh.n_vertices} {mesh.triangles.shape[0]} 0\n")
    for x, y in mesh.vertices:
        out.write(f"{float(x)!r} {float(y)!r} 0.0\n")
    for a, b, c in mesh.triangles:
        out.write(f"3 {a} {b} {c}\n")
    normals = mesh.boundary_normals()
    out.write(f"BOUNDARY {mesh.boundary_edges.shape[0]}\n")
    for (a, b), (nx, ny), th in zip(mesh.boundary_edges, normals, mesh.boundary_theta):
        out.write(f"{a} {b} {float(nx)!r} {float(ny)!r} {float(th)!r}\n")
    if fh is None:
        return out.getvalue()
    return None


def read_off(text):
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if lines[0].strip() != "OFF":
        raise InvalidInput("not an OFF file")
    nv, nt, _ = (int(v) for v in lines[1].split())
    verts = np.array([[float(v) for v in ln.split()[:2]] for ln in lines[2 : 2 + nv]])
    tris = np.array([[int(v) for v in ln.split()[1:4]] for ln in lines[2 + nv : 2 + nv + nt]], dtype=int)
    rest = lines[2 + nv + nt :]
    nb = int(rest[0].split()[1])
    rows = [ln.split() for ln in rest[1 : 1 + nb]]
    edges = np.array([[int(r[0]), int(r[1])] for r in rows], dtype=int)
    theta = np.array([float(r[4]) for r in rows])
    return TriMesh(verts, tris, edges, theta)
