"""First (and second) Laplacian eigenpairs with Dirichlet or Robin conditions."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import eigsh, splu

from ..errors import InvalidInput, IterationDivergence, ZeroVector
from .fem import assemble

__all__ = ["DIRICHLET", "ROBIN", "BoundaryCondition", "EigenResult", "rayleigh", "solve", "solve_matrices", "trace_ratio"]

logger = logging.getLogger(__name__)

DIRICHLET = "dirichlet"
ROBIN = "robin"


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str = DIRICHLET
    beta: float | None = None

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind == DIRICHLET:
            if self.beta is not None:
                raise InvalidInput("Dirichlet conditions carry no beta")
        elif kind == ROBIN:
            if self.beta is None or not np.isfinite(self.beta):
                raise InvalidInput("Robin conditions need a finite beta")
        else:
            raise InvalidInput(f"unknown boundary condition {self.kind!r}")

    @classmethod
    def dirichlet(cls):
        return cls(DIRICHLET)

    @classmethod
    def robin(cls, beta):
        return cls(ROBIN, float(beta))

    @property
    def is_dirichlet(self):
        return self.kind == DIRICHLET

    @property
    def label(self):
        return "dirichlet" if self.is_dirichlet else f"robin(beta={self.beta:g})"


@dataclass
class EigenResult:
    lambda1: float
    u: np.ndarray
    residual: float
    mesh_h: float
    lambda2: float | None = None
    u2: np.ndarray | None = None
    iterations: int = 0


def _system(stiffness, mass, bmass, bc, boundary):
    if bc.is_dirichlet:
        free = np.ones(stiffness.shape[0], dtype=bool)
        free[boundary] = False
        idx = np.flatnonzero(free)
        a = stiffness[idx][:, idx]
        m = mass[idx][:, idx]
        return a.tocsc(), m.tocsc(), idx
    a = stiffness + bc.beta * bmass
    return a.tocsc(), mass.tocsc(), None


def _residuals(a, m, x, lam):
    r = a @ x - (m @ x) * lam[None, :]
    return np.linalg.norm(r, axis=0) / np.linalg.norm(m @ x, axis=0)


def _subspace_iteration(a, m, k, shift, tol, maxiter, seed=0):
    n = a.shape[0]
    p = min(n, k + 3)
    lu = splu((a - shift * m).tocsc())
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    x[:, 0] = 1.0
    lam = None
    res = np.inf
    for it in range(1, maxiter + 1):
        y = lu.solve(m @ x)
        ar = y.T @ (a @ y)
        mr = y.T @ (m @ y)
        ar = 0.5 * (ar + ar.T)
        mr = 0.5 * (mr + mr.T)
        w, v = scipy.linalg.eigh(ar, mr)
        x = y @ v
        lam = w
        res = float(np.max(_residuals(a, m, x[:, :k], lam[:k])))
        if res <= tol:
            return lam[:k], x[:, :k], res, it
    raise IterationDivergence(f"residual {res:.3e} after {maxiter} iterations (shift {shift:g})")


def _lower_bound_shift(a, m, bmass_part):
    # Rayleigh quotient >= beta * max(uBu/uMu) when beta < 0
    top = eigsh(bmass_part, k=1, M=m, which="LA", return_eigenvectors=False)[0]
    return float(top)


def solve_matrices(stiffness, mass, bmass, bc, boundary, k=1, shift=None, tol=1e-8, maxiter=500):
    """Eigenpairs from pre-assembled matrices; vectors are full nodal vectors."""
    if k not in (1, 2):
        raise InvalidInput("k must be 1 or 2")
    a, m, idx = _system(stiffness, mass, bmass, bc, boundary)
    if not bc.is_dirichlet and bc.beta < 0.0:
        c = _lower_bound_shift(a, m, bmass.tocsc())
        sigma = bc.beta * c - 1.0
        lam, x = eigsh(a, k=k, M=m, sigma=sigma, which="LM")
        order = np.argsort(lam)
        lam, x = lam[order], x[:, order]
        res = float(np.max(_residuals(a, m, x, lam)))
        it = 0
        if res > tol:
            raise IterationDivergence(f"negative-beta solve stalled at residual {res:.3e}")
    else:
        sigma = 0.0 if shift is None else float(shift)
        lam, x, res, it = _subspace_iteration(a, m, k, sigma, tol, maxiter)
    norms = np.sqrt(np.einsum("ij,ij->j", x, m @ x))
    x = x / norms[None, :]
    if x[:, 0].sum() < 0.0:
        x[:, 0] = -x[:, 0]
    if idx is not None:
        full = np.zeros((stiffness.shape[0], x.shape[1]))
        full[idx] = x
        x = full
    return lam, x, res, it


def solve(mesh, bc, k=1, shift=None, tol=1e-8, maxiter=500, matrices=None):
    """First ``k`` eigenpairs of ``(K + beta B) u = lambda M u`` (Robin) or the
    interior-restricted ``K u = lambda M u`` (Dirichlet).

    ``shift`` is the spectral shift of the inverse iteration; pass ``0.9`` times
    a previous eigenvalue estimate to warm start.  ``u`` is normalised so that
    ``u^T M u = 1`` and is nonnegative.
    """
    if matrices is None:
        matrices = assemble(mesh)
    stiffness, mass, bmass = matrices
    lam, x, res, it = solve_matrices(
        stiffness, mass, bmass, bc, mesh.boundary_vertices, k=k, shift=shift, tol=tol, maxiter=maxiter
    )
    logger.debug("eigensolve %s: lambda1=%.10g residual=%.2e iters=%d", bc.label, lam[0], res, it)
    return EigenResult(
        lambda1=float(lam[0]),
        u=x[:, 0],
        residual=res,
        mesh_h=mesh.h_max,
        lambda2=float(lam[1]) if k == 2 else None,
        u2=x[:, 1] if k == 2 else None,
        iterations=it,
    )


def rayleigh(mesh, u, bc, matrices=None):
    """Discrete Rayleigh quotient; for Dirichlet the boundary values are dropped."""
    if matrices is None:
        matrices = assemble(mesh)
    stiffness, mass, bmass = matrices
    u = np.array(u, dtype=float)
    if bc.is_dirichlet:
        u[mesh.boundary_vertices] = 0.0
    den = float(u @ (mass @ u))
    if den <= 0.0:
        raise ZeroVector("Rayleigh quotient of the zero vector")
    num = float(u @ (stiffness @ u))
    if not bc.is_dirichlet:
        num += bc.beta * float(u @ (bmass @ u))
    return num / den


def trace_ratio(mesh, u, matrices=None):
    """``||u||^2_{L2(boundary)} / ||u||^2_{H1}``: a diagnostic for the trace inequality, not a bound."""
    if matrices is None:
        matrices = assemble(mesh)
    stiffness, mass, bmass = matrices
    u = np.asarray(u, dtype=float)
    den = float(u @ (stiffness @ u) + u @ (mass @ u))
    if den <= 0.0:
        raise ZeroVector("trace ratio of the zero vector")
    return float(u @ (bmass @ u)) / den
