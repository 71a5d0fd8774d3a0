"""Radial shooting oracle for the first eigenvalue of a disk.

Integrates ``u'' + u'/r + lambda u = 0`` from a power-series start near the
centre with classical RK4 and bisects ``lambda`` on the boundary residual.
No Bessel functions are involved, which keeps it independent of the checks
that use them.
"""

from functools import lru_cache

import numpy as np

from ..errors import BracketFailure, InvalidInput

_STEPS = 2000
_SERIES_TERMS = 12


def _series_start(lam, r0):
    # u = sum_k (-lam r^2/4)^k / (k!)^2, the regular solution with u(0) = 1
    u = 0.0
    du = 0.0
    term = 1.0
    z = -lam * r0 * r0 / 4.0
    for k in range(_SERIES_TERMS):
        u += term
        if k > 0:
            du += term * 2.0 * k / r0
        term *= z / ((k + 1) ** 2)
    return u, du


def shoot(lam, radius, steps=_STEPS):
    """Return ``(u(R), u'(R))`` for the regular radial solution with ``u(0) = 1``.

    ``lam`` may be an array; all values are integrated together.
    """
    lam = np.asarray(lam, dtype=float)
    r0 = radius * 5e-2
    u, v = _series_start(lam, r0)
    h = (radius - r0) / steps
    r = r0

    def rhs(r, u, v):
        return v, -v / r - lam * u

    for _ in range(steps):
        k1u, k1v = rhs(r, u, v)
        k2u, k2v = rhs(r + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v)
        k3u, k3v = rhs(r + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v)
        k4u, k4v = rhs(r + h, u + h * k3u, v + h * k3v)
        u = u + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
        v = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        r += h
    return u, v


def _residual(lam, radius, bc):
    u, v = shoot(lam, radius)
    if bc.is_dirichlet:
        return u
    return v + bc.beta * u


def disk_oracle(radius, bc, tol=1e-10):
    """First eigenvalue of the disk of the given radius, to ``tol`` absolute."""
    if radius <= 0.0:
        raise InvalidInput("radius must be positive")
    return _disk_oracle(float(radius), bc, float(tol))


@lru_cache(maxsize=256)
def _disk_oracle(radius, bc, tol):
    lo_lim, hi_lim = 1e-6, 400.0 / radius**2
    if not bc.is_dirichlet and bc.beta <= 0.0:
        # the first eigenvalue is then <= 0; it lies above -4 (|beta| + 1/R)^2
        lo_lim = -4.0 * (abs(bc.beta) + 1.0 / radius) ** 2
    grid = np.linspace(lo_lim, hi_lim, 401)
    f = _residual(grid, radius, bc)
    sign = np.sign(f)
    change = np.flatnonzero(sign[:-1] * sign[1:] <= 0)
    if change.size == 0:
        raise BracketFailure(f"no sign change in [{lo_lim:g}, {hi_lim:g}]")
    i = change[0]
    lo, hi = grid[i], grid[i + 1]
    flo = f[i]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = float(_residual(mid, radius, bc))
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)
