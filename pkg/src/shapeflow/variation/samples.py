"""Seeded random shapes and fields for property runs."""

from __future__ import annotations

import numpy as np

from ..geometry.admissibility import AdmissibilityConfig, is_admissible
from ..geometry.shapes import ConvexBody, RadialDomain, polygon_to_support
from .fields import PerturbationField

__all__ = ["random_convex_body", "random_normal_field", "random_radial_domain"]


def random_radial_domain(
    rng: np.random.Generator,
    n_modes=8,
    amplitude=0.04,
    n_samples=256,
    admissibility: AdmissibilityConfig | None = None,
    max_tries=100,
) -> RadialDomain:
    """``eta = 1 + sum_k (a_k cos k theta + b_k sin k theta) / k`` with normal coefficients.

    Draws again until the domain is admissible (when a config is given).
    """
    k = np.arange(1, n_modes + 1)
    for _ in range(max_tries):
        c = rng.normal(0.0, amplitude, size=(2, n_modes)) / k
        coeffs = np.concatenate([[1.0], c.T.ravel()])
        dom = RadialDomain.from_fourier(coeffs, n_samples)
        if admissibility is None or is_admissible(dom, admissibility):
            return dom
    raise RuntimeError("could not draw an admissible domain")


def random_normal_field(rng: np.random.Generator, domain: RadialDomain, n_modes=4, spread=0.3) -> PerturbationField:
    th = domain.angles
    g = np.full(th.size, rng.uniform(0.5, 1.0))
    for k in range(1, n_modes + 1):
        g += rng.normal(0.0, spread) * np.cos(k * th + rng.uniform(0.0, 2.0 * np.pi))
    return PerturbationField(g)


def random_convex_body(rng: np.random.Generator, n_points=None, n_samples=256) -> ConvexBody:
    """Hull of points at random angles and radii, centred at its centroid."""
    m = int(rng.integers(5, 11)) if n_points is None else n_points
    phi = np.sort(rng.uniform(0.0, 2.0 * np.pi, m))
    r = rng.uniform(0.6, 1.4, m)
    pts = np.column_stack([r * np.cos(phi), r * np.sin(phi)])
    return polygon_to_support(pts, n_samples).centered()
