"""Boundary perturbation fields and the perturbed domains they generate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import AdmissibilityLost, InvalidInput
from ..geometry.admissibility import is_admissible
from ..geometry.shapes import RadialDomain, _samples_to_fourier, fourier_synthesis

__all__ = ["PerturbationField", "perturbed_domain", "perturbed_mesh"]


def _interp(samples, theta, derivative=0):
    return fourier_synthesis(_samples_to_fourier(np.asarray(samples, dtype=float)), theta, derivative)


def _frame(domain, theta):
    """Boundary point, unit tangent, outward normal and speed ``|x'(theta)|``."""
    eta = domain.evaluate(theta)
    d1 = domain.evaluate(theta, 1)
    c, s = np.cos(theta), np.sin(theta)
    x = np.column_stack([eta * c, eta * s])
    dx = np.column_stack([d1 * c - eta * s, d1 * s + eta * c])
    speed = np.hypot(dx[:, 0], dx[:, 1])
    tau = dx / speed[:, None]
    nu = np.column_stack([tau[:, 1], -tau[:, 0]])
    return x, tau, nu, speed


@dataclass(frozen=True, eq=False)
class PerturbationField:
    """Perturbation ``x -> x + t v + t^2/2 w`` given on the ``N`` boundary samples.

    ``normal`` holds ``v . nu``.  Without a ``tangential`` part the field is
    realised as the radial displacement ``(v . nu) |x'| / eta`` along
    ``e(theta)``, which has the prescribed normal component and keeps the
    perturbed domain radial.  ``w_normal`` is the normal part of the
    second-order field, realised the same way.
    """

    normal: np.ndarray
    tangential: np.ndarray | None = None
    w_normal: np.ndarray | None = None

    def __post_init__(self):
        for name in ("normal", "tangential", "w_normal"):
            v = getattr(self, name)
            if v is not None:
                arr = np.array(v, dtype=float)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)
        n = self.normal.size
        for name in ("tangential", "w_normal"):
            v = getattr(self, name)
            if v is not None and v.size != n:
                raise InvalidInput(f"{name} has {v.size} samples, expected {n}")

    @property
    def n_samples(self):
        return self.normal.size

    @classmethod
    def dilation(cls, domain):
        """``v(x) = x``: normal part ``eta^2 / |x'|``."""
        _, _, nu, _ = _frame(domain, domain.angles)
        x = domain.boundary_points()
        return cls(np.sum(x * nu, axis=1))

    @classmethod
    def translation(cls, domain, direction):
        _, tau, nu, _ = _frame(domain, domain.angles)
        e = np.asarray(direction, dtype=float)
        return cls(nu @ e, tangential=tau @ e)

    def scaled(self, factor):
        return PerturbationField(
            self.normal * factor,
            None if self.tangential is None else self.tangential * factor,
            self.w_normal,
        )

    def with_w(self, w_normal):
        return PerturbationField(self.normal, self.tangential, w_normal)

    def normal_at(self, theta):
        return _interp(self.normal, theta)

    def check(self, domain):
        if self.n_samples != domain.n_samples:
            raise InvalidInput("field and domain sample counts differ")

    def radial_displacement(self, domain, theta, samples=None):
        """Scalar ``(v . nu) |x'| / eta`` (radial realisation of a normal field)."""
        _, _, _, speed = _frame(domain, theta)
        g = _interp(self.normal if samples is None else samples, theta)
        return g * speed / domain.evaluate(theta)

    def displacement(self, domain, theta):
        """First-order boundary displacement ``V(theta)`` as ``(n, 2)`` vectors."""
        self.check(domain)
        if self.tangential is None:
            r = self.radial_displacement(domain, theta)
            return r[:, None] * np.column_stack([np.cos(theta), np.sin(theta)])
        _, tau, nu, _ = _frame(domain, theta)
        g = _interp(self.normal, theta)
        return g[:, None] * nu + _interp(self.tangential, theta)[:, None] * tau

    def second_displacement(self, domain, theta):
        if self.w_normal is None:
            return np.zeros((np.size(theta), 2))
        r = self.radial_displacement(domain, theta, self.w_normal)
        return r[:, None] * np.column_stack([np.cos(theta), np.sin(theta)])

    def norm_sq(self, domain):
        """``||v||^2_{W^{1,2}(boundary)}`` from the frame components of ``v``.

        Computed as the integral of ``g^2 + (d_s g)^2`` (plus the same for the
        tangential part) with respect to arclength.
        """
        self.check(domain)
        theta = domain.angles
        _, _, _, speed = _frame(domain, theta)
        comps = [self.normal] if self.tangential is None else [self.normal, self.tangential]
        total = 0.0
        d = 2.0 * np.pi / theta.size
        for c in comps:
            dc = _interp(c, theta, 1)
            total += float(np.sum(c**2 * speed + dc**2 / speed) * d)
        return total


def perturbed_domain(domain, field, t):
    """Radial function of ``Omega_t`` for fields without tangential part."""
    if field.tangential is not None:
        raise InvalidInput("only purely normal fields keep the domain radial")
    field.check(domain)
    theta = domain.angles
    eta = np.asarray(domain.samples) + t * field.radial_displacement(domain, theta)
    if field.w_normal is not None:
        eta = eta + 0.5 * t * t * field.radial_displacement(domain, theta, field.w_normal)
    if np.min(eta) <= 0.0:
        raise AdmissibilityLost("perturbed radial function is not positive")
    return RadialDomain.from_samples(eta)


def perturbed_mesh(template, domain, field, t, admissibility=None):
    """Template mesh of ``Omega_t``: the ray point of node ``(s, theta)`` moves to ``x + t V + t^2/2 W``."""
    theta = template.theta
    eta = domain.evaluate(theta)
    base = eta[:, None] * np.column_stack([np.cos(theta), np.sin(theta)])
    pts = base + t * field.displacement(domain, theta)
    if field.w_normal is not None:
        pts = pts + 0.5 * t * t * field.second_displacement(domain, theta)
    mesh = template.mesh_from_points(template.place(pts))
    if np.min(mesh.signed_areas()) <= 0.0:
        raise AdmissibilityLost(f"perturbation at t={t:g} inverts mesh triangles")
    if admissibility is not None and field.tangential is None:
        if not is_admissible(perturbed_domain(domain, field, t), admissibility):
            raise AdmissibilityLost(f"perturbed domain at t={t:g} leaves the admissible class")
    return mesh
