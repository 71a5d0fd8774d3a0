"""Star-shaped radial domains and convex bodies on the unit circle.

Both shape kinds are stored through their values at ``N`` uniform angles
``theta_i = 2*pi*i/N``.  A :class:`RadialDomain` additionally carries the real
Fourier coefficients of its radial function, laid out as
``(a0, a1..aK, b1..bK)``.  A :class:`ConvexBody` is encoded by its support
function; geometrically it is the circumscribed polygon whose facet normals are
the sample directions, which is exact for polygons with those normals and
second-order accurate otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from ..errors import InvalidInput, OriginNotInterior

__all__ = [
    "ConvexBody",
    "RadialDomain",
    "angles",
    "area",
    "boundary_curvature",
    "minkowski_combine",
    "perimeter",
    "polygon_to_support",
    "radial_interpolate",
    "radial_values",
    "rescale_to_area",
    "support_to_radial",
]

_CHUNK = 2048


def angles(n):
    return 2.0 * np.pi * np.arange(n) / n


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _split(coeffs):
    coeffs = np.asarray(coeffs, dtype=float)
    k = (coeffs.size - 1) // 2
    return coeffs[0], coeffs[1 : k + 1], coeffs[k + 1 :]


def fourier_synthesis(coeffs, theta, derivative=0):
    """Evaluate ``a0 + sum a_k cos k t + b_k sin k t`` (or a derivative) at ``theta``."""
    a0, a, b = _split(coeffs)
    theta = np.asarray(theta, dtype=float)
    flat = theta.ravel()
    out = np.empty_like(flat)
    k = np.arange(1, a.size + 1, dtype=float)
    for start in range(0, flat.size, _CHUNK):
        t = flat[start : start + _CHUNK]
        kt = np.outer(t, k)
        c, s = np.cos(kt), np.sin(kt)
        if derivative == 0:
            out[start : start + _CHUNK] = a0 + c @ a + s @ b
        elif derivative == 1:
            out[start : start + _CHUNK] = s @ (-k * a) + c @ (k * b)
        elif derivative == 2:
            out[start : start + _CHUNK] = -(c @ (k**2 * a) + s @ (k**2 * b))
        else:
            raise InvalidInput("derivative order must be 0, 1 or 2")
    return out.reshape(theta.shape)


def _samples_to_fourier(samples):
    n = samples.size
    spec = np.fft.rfft(samples)
    kmax = n // 2
    a = 2.0 * spec.real[1:] / n
    b = -2.0 * spec.imag[1:] / n
    if n % 2 == 0:
        # Nyquist mode carries no sine part and half weight
        a[-1] = spec.real[kmax] / n
        b[-1] = 0.0
    return np.concatenate([[spec.real[0] / n], a, b])


def _fourier_to_samples(coeffs, n):
    a0, a, b = _split(coeffs)
    k = a.size
    spec = np.zeros(n // 2 + 1, dtype=complex)
    spec[0] = n * a0
    spec[1 : k + 1] = 0.5 * n * (a - 1j * b)
    if n % 2 == 0 and k == n // 2:
        spec[k] = n * a[-1]
    return np.fft.irfft(spec, n=n)


def _spectral_derivative(samples, order):
    n = samples.size
    spec = np.fft.rfft(samples)
    k = np.arange(spec.size, dtype=float)
    spec = spec * (1j * k) ** order
    if n % 2 == 0 and order % 2 == 1:
        spec[-1] = 0.0
    return np.fft.irfft(spec, n=n)


@dataclass(frozen=True, eq=False)
class RadialDomain:
    """Star-shaped domain ``{r e(theta) : 0 <= r < eta(theta)}`` about the origin.

    Use :meth:`from_fourier` or :meth:`from_samples` rather than the raw
    constructor; the constructor only validates that ``samples`` is the
    Fourier synthesis of ``fourier`` on the uniform grid.
    """

    fourier: np.ndarray
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "fourier", _frozen(self.fourier))
        object.__setattr__(self, "samples", _frozen(self.samples))
        if self.fourier.ndim != 1 or self.fourier.size % 2 != 1:
            raise InvalidInput("fourier vector must have odd length 2K+1")
        n = self.samples.size
        if n < 8:
            raise InvalidInput("need at least 8 samples")
        if 2 * self.n_modes > n:
            raise InvalidInput("more Fourier modes than the sample grid resolves")
        if not np.all(np.isfinite(self.samples)):
            raise InvalidInput("non-finite radial samples")
        if np.min(self.samples) <= 0.0:
            raise InvalidInput("radial function must be positive")
        synth = _fourier_to_samples(self.fourier, n)
        scale = 1.0 + np.max(np.abs(self.samples))
        if np.max(np.abs(synth - self.samples)) > 1e-10 * scale:
            raise InvalidInput("samples are not the Fourier synthesis of the coefficients")

    @classmethod
    def from_fourier(cls, coeffs, n_samples=256):
        coeffs = np.asarray(coeffs, dtype=float)
        if 2 * ((coeffs.size - 1) // 2) >= n_samples:
            raise InvalidInput("need n_samples > 2K for a band-limited domain")
        return cls(coeffs, _fourier_to_samples(coeffs, n_samples))

    @classmethod
    def from_samples(cls, samples):
        samples = np.asarray(samples, dtype=float)
        return cls(_samples_to_fourier(samples), samples)

    @classmethod
    def from_function(cls, fn, n_samples=256):
        return cls.from_samples(fn(angles(n_samples)))

    @classmethod
    def disk(cls, radius=1.0, n_samples=256, n_modes=0):
        coeffs = np.zeros(2 * n_modes + 1)
        coeffs[0] = radius
        return cls.from_fourier(coeffs, n_samples)

    @property
    def n_samples(self):
        return self.samples.size

    @property
    def n_modes(self):
        return (self.fourier.size - 1) // 2

    @property
    def angles(self):
        return angles(self.n_samples)

    def evaluate(self, theta, derivative=0):
        return fourier_synthesis(self.fourier, theta, derivative)

    def derivative_samples(self, order=1):
        return _spectral_derivative(np.asarray(self.samples), order)

    def with_modes(self, n_modes):
        """Truncate or zero-pad the Fourier vector to ``n_modes`` modes."""
        a0, a, b = _split(self.fourier)
        k = min(n_modes, a.size)
        coeffs = np.zeros(2 * n_modes + 1)
        coeffs[0] = a0
        coeffs[1 : k + 1] = a[:k]
        coeffs[n_modes + 1 : n_modes + 1 + k] = b[:k]
        if 2 * n_modes >= self.n_samples:
            raise InvalidInput("too many modes for the sample grid")
        return RadialDomain.from_fourier(coeffs, self.n_samples)

    def resample(self, n_samples):
        """Same radial function sampled on a different uniform grid."""
        if 2 * self.n_modes < n_samples:
            return RadialDomain.from_fourier(self.fourier, n_samples)
        return RadialDomain.from_samples(self.evaluate(angles(n_samples)))

    def scaled(self, factor):
        return RadialDomain(self.fourier * factor, self.samples * factor)

    def boundary_points(self, theta=None):
        theta = self.angles if theta is None else np.asarray(theta, dtype=float)
        r = self.evaluate(theta)
        return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """Convex body given by its support function at ``N`` uniform normal angles."""

    support: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "support", _frozen(self.support))
        n = self.support.size
        if self.support.ndim != 1 or n < 64 or n % 2:
            raise InvalidInput("support needs an even number (>= 64) of samples")
        if not np.all(np.isfinite(self.support)):
            raise InvalidInput("non-finite support values")
        tol = 1e-10 * (1.0 + np.max(np.abs(self.support)))
        if np.min(self.facet_lengths()) < -tol:
            raise InvalidInput("support samples violate discrete convexity")

    @property
    def n_samples(self):
        return self.support.size

    @property
    def angles(self):
        return angles(self.n_samples)

    @classmethod
    def ball(cls, radius=1.0, center=(0.0, 0.0), n_samples=256):
        t = angles(n_samples)
        return cls(radius + center[0] * np.cos(t) + center[1] * np.sin(t))

    @classmethod
    def ellipse(cls, a, b, n_samples=256, rotation=0.0):
        t = angles(n_samples) - rotation
        return cls(np.sqrt((a * np.cos(t)) ** 2 + (b * np.sin(t)) ** 2))

    def facet_lengths(self):
        """Edge lengths of the circumscribed polygon (the discrete convexity certificate)."""
        rho = np.asarray(self.support)
        d = 2.0 * np.pi / rho.size
        return (np.roll(rho, 1) + np.roll(rho, -1) - 2.0 * rho * np.cos(d)) / np.sin(d)

    def vertices(self):
        """Polygon vertex shared by facets ``i`` and ``i+1``, for each ``i``."""
        rho = np.asarray(self.support)
        t = self.angles
        d = 2.0 * np.pi / rho.size
        rho1 = np.roll(rho, -1)
        t1 = np.roll(t, -1)
        x = (rho * np.sin(t1) - rho1 * np.sin(t)) / np.sin(d)
        y = (rho1 * np.cos(t) - rho * np.cos(t1)) / np.sin(d)
        return np.column_stack([x, y])

    def centroid(self):
        v = self.vertices()
        x, y = v[:, 0], v[:, 1]
        x1, y1 = np.roll(x, -1), np.roll(y, -1)
        cross = x * y1 - x1 * y
        a = 0.5 * cross.sum()
        if a <= 0.0:
            return v.mean(axis=0)
        return np.array([((x + x1) * cross).sum(), ((y + y1) * cross).sum()]) / (6.0 * a)

    def translated(self, shift):
        t = self.angles
        return ConvexBody(self.support + shift[0] * np.cos(t) + shift[1] * np.sin(t))

    def centered(self):
        return self.translated(-self.centroid())

    def scaled(self, factor):
        return ConvexBody(self.support * factor)

    def radial_function(self, phi, return_facet=False):
        """Distance from the origin to the boundary along direction ``phi``.

        The origin must be interior (all support values positive).
        """
        rho = np.asarray(self.support)
        if np.min(rho) <= 0.0:
            raise OriginNotInterior("origin is not interior to the convex body")
        phi = np.asarray(phi, dtype=float)
        flat = phi.ravel()
        t = self.angles
        out = np.empty_like(flat)
        idx = np.empty(flat.size, dtype=int)
        for start in range(0, flat.size, _CHUNK):
            c = np.cos(flat[start : start + _CHUNK, None] - t[None, :])
            with np.errstate(divide="ignore"):
                ratio = np.where(c > 1e-12, rho[None, :] / np.where(c > 1e-12, c, 1.0), np.inf)
            j = np.argmin(ratio, axis=1)
            idx[start : start + _CHUNK] = j
            out[start : start + _CHUNK] = ratio[np.arange(j.size), j]
        if return_facet:
            return out.reshape(phi.shape), idx.reshape(phi.shape)
        return out.reshape(phi.shape)


def radial_values(shape, phi, derivative=0):
    """Radial function of either shape kind at angles ``phi``."""
    if isinstance(shape, RadialDomain):
        return shape.evaluate(phi, derivative)
    if isinstance(shape, ConvexBody):
        if derivative:
            raise InvalidInput("convex bodies expose only radial values")
        return shape.radial_function(phi)
    raise InvalidInput(f"not a shape: {type(shape).__name__}")


def polygon_to_support(vertices, n_samples=256):
    """Support function of the convex hull of ``vertices`` at uniform angles."""
    pts = np.asarray(vertices, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise InvalidInput("empty vertex list")
    if pts.shape[0] >= 3:
        try:
            pts = pts[ConvexHull(pts).vertices]
        except QhullError:
            pass  # collinear or repeated points: the raw maximum is the same
    t = angles(n_samples)
    u = np.column_stack([np.cos(t), np.sin(t)])
    return ConvexBody(np.max(u @ pts.T, axis=1))


def minkowski_combine(k0, k1, t):
    if k0.n_samples != k1.n_samples:
        raise InvalidInput("support samples differ in resolution")
    if not 0.0 <= t <= 1.0:
        raise InvalidInput("t must lie in [0, 1]")
    return ConvexBody((1.0 - t) * k0.support + t * k1.support)


def radial_interpolate(eta0, eta1, t):
    if eta0.n_samples != eta1.n_samples:
        raise InvalidInput("radial domains differ in resolution")
    if eta0.n_modes != eta1.n_modes:
        return RadialDomain.from_samples((1.0 - t) * eta0.samples + t * eta1.samples)
    return RadialDomain(
        (1.0 - t) * eta0.fourier + t * eta1.fourier,
        (1.0 - t) * eta0.samples + t * eta1.samples,
    )


def area(shape):
    if isinstance(shape, RadialDomain):
        eta = np.asarray(shape.samples)
        return 0.5 * np.sum(eta**2) * 2.0 * np.pi / eta.size
    if isinstance(shape, ConvexBody):
        return 0.5 * float(np.sum(shape.support * shape.facet_lengths()))
    raise InvalidInput(f"not a shape: {type(shape).__name__}")


def perimeter(shape):
    if isinstance(shape, RadialDomain):
        eta = np.asarray(shape.samples)
        d = shape.derivative_samples(1)
        return float(np.sum(np.sqrt(eta**2 + d**2)) * 2.0 * np.pi / eta.size)
    if isinstance(shape, ConvexBody):
        return float(np.sum(shape.support) * 2.0 * np.pi / shape.n_samples)
    raise InvalidInput(f"not a shape: {type(shape).__name__}")


def diameter(shape):
    """Largest distance between two boundary points (``4N`` rays)."""
    phi = angles(4 * shape.n_samples)
    r = radial_values(shape, phi)
    pts = np.column_stack([r * np.cos(phi), r * np.sin(phi)])
    return float(pdist(pts).max())


def curvature_formula(eta, d1, d2):
    return (eta**2 + 2.0 * d1**2 - eta * d2) / (eta**2 + d1**2) ** 1.5


def boundary_curvature(domain, theta=None):
    """Signed curvature of the boundary curve; equals the mean curvature in 2D."""
    if theta is None:
        eta = np.asarray(domain.samples)
        d1 = domain.derivative_samples(1)
        d2 = domain.derivative_samples(2)
    else:
        eta = domain.evaluate(theta)
        d1 = domain.evaluate(theta, 1)
        d2 = domain.evaluate(theta, 2)
    return curvature_formula(eta, d1, d2)


def rescale_to_area(domain, target):
    current = area(domain)
    if current <= 0.0:
        raise InvalidInput("domain has no area")
    return domain.scaled(np.sqrt(target / current))


def support_to_radial(body, n_samples=None):
    """Polar graph of the circumscribed polygon of ``body``."""
    if np.min(body.support) <= 0.0:
        raise OriginNotInterior("origin is not interior to the convex body")
    n = body.n_samples if n_samples is None else n_samples
    return RadialDomain.from_samples(body.radial_function(angles(n)))
