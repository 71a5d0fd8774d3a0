"""Admissible shape classes: inradius, discrete C2 bound, volume cap, container."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInput
from .shapes import ConvexBody, RadialDomain, angles, area

__all__ = ["AdmissibilityConfig", "AdmissibilityReport", "is_admissible", "second_difference_bound"]


@dataclass(frozen=True)
class AdmissibilityConfig:
    r_min: float = 0.4
    c2_bound: float = 25.0
    volume_cap: float = np.inf
    container: float = 3.0
    # cone parameter is carried for reporting only; nothing certifies it
    eps: float | None = None

    def __post_init__(self):
        if not 0.0 < self.r_min <= self.c2_bound:
            raise InvalidInput("need 0 < r_min <= c2_bound")
        if np.pi * self.r_min**2 > self.volume_cap:
            raise InvalidInput("volume cap excludes the inner ball")
        if self.container < self.r_min:
            raise InvalidInput("container smaller than the inner ball")


@dataclass
class AdmissibilityReport:
    ok: bool
    violations: list = field(default_factory=list)
    values: dict = field(default_factory=dict)

    @property
    def binding(self):
        """The first violated constraint, or the tightest one when admissible."""
        if self.violations:
            return self.violations[0]
        return min(self.values, key=lambda k: self.values[k]["margin"]) if self.values else None

    def __bool__(self):
        return self.ok


def second_difference_bound(samples):
    eta = np.asarray(samples)
    d = 2.0 * np.pi / eta.size
    return float(np.max(np.abs(np.roll(eta, -1) - 2.0 * eta + np.roll(eta, 1))) / d**2)


def _entry(report, name, value, limit, upper):
    margin = (limit - value) if upper else (value - limit)
    report.values[name] = {"value": float(value), "limit": float(limit), "margin": float(margin)}
    if margin < 0.0:
        report.violations.append(name)


def is_admissible(shape, cfg):
    """Check every constraint of ``cfg``; never raises for a valid shape."""
    report = AdmissibilityReport(ok=True)
    if isinstance(shape, RadialDomain):
        # inradius test is on a 4x oversampled grid so off-sample dips count
        r = shape.evaluate(angles(4 * shape.n_samples))
        _entry(report, "inradius", float(r.min()), cfg.r_min, upper=False)
        _entry(report, "c2", second_difference_bound(shape.samples), cfg.c2_bound, upper=True)
        _entry(report, "volume", area(shape), cfg.volume_cap, upper=True)
        _entry(report, "container", float(r.max()), cfg.container, upper=True)
    elif isinstance(shape, ConvexBody):
        rho = np.asarray(shape.support)
        _entry(report, "origin", float(rho.min()), 0.0, upper=False)
        if rho.min() > 0.0:
            r = shape.radial_function(angles(4 * shape.n_samples))
            _entry(report, "inradius", float(r.min()), cfg.r_min, upper=False)
            _entry(report, "container", float(r.max()), cfg.container, upper=True)
        _entry(report, "volume", area(shape), cfg.volume_cap, upper=True)
    else:
        raise InvalidInput(f"not a shape: {type(shape).__name__}")
    # the volume cap may be infinite; keep margins finite for reporting
    for v in report.values.values():
        if not np.isfinite(v["margin"]):
            v["margin"] = float(np.finfo(float).max)
    report.ok = not report.violations
    return report
