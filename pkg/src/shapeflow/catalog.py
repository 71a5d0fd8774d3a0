"""Named shapes: ``disk``, ``ellipse(a,b)``, ``square``, ``rot-square``, ``perturbed-ball(k,amp)``, or a JSON file."""

from __future__ import annotations

import math
import os
import re

import numpy as np

from .eigen.oracle import disk_oracle
from .errors import InvalidInput
from .geometry.io import load_shape
from .geometry.shapes import (
    ConvexBody,
    RadialDomain,
    polygon_to_support,
    rescale_to_area,
)

__all__ = ["CATALOG", "CONVEX", "RADIAL", "ellipse_radial", "make_shape", "perturbed_ball", "shape_oracle"]

RADIAL, CONVEX = "radial", "convex"
CATALOG = ("disk", "ellipse", "square", "rot-square", "perturbed-ball")
_ALIASES = {"ball": "disk", "square-rot45": "rot-square", "rotsquare": "rot-square"}
_SPEC = re.compile(r"^\s*([a-z][a-z0-9-]*)\s*(?:\((.*)\))?\s*$")


def perturbed_ball(k=2, amplitude=0.3, n_samples=256, area_target=None) -> RadialDomain:
    """``eta = 1 + amplitude cos(k theta)``, optionally rescaled to a given area."""
    dom = RadialDomain.from_function(lambda t: 1.0 + amplitude * np.cos(k * t), n_samples)
    return rescale_to_area(dom, area_target) if area_target else dom


def ellipse_radial(a, b, n_samples=256) -> RadialDomain:
    return RadialDomain.from_function(lambda t: a * b / np.sqrt((b * np.cos(t)) ** 2 + (a * np.sin(t)) ** 2), n_samples)


def _square(side, rotation, n_samples):
    c = 0.5 * side * math.sqrt(2.0)
    phi = rotation + np.pi / 4.0 + np.arange(4) * np.pi / 2.0
    return polygon_to_support(np.column_stack([c * np.cos(phi), c * np.sin(phi)]), n_samples)


def _parse(spec):
    m = _SPEC.match(spec.lower())
    if not m:
        raise InvalidInput(f"cannot parse shape {spec!r}")
    name = _ALIASES.get(m.group(1), m.group(1))
    args = []
    if m.group(2) is not None and m.group(2).strip():
        try:
            args = [float(x) for x in m.group(2).split(",")]
        except ValueError as exc:
            raise InvalidInput(f"non-numeric argument in shape {spec!r}") from exc
    return name, args


def _arity(name, args, lo, hi):
    if not lo <= len(args) <= hi:
        raise InvalidInput(f"{name} takes {lo}..{hi} arguments, got {len(args)}")


def make_shape(spec: str, kind: str | None = None, n_samples=256):
    """Build a catalog shape (or load a JSON shape file) of the requested kind.

    ``kind=None`` picks the natural kind: convex for the squares, radial
    otherwise.  Squares have unit side length by default.
    """
    if kind not in (None, RADIAL, CONVEX):
        raise InvalidInput(f"unknown shape kind {kind!r}")
    if spec.endswith(".json") or os.path.sep in spec:
        shape = load_shape(spec)
        got = RADIAL if isinstance(shape, RadialDomain) else CONVEX
        if kind is not None and kind != got:
            raise InvalidInput(f"{spec} holds a {got} shape, expected {kind}")
        return shape
    name, args = _parse(spec)
    if name == "disk":
        _arity(name, args, 0, 1)
        r = args[0] if args else 1.0
        return ConvexBody.ball(r, n_samples=n_samples) if kind == CONVEX else RadialDomain.disk(r, n_samples)
    if name == "ellipse":
        _arity(name, args, 2, 2)
        a, b = args
        return ConvexBody.ellipse(a, b, n_samples) if kind == CONVEX else ellipse_radial(a, b, n_samples)
    if name in ("square", "rot-square"):
        _arity(name, args, 0, 1)
        if kind == RADIAL:
            raise InvalidInput(f"{name} has corners; it is only available as a convex body")
        rot = np.pi / 4.0 if name == "rot-square" else 0.0
        return _square(args[0] if args else 1.0, rot, n_samples)
    if name == "perturbed-ball":
        _arity(name, args, 2, 2)
        if kind == CONVEX:
            raise InvalidInput("perturbed-ball is only available as a radial domain")
        k, amp = args
        if k != int(k) or k < 1:
            raise InvalidInput("perturbed-ball mode must be a positive integer")
        return perturbed_ball(int(k), amp, n_samples)
    raise InvalidInput(f"unknown shape {name!r}; choose from {', '.join(CATALOG)} or a .json file")


def shape_oracle(spec: str, bc) -> float | None:
    """Exact first eigenvalue where one is known: disks (radial shooting) and Dirichlet squares."""
    if spec.endswith(".json") or os.path.sep in spec:
        return None
    name, args = _parse(spec)
    if name == "disk":
        return disk_oracle(args[0] if args else 1.0, bc)
    if name in ("square", "rot-square") and bc.is_dirichlet:
        side = args[0] if args else 1.0
        return 2.0 * np.pi**2 / side**2
    return None
