"""JSON shape files: ``{kind, n_samples, fourier?, samples}``."""

import json

import numpy as np

from ..errors import InvalidInput
from .shapes import ConvexBody, RadialDomain


def shape_to_dict(shape):
    if isinstance(shape, RadialDomain):
        return {
            "kind": "radial",
            "n_samples": int(shape.n_samples),
            "fourier": [float(c) for c in shape.fourier],
            "samples": [float(v) for v in shape.samples],
        }
    if isinstance(shape, ConvexBody):
        return {
            "kind": "support",
            "n_samples": int(shape.n_samples),
            "samples": [float(v) for v in shape.support],
        }
    raise InvalidInput(f"not a shape: {type(shape).__name__}")


def shape_from_dict(data):
    try:
        kind = data["kind"]
        samples = np.asarray(data["samples"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed shape record: {exc}") from exc
    if "n_samples" in data and int(data["n_samples"]) != samples.size:
        raise InvalidInput("n_samples does not match the sample list")
    if kind == "radial":
        if data.get("fourier") is not None:
            return RadialDomain(np.asarray(data["fourier"], dtype=float), samples)
        return RadialDomain.from_samples(samples)
    if kind == "support":
        return ConvexBody(samples)
    raise InvalidInput(f"unknown shape kind {kind!r}")


def save_shape(shape, path):
    with open(path, "w") as fh:
        json.dump(shape_to_dict(shape), fh, indent=1)


def load_shape(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"{path}: {exc}") from exc
    return shape_from_dict(data)
