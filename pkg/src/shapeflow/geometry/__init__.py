from .admissibility import AdmissibilityConfig, AdmissibilityReport, is_admissible
from .io import load_shape, save_shape, shape_from_dict, shape_to_dict
from .metrics import MetricKind, char_distance_raster, distance
from .shapes import (
    ConvexBody,
    RadialDomain,
    angles,
    area,
    boundary_curvature,
    diameter,
    minkowski_combine,
    perimeter,
    polygon_to_support,
    radial_interpolate,
    radial_values,
    rescale_to_area,
    support_to_radial,
)

__all__ = [
    "AdmissibilityConfig",
    "AdmissibilityReport",
    "ConvexBody",
    "MetricKind",
    "RadialDomain",
    "angles",
    "area",
    "boundary_curvature",
    "char_distance_raster",
    "diameter",
    "distance",
    "is_admissible",
    "load_shape",
    "minkowski_combine",
    "perimeter",
    "polygon_to_support",
    "radial_interpolate",
    "radial_values",
    "rescale_to_area",
    "save_shape",
    "shape_from_dict",
    "shape_to_dict",
    "support_to_radial",
]
