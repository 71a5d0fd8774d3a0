from .convexity import (
    BrunnMinkowskiReport,
    ConvexityReport,
    alpha_convexity_check,
    brunn_minkowski_check,
    chord_margins,
    general_sigma_check,
    sigma_margins,
)
from .fields import PerturbationField, perturbed_domain, perturbed_mesh
from .first import (
    SecondVariationReport,
    finite_diff_variation,
    first_variation,
    second_variation_bound,
)
from .negbeta import NegBetaReport, negbeta_demo, sawtooth_domain
from .samples import random_convex_body, random_normal_field, random_radial_domain

__all__ = [
    "BrunnMinkowskiReport",
    "ConvexityReport",
    "NegBetaReport",
    "PerturbationField",
    "SecondVariationReport",
    "alpha_convexity_check",
    "brunn_minkowski_check",
    "chord_margins",
    "finite_diff_variation",
    "first_variation",
    "general_sigma_check",
    "negbeta_demo",
    "perturbed_domain",
    "perturbed_mesh",
    "random_convex_body",
    "random_normal_field",
    "random_radial_domain",
    "sawtooth_domain",
    "second_variation_bound",
    "sigma_margins",
]
