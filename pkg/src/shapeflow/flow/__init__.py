from .checks import (
    AprioriReport,
    ContractionReport,
    EviReport,
    GmmReport,
    apriori_check,
    contraction_check,
    evi_residual,
    gmm_diagnostic,
)
from .config import GRADIENT_ASSISTED, NELDER_MEAD, FlowConfig, SlackModel, mesh_slack
from .engine import (
    FlowTrajectory,
    StepResult,
    euler_step,
    phi,
    run_flow,
    shape_eigenvalue,
)
from .space import ConvexSpace, RadialSpace, make_space

__all__ = [
    "GRADIENT_ASSISTED",
    "NELDER_MEAD",
    "AprioriReport",
    "ContractionReport",
    "ConvexSpace",
    "EviReport",
    "FlowConfig",
    "FlowTrajectory",
    "GmmReport",
    "RadialSpace",
    "SlackModel",
    "StepResult",
    "apriori_check",
    "contraction_check",
    "euler_step",
    "evi_residual",
    "gmm_diagnostic",
    "make_space",
    "mesh_slack",
    "phi",
    "run_flow",
    "shape_eigenvalue",
]
