from .fem import assemble, element_gradients
from .oracle import disk_oracle
from .shape_gradient import vertex_gradient
from .solver import (
    DIRICHLET,
    ROBIN,
    BoundaryCondition,
    EigenResult,
    rayleigh,
    solve,
    solve_matrices,
    trace_ratio,
)

__all__ = [
    "DIRICHLET",
    "ROBIN",
    "BoundaryCondition",
    "EigenResult",
    "assemble",
    "disk_oracle",
    "element_gradients",
    "rayleigh",
    "solve",
    "solve_matrices",
    "trace_ratio",
    "vertex_gradient",
]
