"""Exact tools for set families with divisible intersections."""

from .errors import (
    BudgetError,
    DivfamError,
    ModulusError,
    ParseError,
    ReductionError,
    ShapeError,
    SpecError,
    StructureError,
)
from .families import (
    ClosureReport,
    SetFamily,
    TwinDecomposition,
    is_k_closed,
    is_weakly_k_closed,
    power,
    product,
    project,
    reduce,
    twin_decomposition,
)
from .linalg import (
    ModMatrix,
    ModVector,
    SubspaceBasis,
    count_01_in_span,
    dim_span,
    hadamard,
    membership,
    norm,
    rref,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "ClosureReport",
    "DivfamError",
    "ModMatrix",
    "ModVector",
    "ModulusError",
    "ParseError",
    "ReductionError",
    "SetFamily",
    "ShapeError",
    "SpecError",
    "StructureError",
    "SubspaceBasis",
    "TwinDecomposition",
    "count_01_in_span",
    "dim_span",
    "hadamard",
    "is_k_closed",
    "is_weakly_k_closed",
    "membership",
    "norm",
    "power",
    "product",
    "project",
    "reduce",
    "rref",
    "twin_decomposition",
]
