"""Adaptive Frank-Wolfe with backtracking estimation of the smoothness constant."""

from .core import ContractError, IterateRecord, convex_combine, inner, norm2
from .oracles import (
    FeasibleSetSpec,
    L1Ball,
    L2Ball,
    LInfBall,
    NuclearBall,
    PowerIterConfig,
    Simplex,
    make_oracle,
    set_diameter,
)
from .solver import (
    AdaptiveConfig,
    Armijo,
    Decreasing,
    ExactLineSearch,
    Lipschitz,
    SolveResult,
    Status,
    adaptive_fw,
    classical_fw,
    duality_gap,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveConfig", "Armijo", "ContractError", "Decreasing", "ExactLineSearch",
    "FeasibleSetSpec", "IterateRecord", "L1Ball", "L2Ball", "LInfBall", "Lipschitz",
    "NuclearBall", "PowerIterConfig", "Simplex", "SolveResult", "Status",
    "adaptive_fw", "classical_fw", "convex_combine", "duality_gap", "inner",
    "make_oracle", "norm2", "set_diameter",
]
