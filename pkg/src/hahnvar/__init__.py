"""Variational calculus on q-omega lattices.

Derivatives and integrals built from the difference quotient
(f(q*t + omega) - f(t)) / ((q - 1)*t + omega), plus higher-order
fixed-endpoint variational problems over them: functional evaluation,
first variations, Euler-Lagrange residual checks, limit-case (pure
dilation / pure shift) residuals, and a direct lattice minimizer.
"""

from .core import (
    DEFAULT_DEPTH,
    DEFAULT_MAX_TERMS,
    DEFAULT_TOL,
    GridFunction,
    HahnParams,
    Lattice,
    LatticePoint,
    OMEGA0_POINT,
    Origin,
    q_bracket,
    sigma_pow,
)
from .dsl import Expr, Lagrangian, compile_lagrangian, evaluate, parse, to_string
from .errors import (
    ArityError,
    ConfigError,
    DegenerateDenominator,
    DomainError,
    ExprSyntaxError,
    HahnvarError,
    InsufficientDepth,
    NonFiniteValue,
    NotAVariation,
    NotDifferentiable,
    UnboundVariable,
    UnknownIdentifier,
)
from .integrals import (
    SeriesResult,
    integral,
    integral_from_fixed,
    jackson_q_integral,
    norlund_sum,
    sigma_cell_integral,
)
from .minimize import MinimizeResult, minimize_direct
from .operators import (
    forward_h_difference,
    grid_derivative_at_fixed,
    hahn_derivative,
    hahn_derivative_n,
    iterated_quotient,
    jackson_q_derivative,
    norm_r_inf,
)
from .variational import (
    BoundaryViolation,
    ElReport,
    Problem,
    el_report,
    el_residual,
    first_variation,
    first_variation_fd,
    functional_value,
    h_el_residual,
    is_admissible,
    is_variation,
    materialize,
    q_el_residual,
    trajectory,
)

__version__ = "0.1.0"

__all__ = [
    "ArityError",
    "BoundaryViolation",
    "ConfigError",
    "DEFAULT_DEPTH",
    "DEFAULT_MAX_TERMS",
    "DEFAULT_TOL",
    "DegenerateDenominator",
    "DomainError",
    "ElReport",
    "Expr",
    "ExprSyntaxError",
    "GridFunction",
    "HahnParams",
    "HahnvarError",
    "InsufficientDepth",
    "Lagrangian",
    "Lattice",
    "LatticePoint",
    "MinimizeResult",
    "NonFiniteValue",
    "NotAVariation",
    "NotDifferentiable",
    "OMEGA0_POINT",
    "Origin",
    "Problem",
    "SeriesResult",
    "UnboundVariable",
    "UnknownIdentifier",
    "compile_lagrangian",
    "el_report",
    "el_residual",
    "evaluate",
    "first_variation",
    "first_variation_fd",
    "forward_h_difference",
    "functional_value",
    "grid_derivative_at_fixed",
    "h_el_residual",
    "hahn_derivative",
    "hahn_derivative_n",
    "integral",
    "integral_from_fixed",
    "is_admissible",
    "is_variation",
    "iterated_quotient",
    "jackson_q_derivative",
    "jackson_q_integral",
    "materialize",
    "minimize_direct",
    "norlund_sum",
    "norm_r_inf",
    "parse",
    "q_bracket",
    "q_el_residual",
    "sigma_cell_integral",
    "sigma_pow",
    "to_string",
    "trajectory",
]
