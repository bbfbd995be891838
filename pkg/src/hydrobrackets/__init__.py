"""Exact verification and simulation toolkit for nonlocal Poisson brackets
of hydrodynamic type and their bi-Hamiltonian hierarchies.

The symbolic core is exact (rational arithmetic throughout); floating
point appears only in the pseudo-spectral simulator.
"""

from .expr import (
    Expr,
    ParseError,
    Zeroness,
    differentiate,
    evaluate,
    is_zero,
    parse,
)
from .geometry import (
    ContravariantMetric,
    CovariantMetric,
    canonical_metric,
    christoffel,
    constant_curvature_residual,
    invert_metric,
    riemann,
)
from .bracket import (
    CanonicalPair,
    ConstantBracket,
    HydroBracket,
    LiouvilleData,
    PoissonReport,
    build_canonical,
    check_canonical_equations,
    check_compat_constant,
    check_pencil,
    check_poisson,
    equivalence_audit,
    functional_bracket_density,
    is_total_x_derivative,
    liouville_function,
    special_liouville,
)
from .hierarchy import (
    ConservativeFlow,
    HamiltonianDensity,
    apply_recursion,
    bihamiltonian_check,
    commute_check,
    flow_t1,
    flow_t2,
    hierarchy,
    involution_check,
    translation_flow,
)

__version__ = "0.1.0"

__all__ = [
    "Expr",
    "ParseError",
    "Zeroness",
    "differentiate",
    "evaluate",
    "is_zero",
    "parse",
    "ContravariantMetric",
    "CovariantMetric",
    "canonical_metric",
    "christoffel",
    "constant_curvature_residual",
    "invert_metric",
    "riemann",
    "CanonicalPair",
    "ConstantBracket",
    "HydroBracket",
    "LiouvilleData",
    "PoissonReport",
    "build_canonical",
    "check_canonical_equations",
    "check_compat_constant",
    "check_pencil",
    "check_poisson",
    "equivalence_audit",
    "functional_bracket_density",
    "is_total_x_derivative",
    "liouville_function",
    "special_liouville",
    "ConservativeFlow",
    "HamiltonianDensity",
    "apply_recursion",
    "bihamiltonian_check",
    "commute_check",
    "flow_t1",
    "flow_t2",
    "hierarchy",
    "involution_check",
    "translation_flow",
]
