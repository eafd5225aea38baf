"""Delta/nabla calculus of variations on finite time scales.

Exact derivatives and integrals on finite time scales, the duality between
delta and nabla calculi, and checks of trajectories against the nabla
Euler-Lagrange equation, Noether conserved quantities and the
DuBois-Reymond condition.
"""

__version__ = "0.1.0"

from .calculus import (  # noqa: E402
    GridFunction,
    compose_rho,
    compose_sigma,
    cumulative_delta_integral,
    cumulative_nabla_integral,
    delta_derivative,
    delta_integral,
    dual_function,
    nabla_derivative,
    nabla_integral,
    sample,
)
from .lagrangian import Lagrangian, dual_lagrangian, parse  # noqa: E402
from .search import (  # noqa: E402
    DerivativeAlphabet,
    classify,
    enumerate_candidates,
    reconstruct,
    solve_el_newton,
)
from .timescale import TimeScale, from_points, qscale, uniform  # noqa: E402
from .variational import (  # noqa: E402
    ConstancyReport,
    DBRReport,
    SymmetryGenerators,
    VariationalProblem,
    dbr_residual_delta,
    dbr_residual_nabla,
    dual_problem,
    el_residual_delta,
    el_residual_nabla,
    evaluate_functional,
    invariance_check_numeric,
    invariance_residual,
    noether_quantity_delta,
    noether_quantity_nabla,
)
