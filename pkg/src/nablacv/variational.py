"""Variational problems on finite time scales and the conditions checked on them.

A nabla problem minimises ``sum over t in (a, b] of nu(t) * L(t, q(rho t), q_nabla(t))``;
a delta problem minimises ``sum over t in [a, b) of mu(t) * L(t, q(sigma t), q_delta(t))``.
The two are exchanged by :func:`dual_problem`.

Every check returns a report rather than raising on failure. "Constant"
means ``spread <= tol * (1 + |mean|)`` per component, ``tol = 1e-9`` by
default.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from . import expr as _expr
from .calculus import (
    GridFunction,
    cumulative_delta_integral,
    cumulative_nabla_integral,
    delta_derivative,
    delta_integral,
    nabla_derivative,
    nabla_integral,
)
from .errors import DimensionMismatch, NotInScale, NotMonotone, TooSmall, WrongFlavor
from .lagrangian import Lagrangian, dual_lagrangian, partials_along
from .timescale import TimeScale

NABLA = "nabla"
DELTA = "delta"
DEFAULT_TOL = 1e-9
BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class VariationalProblem:
    scale: TimeScale
    a: float
    b: float
    lagrangian: Lagrangian
    A: Tuple[float, ...]
    B: Tuple[float, ...]
    flavor: str = NABLA

    def __post_init__(self):
        if self.flavor not in (NABLA, DELTA):
            raise ValueError(f"flavor must be 'nabla' or 'delta', got {self.flavor!r}")
        if len(self.scale) < 3:
            raise TooSmall("a variational problem needs a time scale with at least three points")
        # snap the endpoints onto the stored points
        object.__setattr__(self, "a", float(self.scale.points[self.scale.index(self.a)]))
        object.__setattr__(self, "b", float(self.scale.points[self.scale.index(self.b)]))
        if not self.a < self.b:
            raise ValueError(f"need a < b, got a={self.a!r}, b={self.b!r}")
        A = tuple(float(x) for x in np.atleast_1d(self.A))
        B = tuple(float(x) for x in np.atleast_1d(self.B))
        n = self.lagrangian.n
        if len(A) != n or len(B) != n:
            raise DimensionMismatch(f"boundary values must have {n} component(s)")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.lagrangian.n

    @property
    def interval(self) -> TimeScale:
        """The points of the scale in ``[a, b]``."""
        return self.scale.restrict(self.a, self.b)

    def boundary_defect(self, q: GridFunction) -> float:
        q = on_interval(self, q)
        v = q.values
        return float(max(np.max(np.abs(v[0] - self.A)), np.max(np.abs(v[-1] - self.B))))

    def is_feasible(self, q: GridFunction, tol: float = BOUNDARY_TOL) -> bool:
        return self.boundary_defect(q) <= tol


@dataclass(frozen=True)
class SymmetryGenerators:
    """First-order generators ``tau(t, q)`` and ``xi(t, q)`` of a transformation family
    ``t -> t + eps * tau``, ``q -> q + eps * xi``."""

    tau: _expr.Node
    xi: Tuple[_expr.Node, ...]
    n: int

    @classmethod
    def parse(cls, tau: str, xi: Sequence[str] | str, n: int = 1) -> "SymmetryGenerators":
        if isinstance(xi, str):
            xi = [xi]
        if len(xi) != n:
            raise DimensionMismatch(f"need {n} xi expression(s), got {len(xi)}")
        parse = _expr.parse_expression
        return cls(parse(tau, n, with_velocity=False), tuple(parse(s, n, with_velocity=False) for s in xi), n)

    @classmethod
    def time_translation(cls, n: int = 1) -> "SymmetryGenerators":
        return cls(_expr.Num(1.0), tuple(_expr.Num(0.0) for _ in range(n)), n)

    @property
    def texts(self) -> Tuple[str, Tuple[str, ...]]:
        return _expr.unparse(self.tau), tuple(_expr.unparse(x) for x in self.xi)

    def _envs(self, t: np.ndarray, q: np.ndarray):
        for tk, qk in zip(t, q):
            env = {"t": tk}
            env.update({f"q{i + 1}": x for i, x in enumerate(qk)})
            yield env

    def tau_values(self, t: np.ndarray, q: np.ndarray) -> np.ndarray:
        return np.array([_expr.evaluate(self.tau, env) for env in self._envs(t, q)])

    def xi_values(self, t: np.ndarray, q: np.ndarray) -> np.ndarray:
        return np.array([[_expr.evaluate(x, env) for x in self.xi] for env in self._envs(t, q)]).reshape(len(t), self.n)

    def dual(self) -> "SymmetryGenerators":
        """Generators ``tau(-t, q)``, ``xi(-t, q)`` for the dual problem."""
        mapping = {"t": _expr.Neg(_expr.Var("t"))}
        sub = _expr.substitute
        return SymmetryGenerators(sub(self.tau, mapping), tuple(sub(x, mapping) for x in self.xi), self.n)


@dataclass(frozen=True)
class ConstancyReport:
    domain: TimeScale
    values: np.ndarray = field(repr=False)
    spread: float
    mean: np.ndarray = field(repr=False)
    tolerance: float
    passed: bool

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


@dataclass(frozen=True)
class DBRReport:
    """DuBois-Reymond residual ``R = h_nabla + d1L`` (delta flavor: ``H_delta + d1L``)."""

    h: GridFunction
    residual: GridFunction
    max_residual: float
    tolerance: float
    passed: bool
    h_constancy: Optional[ConstancyReport] = None

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


def constancy(domain: TimeScale, values, tol: float = DEFAULT_TOL) -> ConstancyReport:
    vals = np.asarray(values, dtype=float)
    cols = vals.reshape(len(vals), -1)
    spread_c = cols.max(axis=0) - cols.min(axis=0)
    mean_c = cols.mean(axis=0)
    passed = bool(np.all(spread_c <= tol * (1.0 + np.abs(mean_c))))
    return ConstancyReport(domain, vals, float(spread_c.max()), mean_c, tol, passed)


def on_interval(P: VariationalProblem, q: GridFunction) -> GridFunction:
    """``q`` restricted to ``[a, b]``; accepts trajectories on the interval or a superset."""
    if q.dim != P.n:
        raise DimensionMismatch(f"trajectory has dimension {q.dim}, problem has {P.n}")
    interval = P.interval
    if q.scale == interval:
        return q
    try:
        r = q.restrict(P.a, P.b)
    except NotInScale:
        raise NotInScale("trajectory is not defined on the problem interval") from None
    if r.scale != interval:
        raise NotInScale("trajectory points do not match the problem interval")
    return r


@dataclass(frozen=True)
class _Sample:
    """Integrand data at the points where a functional samples ``L``."""

    domain: TimeScale
    t: np.ndarray
    grain: np.ndarray
    q: np.ndarray
    shifted: np.ndarray
    deriv: np.ndarray
    L: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray


def _sample(P: VariationalProblem, q: GridFunction) -> _Sample:
    q = on_interval(P, q)
    vals = q.values
    pts = q.points
    grain = np.diff(pts)
    if P.flavor == NABLA:
        deriv = nabla_derivative(q)
        domain, qt, shifted = deriv.scale, vals[1:], vals[:-1]
    else:
        deriv = delta_derivative(q)
        domain, qt, shifted = deriv.scale, vals[:-1], vals[1:]
    t = domain.points
    L, d1, d2, d3 = partials_along(P.lagrangian, t, shifted, deriv.values)
    return _Sample(domain, t, grain, qt, shifted, deriv.values, L, d1, d2, d3)


def _require(P: VariationalProblem, flavor: str):
    if P.flavor != flavor:
        raise WrongFlavor(f"operation needs a {flavor} problem, got {P.flavor}")


def _dot(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.sum(x * y, axis=1)


# ---------------------------------------------------------------- functional
def _functional(P: VariationalProblem, s: _Sample) -> float:
    g = GridFunction(s.domain, s.L)
    if P.flavor == NABLA:
        return float(nabla_integral(g, P.a, P.b)[0])
    return float(delta_integral(g, P.a, P.b)[0])


def evaluate_functional(P: VariationalProblem, q: GridFunction) -> float:
    """Value of the problem's functional at trajectory ``q``."""
    return _functional(P, _sample(P, q))


# ---------------------------------------------------------------- Euler-Lagrange
def _el_values(P: VariationalProblem, s: _Sample) -> np.ndarray:
    d2 = GridFunction(s.domain, s.d2)
    if P.flavor == NABLA:
        running = cumulative_nabla_integral(d2, P.a).values[1:]
    else:
        running = cumulative_delta_integral(d2, P.a, P.b).values[:-1]
    E = s.d3 - running
    return E[:, 0] if P.n == 1 else E


def el_residual_nabla(P: VariationalProblem, q: GridFunction, tol: float = DEFAULT_TOL) -> ConstancyReport:
    """Constancy of ``d3L - integral_a^t d2L`` over ``(a, b]``."""
    _require(P, NABLA)
    s = _sample(P, q)
    return constancy(s.domain, _el_values(P, s), tol)


def el_residual_delta(P: VariationalProblem, q: GridFunction, tol: float = DEFAULT_TOL) -> ConstancyReport:
    """Constancy of ``d3L - sum over [a, t) of mu * d2L`` over ``[a, b)``."""
    _require(P, DELTA)
    s = _sample(P, q)
    return constancy(s.domain, _el_values(P, s), tol)


# ---------------------------------------------------------------- Noether
def _noether_values(P: VariationalProblem, s: _Sample, g: SymmetryGenerators) -> np.ndarray:
    if g.n != P.n:
        raise DimensionMismatch(f"generators have dimension {g.n}, problem has {P.n}")
    tau = g.tau_values(s.t, s.q)
    xi = g.xi_values(s.t, s.q)
    energy = s.L - _dot(s.d3, s.deriv)
    if P.flavor == NABLA:
        return _dot(s.d3, xi) + (energy + s.d1 * s.grain) * tau
    return _dot(s.d3, xi) - (energy - s.d1 * s.grain) * tau


def noether_quantity_nabla(
    P: VariationalProblem, g: SymmetryGenerators, q: GridFunction, tol: float = DEFAULT_TOL
) -> Tuple[GridFunction, ConstancyReport]:
    """``d3L . xi + (L - d3L . q_nabla + d1L * nu) * tau`` on ``(a, b]``."""
    _require(P, NABLA)
    s = _sample(P, q)
    C = _noether_values(P, s, g)
    return GridFunction(s.domain, C), constancy(s.domain, C, tol)


def noether_quantity_delta(
    P: VariationalProblem, g: SymmetryGenerators, q: GridFunction, tol: float = DEFAULT_TOL
) -> Tuple[GridFunction, ConstancyReport]:
    """``d3L . xi - (L - d3L . q_delta - d1L * mu) * tau`` on ``[a, b)``.

    With ``dual_problem`` and ``SymmetryGenerators.dual`` this is the
    negative of the nabla quantity at the mirrored point.
    """
    _require(P, DELTA)
    s = _sample(P, q)
    C = _noether_values(P, s, g)
    return GridFunction(s.domain, C), constancy(s.domain, C, tol)


# ---------------------------------------------------------------- DuBois-Reymond
def _dbr(P: VariationalProblem, s: _Sample, tol: float) -> DBRReport:
    if len(s.domain) < 2:
        raise TooSmall("DuBois-Reymond check needs at least three points in [a, b]")
    energy = -s.L + _dot(s.d3, s.deriv)
    if P.flavor == NABLA:
        h = GridFunction(s.domain, energy - s.d1 * s.grain)
        dh = nabla_derivative(h)
        R = dh.values[:, 0] + s.d1[1:]
    else:
        h = GridFunction(s.domain, energy + s.d1 * s.grain)
        dh = delta_derivative(h)
        R = dh.values[:, 0] + s.d1[:-1]
    max_r = float(np.max(np.abs(R)))
    h_const = constancy(s.domain, h.values[:, 0], tol) if np.all(s.d1 == 0.0) else None
    return DBRReport(h, GridFunction(dh.scale, R), max_r, tol, max_r <= tol, h_const)


def dbr_residual_nabla(P: VariationalProblem, q: GridFunction, tol: float = DEFAULT_TOL) -> DBRReport:
    """Residual of ``nabla(Hbar) = -d1L`` with ``Hbar = -L + d3L . v - d1L * nu``.

    ``h`` lives on ``(a, b]`` and the residual on ``(a, b]`` without its
    first point. For autonomous ``L`` the report also carries the constancy
    of ``h``, which is the negative of the usual energy bracket.
    """
    _require(P, NABLA)
    return _dbr(P, _sample(P, q), tol)


def dbr_residual_delta(P: VariationalProblem, q: GridFunction, tol: float = DEFAULT_TOL) -> DBRReport:
    """Residual of ``delta(H) = -d1L`` with ``H = -L + d3L . v + d1L * mu``."""
    _require(P, DELTA)
    return _dbr(P, _sample(P, q), tol)


# ---------------------------------------------------------------- invariance
def _generator_grids(P: VariationalProblem, g: SymmetryGenerators, q: GridFunction):
    if g.n != P.n:
        raise DimensionMismatch(f"generators have dimension {g.n}, problem has {P.n}")
    t = q.points
    return g.tau_values(t, q.values), g.xi_values(t, q.values)


def invariance_residual(P: VariationalProblem, g: SymmetryGenerators, q: GridFunction) -> GridFunction:
    """First-order invariance identity along ``q`` on ``(a, b]``; zero means invariant."""
    _require(P, NABLA)
    q = on_interval(P, q)
    s = _sample(P, q)
    tau, xi = _generator_grids(P, g, q)
    tau_n = np.diff(tau) / s.grain
    xi_n = np.diff(xi, axis=0) / s.grain[:, None]
    xi_rho = xi[:-1]
    res = s.d1 * tau[1:] + _dot(s.d2, xi_rho) + _dot(s.d3, xi_n) + s.L * tau_n - _dot(s.deriv, s.d3) * tau_n
    return GridFunction(s.domain, res)


def invariance_check_numeric(
    P: VariationalProblem, g: SymmetryGenerators, q: GridFunction, eps: float = 1e-4
) -> GridFunction:
    """Central difference in ``eps`` of the transformed integrand.

    The transformed time ``t + eps * tau`` and state ``q + eps * xi`` are
    differenced with the original scale's ``rho`` and ``nu``.
    """
    _require(P, NABLA)
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    q = on_interval(P, q)
    t = q.points
    nu = np.diff(t)
    tau, xi = _generator_grids(P, g, q)
    L = P.lagrangian

    def integrand(e: float) -> np.ndarray:
        A = t + e * tau
        Bq = q.values + e * xi
        A_n = np.diff(A) / nu
        if np.any(A_n <= 0.0):
            raise NotMonotone(f"t + ({e:g}) * tau is not strictly increasing on the scale")
        B_n = np.diff(Bq, axis=0) / nu[:, None]
        return np.array([L.eval(A[k + 1], Bq[k], B_n[k] / A_n[k]) * A_n[k] for k in range(len(nu))])

    plus = integrand(eps)
    minus = integrand(-eps)
    return GridFunction(q.scale.kappa_down(), (plus - minus) / (2.0 * eps))


# ---------------------------------------------------------------- duality
def dual_problem(P: VariationalProblem) -> VariationalProblem:
    """Mirror ``P`` onto the dual scale, swapping nabla and delta calculi."""
    return VariationalProblem(
        scale=P.scale.dual(),
        a=-P.b,
        b=-P.a,
        lagrangian=dual_lagrangian(P.lagrangian),
        A=P.B,
        B=P.A,
        flavor=DELTA if P.flavor == NABLA else NABLA,
    )


def el_residual(P: VariationalProblem, q: GridFunction, tol: float = DEFAULT_TOL) -> ConstancyReport:
    """Flavor-dispatching Euler-Lagrange check."""
    return (el_residual_nabla if P.flavor == NABLA else el_residual_delta)(P, q, tol)


def dbr_residual(P: VariationalProblem, q: GridFunction, tol: float = DEFAULT_TOL) -> DBRReport:
    return (dbr_residual_nabla if P.flavor == NABLA else dbr_residual_delta)(P, q, tol)


def noether_quantity(
    P: VariationalProblem, g: SymmetryGenerators, q: GridFunction, tol: float = DEFAULT_TOL
) -> Tuple[GridFunction, ConstancyReport]:
    return (noether_quantity_nabla if P.flavor == NABLA else noether_quantity_delta)(P, g, q, tol)
