"""Brute-force trajectory enumeration and classification.

Trajectories are generated from their derivative values: every step of
``[a, b]`` picks one element of a finite alphabet, and the trajectory is
rebuilt by summing ``nu(t) * derivative``. Candidates are numbered in
mixed-radix order (first step most significant) so ids are stable across
runs. Branches that can no longer reach the right boundary value are
pruned.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .calculus import GridFunction
from .errors import (
    CapExceeded,
    DimensionMismatch,
    DomainError,
    LengthMismatch,
    NoConvergence,
    SingularJacobian,
    TooSmall,
)
from .timescale import TimeScale
from .variational import (
    BOUNDARY_TOL,
    DEFAULT_TOL,
    NABLA,
    SymmetryGenerators,
    VariationalProblem,
    _dbr,
    _el_values,
    _functional,
    _noether_values,
    _require,
    _sample,
    constancy,
    on_interval,
)

logger = logging.getLogger(__name__)

DEFAULT_CAP = 10**7


@dataclass(frozen=True)
class DerivativeAlphabet:
    """Allowed derivative values, one finite set per state component."""

    components: Tuple[Tuple[float, ...], ...]

    def __post_init__(self):
        comps = tuple(tuple(float(x) for x in c) for c in self.components)
        if not comps or any(len(c) == 0 for c in comps):
            raise ValueError("every alphabet component needs at least one value")
        object.__setattr__(self, "components", comps)

    @classmethod
    def scalar(cls, values: Sequence[float]) -> "DerivativeAlphabet":
        return cls((tuple(values),))

    @property
    def n(self) -> int:
        return len(self.components)

    def choices(self) -> List[Tuple[float, ...]]:
        return list(itertools.product(*self.components))

    def negated(self) -> "DerivativeAlphabet":
        return DerivativeAlphabet(tuple(tuple(-x for x in c) for c in self.components))


@dataclass(frozen=True)
class Candidate:
    id: int
    derivs: Tuple[Tuple[float, ...], ...]
    q: GridFunction = field(repr=False, compare=False)


@dataclass(frozen=True)
class ClassificationRow:
    id: int
    feasible: bool
    el_pass: bool
    dbr_pass: bool
    noether_spread: Optional[float]
    value: float
    el_spread: float = 0.0
    dbr_max_residual: float = 0.0
    q: Optional[GridFunction] = field(default=None, repr=False, compare=False)

    @property
    def el_verdict(self) -> str:
        return "pass" if self.el_pass else "fail"

    @property
    def dbr_verdict(self) -> str:
        return "pass" if self.dbr_pass else "fail"


def reconstruct(T: TimeScale, A, derivs) -> GridFunction:
    """Trajectory on ``T`` with ``q(min T) = A`` and the given derivative values."""
    d = np.asarray(derivs, dtype=float)
    if d.ndim == 1:
        d = d[:, None]
    if d.shape[0] != len(T) - 1:
        raise LengthMismatch(f"need {len(T) - 1} derivative values for {len(T)} points, got {d.shape[0]}")
    A = np.atleast_1d(np.asarray(A, dtype=float))
    if A.shape != (d.shape[1],):
        raise DimensionMismatch(f"anchor has shape {A.shape}, derivatives have dimension {d.shape[1]}")
    steps = np.diff(T.points)[:, None] * d
    vals = np.empty((len(T), d.shape[1]))
    vals[0] = A
    for i, step in enumerate(steps, start=1):
        vals[i] = vals[i - 1] + step
    return GridFunction(T, vals)


def candidate_count(P: VariationalProblem, alphabet: DerivativeAlphabet) -> int:
    """Number of trajectories the alphabet generates before boundary filtering."""
    radix = 1
    for c in alphabet.components:
        radix *= len(c)
    return radix ** (len(P.interval) - 1)


def _generate(P: VariationalProblem, alphabet: DerivativeAlphabet, boundary_tol: float) -> Iterator[Candidate]:
    interval = P.interval
    grain = np.diff(interval.points)
    m = len(grain)
    choices = alphabet.choices()
    radix = len(choices)
    cvals = np.array(choices, dtype=float)
    lo_c, hi_c = cvals.min(axis=0), cvals.max(axis=0)
    # reach[k]: total grain still to come after step k
    reach = np.concatenate((np.cumsum(grain[::-1])[::-1][1:], [0.0]))
    A = np.asarray(P.A)
    B = np.asarray(P.B)
    slack = boundary_tol + 1e-9 * (1.0 + np.abs(B) + np.abs(A) + reach[0] * np.maximum(np.abs(lo_c), np.abs(hi_c)))
    values = np.empty((m + 1, P.n))
    values[0] = A
    path = [0] * m

    def walk(k: int, ident: int):
        if k == m:
            if np.max(np.abs(values[m] - B)) <= boundary_tol:
                derivs = tuple(choices[i] for i in path)
                yield Candidate(ident, derivs, GridFunction(interval, values.copy()))
            return
        for ci in range(radix):
            x = values[k] + grain[k] * cvals[ci]
            lo = x + reach[k] * lo_c
            hi = x + reach[k] * hi_c
            if np.any(B < lo - slack) or np.any(B > hi + slack):
                continue
            values[k + 1] = x
            path[k] = ci
            yield from walk(k + 1, ident * radix + ci)

    return walk(0, 0)


def enumerate_candidates(
    P: VariationalProblem,
    alphabet: DerivativeAlphabet,
    boundary_tol: float = BOUNDARY_TOL,
    cap: int = DEFAULT_CAP,
) -> List[Candidate]:
    """All alphabet trajectories with ``q(a) = A`` and ``|q(b) - B| <= boundary_tol``."""
    if alphabet.n != P.n:
        raise DimensionMismatch(f"alphabet has {alphabet.n} component(s), problem has {P.n}")
    count = candidate_count(P, alphabet)
    if count > cap:
        raise CapExceeded(count, cap)
    found = list(_generate(P, alphabet, boundary_tol))
    logger.debug("enumerated %d of %d candidates as boundary-feasible", len(found), count)
    return found


def classify(
    P: VariationalProblem,
    candidates: Sequence[Union[Candidate, GridFunction]],
    generators: Optional[SymmetryGenerators] = None,
    tol: float = DEFAULT_TOL,
    boundary_tol: float = BOUNDARY_TOL,
) -> List[ClassificationRow]:
    """Run the Euler-Lagrange, DuBois-Reymond and optional Noether checks on
    every candidate; rows come back sorted by functional value, then id."""
    rows = []
    for pos, cand in enumerate(candidates):
        ident, q = (cand.id, cand.q) if isinstance(cand, Candidate) else (pos, cand)
        q = on_interval(P, q)
        s = _sample(P, q)
        el = constancy(s.domain, _el_values(P, s), tol)
        dbr = _dbr(P, s, tol)
        spread = None
        if generators is not None:
            spread = constancy(s.domain, _noether_values(P, s, generators), tol).spread
        rows.append(
            ClassificationRow(
                id=ident,
                feasible=P.is_feasible(q, boundary_tol),
                el_pass=el.passed,
                dbr_pass=dbr.passed,
                noether_spread=spread,
                value=_functional(P, s),
                el_spread=el.spread,
                dbr_max_residual=dbr.max_residual,
                q=q,
            )
        )
    rows.sort(key=lambda r: (r.value, r.id))
    return rows


def solve_el_newton(
    P: VariationalProblem,
    q_init: GridFunction,
    max_iter: int = 50,
    step_tol: float = 1e-14,
    fd_step: float = 1e-7,
    residual_tol: float = 1e-10,
) -> GridFunction:
    """Damped Newton solve of the integral Euler-Lagrange equation.

    Unknowns are the interior values of ``q`` (the endpoints are pinned to
    ``A`` and ``B``); equations are ``E(t_i) - E(t_1) = 0`` for the
    Euler-Lagrange expression ``E`` on ``(a, b]``. The Jacobian is a
    forward difference with step ``fd_step``; each step is halved until
    the max-norm residual decreases.
    """
    _require(P, NABLA)
    q0 = on_interval(P, q_init)
    N = len(q0)
    if N < 3:
        raise TooSmall("Newton solve needs at least three points in [a, b]")
    base = q0.values.copy()
    base[0] = P.A
    base[-1] = P.B
    interval = q0.scale

    def system(x: np.ndarray) -> np.ndarray:
        vals = base.copy()
        vals[1:-1] = x.reshape(N - 2, P.n)
        E = np.asarray(_el_values(P, _sample(P, GridFunction(interval, vals)))).reshape(N - 1, P.n)
        return (E[1:] - E[0]).ravel()

    x = base[1:-1].ravel().copy()
    F = system(x)
    history = [float(np.max(np.abs(F)))]
    for _ in range(max_iter):
        if history[-1] <= residual_tol:
            break
        J = np.empty((F.size, x.size))
        for j in range(x.size):
            xp = x.copy()
            xp[j] += fd_step
            J[:, j] = (system(xp) - F) / fd_step
        try:
            if np.linalg.cond(J) > 1e14:
                raise np.linalg.LinAlgError
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            raise SingularJacobian(f"Jacobian is singular at residual {history[-1]:.3e}") from None
        lam = 1.0
        while True:
            trial = x + lam * dx
            try:
                Ft = system(trial)
                rt = float(np.max(np.abs(Ft)))
            except DomainError:
                rt = np.inf
            if rt < history[-1]:
                break
            lam *= 0.5
            if lam * np.max(np.abs(dx)) <= step_tol:
                raise NoConvergence("line search stalled", history)
        x, F = trial, Ft
        history.append(rt)
    if history[-1] > residual_tol:
        raise NoConvergence(f"no convergence in {max_iter} iterations", history)
    vals = base.copy()
    vals[1:-1] = x.reshape(N - 2, P.n)
    return GridFunction(interval, vals)
