"""Delta and nabla calculus of grid functions on finite time scales.

Derivatives live on the kappa-restricted scale: nabla derivatives on the
scale without its minimum, delta derivatives on the scale without its
maximum. Integrals use the finite-scale Cauchy sums

    nabla:  sum over t in (a, b] of nu(t) * f(t)
    delta:  sum over t in [a, b) of mu(t) * f(t)

evaluated with ``math.fsum`` so that a sum and its mirror image under
duality round identically.
"""

from __future__ import annotations

import math
import numpy as np

from .errors import DimensionMismatch, NotInScale, TooSmall
from .timescale import TOL, TimeScale


class GridFunction:
    """Vector-valued function sampled on every point of a time scale.

    ``values`` has shape ``(len(scale), n)``; one-dimensional input is
    treated as ``n = 1``.
    """

    __slots__ = ("_scale", "_values")

    def __init__(self, scale: TimeScale, values):
        vals = np.array(values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2 or vals.shape[0] != len(scale) or vals.shape[1] < 1:
            raise DimensionMismatch(f"expected {len(scale)} values of a common dimension, got shape {np.shape(values)}")
        vals.setflags(write=False)
        self._scale = scale
        self._values = vals

    @property
    def scale(self) -> TimeScale:
        return self._scale

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def dim(self) -> int:
        return self._values.shape[1]

    @property
    def points(self) -> np.ndarray:
        return self._scale.points

    def __len__(self) -> int:
        return len(self._scale)

    def __call__(self, t: float) -> np.ndarray:
        return self._values[self._scale.index(t)]

    def scalar(self) -> np.ndarray:
        """Values as a flat array; only valid for ``dim == 1``."""
        if self.dim != 1:
            raise DimensionMismatch(f"scalar() on a {self.dim}-dimensional grid function")
        return self._values[:, 0]

    def restrict(self, a: float, b: float) -> "GridFunction":
        i, j = self._scale.index(a), self._scale.index(b)
        return GridFunction(self._scale.restrict(a, b), self._values[i : j + 1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GridFunction):
            return NotImplemented
        return self._scale == other._scale and np.array_equal(self._values, other._values)

    __hash__ = None

    def __repr__(self) -> str:
        return f"GridFunction({self._scale!r}, dim={self.dim})"


def nabla_derivative(f: GridFunction) -> GridFunction:
    """``(f(t) - f(rho(t))) / nu(t)`` on the scale without its minimum."""
    if len(f) < 2:
        raise TooSmall("nabla derivative needs at least two points")
    t = f.points
    return GridFunction(f.scale.kappa_down(), np.diff(f.values, axis=0) / np.diff(t)[:, None])


def delta_derivative(f: GridFunction) -> GridFunction:
    """``(f(sigma(t)) - f(t)) / mu(t)`` on the scale without its maximum."""
    if len(f) < 2:
        raise TooSmall("delta derivative needs at least two points")
    t = f.points
    return GridFunction(f.scale.kappa_up(), np.diff(f.values, axis=0) / np.diff(t)[:, None])


def _nabla_terms(f: GridFunction, a: float, b: float) -> np.ndarray:
    # ``a`` may sit just below the domain, as for integrands on kappa_down(T).
    t = f.points
    j = f.scale.index(b)
    if a in f.scale:
        i = f.scale.index(a)
        if i > j:
            raise ValueError(f"integration needs a <= b, got a={a!r}, b={b!r}")
        return np.diff(t[i : j + 1])[:, None] * f.values[i + 1 : j + 1]
    if not a < t[0]:
        raise NotInScale(f"lower limit {a!r} is neither a point nor below the domain")
    grid = np.concatenate(([a], t[: j + 1]))
    return np.diff(grid)[:, None] * f.values[: j + 1]


def _delta_terms(f: GridFunction, a: float, b: float) -> np.ndarray:
    # ``b`` may sit just above the domain, as for integrands on kappa_up(T).
    t = f.points
    i = f.scale.index(a)
    if b in f.scale:
        j = f.scale.index(b)
        if i > j:
            raise ValueError(f"integration needs a <= b, got a={a!r}, b={b!r}")
        return np.diff(t[i : j + 1])[:, None] * f.values[i:j]
    if not b > t[-1]:
        raise NotInScale(f"upper limit {b!r} is neither a point nor above the domain")
    grid = np.concatenate((t[i:], [b]))
    return np.diff(grid)[:, None] * f.values[i:]


def _fsum_columns(terms: np.ndarray) -> np.ndarray:
    return np.array([math.fsum(col) for col in terms.T])


def nabla_integral(f: GridFunction, a: float, b: float) -> np.ndarray:
    """Nabla integral of ``f`` over ``[a, b]``; returns an ``n``-vector."""
    return _fsum_columns(_nabla_terms(f, a, b))


def delta_integral(f: GridFunction, a: float, b: float) -> np.ndarray:
    """Delta integral of ``f`` over ``[a, b]``; returns an ``n``-vector."""
    return _fsum_columns(_delta_terms(f, a, b))


def cumulative_nabla_integral(f: GridFunction, a: float) -> GridFunction:
    """``t -> nabla_integral(f, a, t)`` for every point ``t >= a``.

    The result is defined on ``{a}`` together with the points of ``f``
    above ``a``, and vanishes at ``a``.
    """
    terms = _nabla_terms(f, a, f.scale.max)
    t = f.points
    pts = np.concatenate(([a], t[t > a + TOL]))
    sums = [np.zeros(f.dim)]
    sums += [_fsum_columns(terms[: k + 1]) for k in range(terms.shape[0])]
    return GridFunction(TimeScale(pts), np.array(sums))


def cumulative_delta_integral(f: GridFunction, a: float, b: float) -> GridFunction:
    """``t -> delta_integral(f, a, t)`` for every point ``t`` in ``[a, b]``."""
    terms = _delta_terms(f, a, b)
    t = f.points
    pts = np.concatenate((t[(t >= a - TOL) & (t < b - TOL)], [b]))
    sums = [np.zeros(f.dim)]
    sums += [_fsum_columns(terms[: k + 1]) for k in range(terms.shape[0])]
    return GridFunction(TimeScale(pts), np.array(sums))


def dual_function(f: GridFunction) -> GridFunction:
    """``f*(s) = f(-s)`` on the dual scale."""
    return GridFunction(f.scale.dual(), f.values[::-1])


def compose_rho(f: GridFunction) -> GridFunction:
    """``t -> f(rho(t))`` on the same scale."""
    v = f.values
    return GridFunction(f.scale, np.concatenate((v[:1], v[:-1])))


def compose_sigma(f: GridFunction) -> GridFunction:
    """``t -> f(sigma(t))`` on the same scale."""
    v = f.values
    return GridFunction(f.scale, np.concatenate((v[1:], v[-1:])))


def sample(scale: TimeScale, fn, dim: int = 1) -> GridFunction:
    """Tabulate a callable ``fn(t)`` on every point of ``scale``."""
    vals = [np.reshape(np.asarray(fn(t), dtype=float), (dim,)) for t in scale]
    return GridFunction(scale, np.array(vals))
