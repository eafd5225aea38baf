"""Lagrangians ``L(t, q, v)`` with exact first partial derivatives."""

from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np

from . import expr as _expr
from .errors import DimensionMismatch
from .expr import Dual, Neg, Var


class Lagrangian:
    """A parsed Lagrangian on ``R x R^n x R^n``.

    ``d1``, ``d2`` and ``d3`` are the partial derivatives with respect to
    time, position and velocity. They are computed by forward-mode
    differentiation, one pass per variable.
    """

    def __init__(self, tree: _expr.Node, n: int, source: str | None = None):
        self.n = n
        self.tree = tree
        self.source = source if source is not None else _expr.unparse(tree)
        self._names_q = [f"q{i}" for i in range(1, n + 1)]
        self._names_v = [f"v{i}" for i in range(1, n + 1)]

    def __repr__(self) -> str:
        return f"Lagrangian({self.source!r}, n={self.n})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Lagrangian):
            return NotImplemented
        return self.n == other.n and self.tree == other.tree

    def __hash__(self) -> int:
        return hash((self.n, self.tree))

    @property
    def text(self) -> str:
        """Canonical source text; re-parses to the same tree."""
        return _expr.unparse(self.tree)

    def _vec(self, x, what: str) -> np.ndarray:
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        if arr.shape != (self.n,):
            raise DimensionMismatch(f"{what} must have {self.n} component(s), got shape {arr.shape}")
        return arr

    def _run(self, t: float, q: np.ndarray, v: np.ndarray, seed: str | None) -> Dual:
        env = {"t": Dual(float(t), 1.0 if seed == "t" else 0.0)}
        for name, x in zip(self._names_q, q):
            env[name] = Dual(float(x), 1.0 if seed == name else 0.0)
        for name, x in zip(self._names_v, v):
            env[name] = Dual(float(x), 1.0 if seed == name else 0.0)
        return self.tree.ev(env)

    def eval(self, t: float, q, v) -> float:
        return self._run(t, self._vec(q, "q"), self._vec(v, "v"), None).val

    def __call__(self, t: float, q, v) -> float:
        return self.eval(t, q, v)

    def d1(self, t: float, q, v) -> float:
        return self._run(t, self._vec(q, "q"), self._vec(v, "v"), "t").der

    def d2(self, t: float, q, v) -> np.ndarray:
        q, v = self._vec(q, "q"), self._vec(v, "v")
        return np.array([self._run(t, q, v, name).der for name in self._names_q])

    def d3(self, t: float, q, v) -> np.ndarray:
        q, v = self._vec(q, "q"), self._vec(v, "v")
        return np.array([self._run(t, q, v, name).der for name in self._names_v])

    def partials(self, t: float, q, v) -> Tuple[float, float, np.ndarray, np.ndarray]:
        """``(L, d1, d2, d3)`` at one point in ``2n + 1`` passes."""
        q, v = self._vec(q, "q"), self._vec(v, "v")
        r = self._run(t, q, v, "t")
        d2 = np.array([self._run(t, q, v, name).der for name in self._names_q])
        d3 = np.array([self._run(t, q, v, name).der for name in self._names_v])
        return r.val, r.der, d2, d3

    def is_autonomous(self) -> bool:
        """True when ``t`` does not occur in the expression."""
        return "t" not in _expr.free_variables(self.tree)


def parse(src: str, n: int = 1) -> Lagrangian:
    """Parse a Lagrangian over ``t``, ``q1..qn``, ``v1..vn``."""
    return Lagrangian(_expr.parse_expression(src, n), n, source=src)


def dual_lagrangian(L: Lagrangian) -> Lagrangian:
    """``L*(s, x, v) = L(-s, x, -v)``, built by substitution.

    Negation is exact in floating point, so ``L*`` and its partials agree
    bit for bit with ``L``, ``-d1``, ``d2``, ``-d3`` at the mirrored point.
    Applying the map twice returns a structurally identical tree.
    """
    mapping = {"t": Neg(Var("t"))}
    for i in range(1, L.n + 1):
        mapping[f"v{i}"] = Neg(Var(f"v{i}"))
    return Lagrangian(_expr.substitute(L.tree, mapping), L.n)


def partials_along(L: Lagrangian, ts: Sequence[float], qs: np.ndarray, vs: np.ndarray):
    """Evaluate ``(L, d1, d2, d3)`` at each ``(ts[k], qs[k], vs[k])``.

    Returns arrays of shapes ``(m,)``, ``(m,)``, ``(m, n)``, ``(m, n)``.
    """
    m = len(ts)
    val = np.empty(m)
    d1 = np.empty(m)
    d2 = np.empty((m, L.n))
    d3 = np.empty((m, L.n))
    for k in range(m):
        val[k], d1[k], d2[k], d3[k] = L.partials(ts[k], qs[k], vs[k])
    return val, d1, d2, d3
