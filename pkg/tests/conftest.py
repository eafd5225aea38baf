import numpy as np
import pytest

from nablacv import expr
from nablacv.errors import DomainError
from nablacv.lagrangian import parse
from nablacv.search import reconstruct
from nablacv.timescale import TimeScale, uniform
from nablacv.variational import VariationalProblem

QTILDE_DERIVS = [1, -1, 0, 0, 0, 0, 1, -1]


@pytest.fixture
def eighths():
    return uniform(0.0, 1.0, 0.125)


@pytest.fixture
def well(eighths):
    """Minimise the nabla integral of ((q_nabla)^2 - 1)^2 on {0, 1/8, ..., 1}, q(0) = q(1) = 0."""
    return VariationalProblem(eighths, 0.0, 1.0, parse("(v^2 - 1)^2"), [0.0], [0.0])


@pytest.fixture
def qtilde(eighths):
    return reconstruct(eighths, 0.0, QTILDE_DERIVS)


def random_scale(rng, size, lo=-10.0, hi=10.0, min_gap=1e-3):
    while True:
        pts = np.sort(rng.uniform(lo, hi, size))
        if size < 2 or np.min(np.diff(pts)) > min_gap:
            return TimeScale(pts)


def random_polynomial_values(rng, points, degree=4):
    coeffs = rng.normal(size=degree + 1)
    return np.polyval(coeffs, points)


# ------------------------------------------------------------ random expressions
_UNARY = ("sin", "cos", "exp", "ln1p2", "sqrt1p2", "abs")


def _leaf(rng, names):
    if rng.random() < 0.3:
        x = float(np.round(rng.uniform(-2, 2), 3))
        return expr.Neg(expr.Num(-x)) if x < 0 else expr.Num(x)
    return expr.Var(names[rng.integers(len(names))])


def random_tree(rng, depth, names):
    """Random smooth expression tree of depth at most ``depth``."""
    if depth <= 1 or rng.random() < 0.2:
        return _leaf(rng, names)

    def sub(drop=1):
        return random_tree(rng, depth - drop, names)

    def one_plus_square(drop):
        # 1 + x^2 keeps denominators and log/sqrt arguments positive
        return expr.BinOp("+", expr.Num(1.0), expr.BinOp("^", sub(drop), expr.Num(2.0)))

    kind = rng.integers(8)
    if kind < 4:
        op = "+-*/"[kind]
        if op == "/":
            return expr.BinOp("/", sub(), one_plus_square(3)) if depth > 3 else sub()
        return expr.BinOp(op, sub(), sub())
    if kind == 4:
        return expr.BinOp("^", sub(), expr.Num(float(rng.integers(2, 4))))
    if kind == 5:
        return expr.Neg(sub())
    fn = _UNARY[rng.integers(len(_UNARY))]
    if fn in ("ln1p2", "sqrt1p2"):
        return expr.Call(fn[:-3], one_plus_square(3)) if depth > 3 else sub()
    if fn == "exp":
        return expr.Call("exp", expr.Call("sin", sub(2))) if depth > 2 else sub()
    return expr.Call(fn, sub())


def tree_depth(node):
    if isinstance(node, (expr.Num, expr.Var)):
        return 1
    if isinstance(node, (expr.Neg, expr.Call)):
        return 1 + tree_depth(node.arg)
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


def lagrangian_names(n):
    return ["t"] + [f"q{i}" for i in range(1, n + 1)] + [f"v{i}" for i in range(1, n + 1)]


def random_lagrangian_text(rng, depth=6, n=1, bound=100.0, probe=None):
    """Text of a random Lagrangian that evaluates to a moderate value at ``probe``."""
    from nablacv.lagrangian import Lagrangian

    names = lagrangian_names(n)
    while True:
        tree = random_tree(rng, depth, names)
        if probe is None:
            return expr.unparse(tree)
        L = Lagrangian(tree, n)
        try:
            val, d1, d2, d3 = L.partials(*probe)
        except DomainError:
            continue
        if all(np.all(np.abs(x) < bound) for x in (val, d1, d2, d3)):
            return expr.unparse(tree)


def random_generators(rng, n, depth=3):
    from nablacv.variational import SymmetryGenerators

    names = ["t"] + [f"q{i}" for i in range(1, n + 1)]
    tau = random_tree(rng, depth, names)
    xi = tuple(random_tree(rng, depth, names) for _ in range(n))
    return SymmetryGenerators(tau, xi, n)


def random_problem(rng, n=None, size=None, depth=5, bound=1e3):
    """A nabla problem, a polynomial trajectory on it and generators, all evaluating cleanly."""
    from nablacv.calculus import GridFunction
    from nablacv.lagrangian import Lagrangian
    from nablacv.variational import (
        VariationalProblem,
        dbr_residual_nabla,
        invariance_residual,
        noether_quantity_nabla,
    )

    n = int(rng.integers(1, 3)) if n is None else n
    while True:
        m = int(rng.integers(4, 13)) if size is None else size
        T = random_scale(rng, m, -3.0, 3.0, min_gap=0.05)
        L = Lagrangian(random_tree(rng, depth, lagrangian_names(n)), n)
        vals = np.column_stack([random_polynomial_values(rng, T.points / 3.0, degree=3) for _ in range(n)])
        q = GridFunction(T, vals)
        P = VariationalProblem(T, T.min, T.max, L, vals[0], vals[-1])
        g = random_generators(rng, n)
        try:
            C, _ = noether_quantity_nabla(P, g, q)
            rep = dbr_residual_nabla(P, q)
            res = invariance_residual(P, g, q)
        except DomainError:
            continue
        arrays = (C.values, rep.h.values, rep.residual.values, res.values)
        if all(np.all(np.isfinite(a)) and np.max(np.abs(a)) < bound for a in arrays):
            return P, q, g


_SMOOTH_TERMS = ("v{i}^2", "q{i}^2", "sin(q{i})*t", "v{i}*q{i}", "exp(v{i}/2)", "cos(t)*v{i}^2", "q{i}*v{i}^3/3")


def smooth_problem(rng, n=1, size=None):
    """Nabla problem, trajectory and generators built from a fixed family of smooth terms
    with random coefficients; every third derivative stays of order one."""
    from nablacv.calculus import GridFunction
    from nablacv.lagrangian import parse
    from nablacv.variational import SymmetryGenerators, VariationalProblem

    m = int(rng.integers(4, 13)) if size is None else size
    T = random_scale(rng, m, 0.0, 2.0, min_gap=0.05)
    terms = []
    for i in range(1, n + 1):
        picks = rng.choice(len(_SMOOTH_TERMS), size=3, replace=False)
        terms += [f"{rng.uniform(-1, 1):.3f}*{_SMOOTH_TERMS[k].format(i=i)}" for k in picks]
    L = parse(" + ".join(terms), n)

    def linear(i):
        c = rng.uniform(-0.5, 0.5, 4)
        q = f"q{i}" if n > 1 else "q"
        return f"{c[0]:.3f} + {c[1]:.3f}*t + {c[2]:.3f}*{q} + {c[3]:.3f}*sin(t)"

    g = SymmetryGenerators.parse(linear(1), [linear(i) for i in range(1, n + 1)], n)
    vals = np.column_stack([random_polynomial_values(rng, T.points / 2.0, degree=3) for _ in range(n)])
    # keep slopes at most 2
    slope = np.max(np.abs(np.diff(vals, axis=0)) / np.diff(T.points)[:, None])
    vals = vals * min(1.0, 2.0 / slope)
    q = GridFunction(T, vals)
    return VariationalProblem(T, T.min, T.max, L, vals[0], vals[-1]), q, g
