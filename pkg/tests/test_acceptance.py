"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""

from math import comb

import numpy as np
import pytest

from nablacv.calculus import (
    GridFunction,
    compose_rho,
    compose_sigma,
    delta_derivative,
    delta_integral,
    dual_function,
    nabla_derivative,
    nabla_integral,
    sample,
)
from nablacv.errors import DomainError
from nablacv.lagrangian import Lagrangian, parse
from nablacv.search import DerivativeAlphabet, classify, enumerate_candidates, reconstruct, solve_el_newton
from nablacv.timescale import uniform
from nablacv.variational import (
    DELTA,
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

from conftest import (
    QTILDE_DERIVS,
    lagrangian_names,
    random_generators,
    random_lagrangian_text,
    random_polynomial_values,
    random_problem,
    random_scale,
    random_tree,
    smooth_problem,
)

TIME = SymmetryGenerators.time_translation()


@pytest.fixture
def verdict(capsys):
    def report(number: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return report


def well_problem():
    T = uniform(0.0, 1.0, 0.125)
    return VariationalProblem(T, 0.0, 1.0, parse("(v^2 - 1)^2"), [0.0], [0.0])


# ---------------------------------------------------------------- 1
def test_criterion_1_worked_example(verdict):
    P = well_problem()
    q = reconstruct(P.scale, 0.0, QTILDE_DERIVS)
    el = el_residual_nabla(P, q)
    dbr = dbr_residual_nabla(P, q)
    value = evaluate_functional(P, q)
    h = set(dbr.h.scalar().tolist())
    checks = [
        q(0.125)[0] == 0.125 and q(0.875)[0] == 0.125,
        float(np.max(np.abs(el.values))) <= 1e-12 and el.verdict == "pass",
        h == {-1.0, 0.0} and dbr.h_constancy.spread == 1.0 and dbr.verdict == "fail",
        abs(value - 0.5) <= 1e-12,
    ]
    verdict(1, all(checks), f"max|E|={np.max(np.abs(el.values)):.1e} h-values={sorted(h)} I={value!r}")


# ---------------------------------------------------------------- 2
def test_criterion_2_enumeration(verdict):
    P = well_problem()
    alphabet = DerivativeAlphabet.scalar([-1, 0, 1])
    cands = enumerate_candidates(P, alphabet)
    rows = classify(P, cands)
    counts = (
        3 ** (len(P.interval) - 1),
        len(cands),
        sum(r.el_pass for r in rows),
        sum(r.dbr_pass for r in rows),
        sum(r.value <= 1e-12 for r in rows),
    )
    binomial = sum(comb(8, a) * comb(8 - a, a) for a in range(5))
    zero = evaluate_functional(P, GridFunction(P.scale, np.zeros(9)))
    ok = counts == (6561, 1107, 1107, 71, 70) and binomial == 1107 and comb(8, 4) == 70 and abs(zero - 1) <= 1e-12
    verdict(2, ok, f"candidates/feasible/EL/DBR/I=0 = {counts}; I[0]={zero!r}")


# ---------------------------------------------------------------- 3
def test_criterion_3_duality_suite(verdict):
    rng = np.random.default_rng(20240603)
    worst = 0.0
    exact = True
    cases = 120
    for _ in range(cases):
        T = random_scale(rng, int(rng.integers(3, 51)))
        D = T.dual()
        # kappa and interval restrictions commute with the dual exactly
        exact &= T.kappa_up().dual() == D.kappa_down() and T.kappa_down().dual() == D.kappa_up()
        i = int(rng.integers(0, len(T)))
        j = int(rng.integers(i, len(T)))
        a, b = T.points[i], T.points[j]
        exact &= T.restrict(a, b).dual() == D.restrict(-b, -a)
        # jump operators and graininess mirror
        for s in D:
            worst = max(
                worst,
                abs(D.sigma(s) + T.rho(-s)),
                abs(D.rho(s) + T.sigma(-s)),
                abs(D.nu(s) - T.mu(-s)),
                abs(D.mu(s) - T.nu(-s)),
            )
        f = GridFunction(T, random_polynomial_values(rng, T.points))
        fs = dual_function(f)
        # derivatives swap with a sign
        fd, fn = delta_derivative(f), nabla_derivative(f)
        dn, dd = nabla_derivative(fs), delta_derivative(fs)
        worst = max(worst, max(abs(fd(t)[0] + dn(-t)[0]) for t in fd.scale))
        worst = max(worst, max(abs(fn(t)[0] + dd(-t)[0]) for t in fn.scale))
        worst = max(worst, max(abs(compose_sigma(fs)(-t)[0] - compose_rho(f)(t)[0]) for t in T))
        # integrals swap
        worst = max(worst, abs(delta_integral(f, a, b)[0] - nabla_integral(fs, -b, -a)[0]))
        worst = max(worst, abs(nabla_integral(f, a, b)[0] - delta_integral(fs, -b, -a)[0]))
        # functional duality: delta functional of y equals the dual nabla functional of y*
        if len(T) >= 3:
            names = lagrangian_names(1)
            L = Lagrangian(random_tree(rng, 4, names), 1)
            y = GridFunction(T, random_polynomial_values(rng, T.points / 10.0, degree=3))
            Pd = VariationalProblem(T, T.min, T.max, L, y.values[0], y.values[-1], flavor=DELTA)
            try:
                lhs = evaluate_functional(Pd, y)
                rhs = evaluate_functional(dual_problem(Pd), dual_function(y))
            except DomainError:
                continue
            worst = max(worst, abs(lhs - rhs))
    ok = exact and worst <= 1e-10
    verdict(3, ok, f"{cases} scales, exact set identities={exact}, max deviation={worst:.1e}")


# ---------------------------------------------------------------- 4
def test_criterion_4_noether_on_dbr_survivors(verdict):
    P = well_problem()
    cands = enumerate_candidates(P, DerivativeAlphabet.scalar([-1, 0, 1]))
    rows = classify(P, cands, TIME)
    survivors = [r for r in rows if r.dbr_pass]
    spread = max(r.noether_spread for r in survivors)
    worst = 0.0
    for c in cands:
        C, _ = noether_quantity_nabla(P, TIME, c.q)
        v = nabla_derivative(c.q).scalar()
        closed = -(v**2 - 1) * (1 + 3 * v**2)
        worst = max(worst, float(np.max(np.abs(C.scalar() - closed))))
    ok = len(survivors) == 71 and spread <= 1e-12 and worst <= 1e-12
    verdict(4, ok, f"{len(survivors)} survivors, max Noether spread={spread:.1e}, closed-form deviation={worst:.1e}")


# ---------------------------------------------------------------- 5
_SMOOTH = ["v^2", "v^2 + q^2", "v^4/4 + v^2 + sin(q)", "exp(v/2) + t*q", "v^2*(2 + cos(t)) + q^2/2"]


def _extremal_case(rng):
    T = random_scale(rng, int(rng.integers(4, 10)), 0.0, 2.0, min_gap=0.1)
    text = _SMOOTH[rng.integers(len(_SMOOTH))]
    P = VariationalProblem(T, T.min, T.max, parse(text), [rng.normal()], [rng.normal()])
    s = (T.points - T.min) / (T.max - T.min)
    init = GridFunction(T, (1 - s) * P.A[0] + s * P.B[0])
    return P, solve_el_newton(P, init), random_generators(rng, 1)


def _compare(P, q, g):
    D, qs, gs = dual_problem(P), dual_function(q), g.dual()
    E, Es = el_residual_nabla(P, q), el_residual_delta(D, qs)
    R, Rs = dbr_residual_nabla(P, q), dbr_residual_delta(D, qs)
    C, _ = noether_quantity_nabla(P, g, q)
    Cs, _ = noether_quantity_delta(D, gs, qs)
    ok = E.passed == Es.passed and R.passed == Rs.passed and abs(E.spread - Es.spread) <= 1e-10 * (1 + E.spread)
    dev = 0.0
    for t in C.scale:
        dev = max(dev, abs(Cs(-t)[0] + C(t)[0]), abs(Rs.h(-t)[0] - R.h(t)[0]))
    return ok, dev, E.passed


def test_criterion_5_duality_transport(verdict):
    rng = np.random.default_rng(7)
    agree, worst, extremals = True, 0.0, 0
    for k in range(50):
        P, q, g = _extremal_case(rng) if k % 2 else random_problem(rng, n=int(rng.integers(1, 3)))
        ok, dev, passed = _compare(P, q, g)
        agree &= ok
        worst = max(worst, dev)
        extremals += passed
    ok = agree and worst <= 1e-10 and extremals >= 25
    verdict(5, ok, f"50 pairs ({extremals} extremals), verdicts agree={agree}, max deviation={worst:.1e}")


# ---------------------------------------------------------------- 6
def test_criterion_6_autodiff(verdict):
    rng = np.random.default_rng(11)
    worst = 0.0
    h = 1e-6
    for _ in range(200):
        n = int(rng.integers(1, 3))
        t, q, v = rng.uniform(-1, 1), rng.uniform(-1, 1, n), rng.uniform(-1, 1, n)
        L = parse(random_lagrangian_text(rng, 6, n, probe=(t, q, v)), n)
        _, d1, d2, d3 = L.partials(t, q, v)
        pairs = [(d1, (L.eval(t + h, q, v) - L.eval(t - h, q, v)) / (2 * h))]
        for i in range(n):
            e = np.eye(n)[i] * h
            pairs.append((d2[i], (L.eval(t, q + e, v) - L.eval(t, q - e, v)) / (2 * h)))
            pairs.append((d3[i], (L.eval(t, q, v + e) - L.eval(t, q, v - e)) / (2 * h)))
        worst = max(worst, max(abs(ad - fd) / (1 + abs(ad)) for ad, fd in pairs))
    verdict(6, worst <= 1e-6, f"200 expressions, max relative error={worst:.1e}")


# ---------------------------------------------------------------- 7
def test_criterion_7_invariance(verdict):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(50):
        P, q, g = smooth_problem(rng, n=int(rng.integers(1, 3)))
        numeric = invariance_check_numeric(P, g, q, 1e-4).values
        analytic = invariance_residual(P, g, q).values
        worst = max(worst, float(np.max(np.abs(numeric - analytic) / (1 + np.abs(analytic)))))
    W = well_problem()
    qt = reconstruct(W.scale, 0.0, QTILDE_DERIVS)
    zero_an = float(np.max(np.abs(invariance_residual(W, TIME, qt).values)))
    zero_nu = float(np.max(np.abs(invariance_check_numeric(W, TIME, qt, 1e-4).values)))
    ok = worst <= 1e-6 and zero_an <= 1e-8 and zero_nu <= 1e-8
    verdict(7, ok, f"50 cases, max scaled gap={worst:.1e}; worked example analytic={zero_an:.1e} numeric={zero_nu:.1e}")


# ---------------------------------------------------------------- 8
def test_criterion_8_continuum(verdict):
    hs, errs = [], []
    for k in range(4, 11):
        T = uniform(0, 1, 2.0**-k)
        d = nabla_derivative(sample(T, lambda t: t**3))
        errs.append(float(np.max(np.abs(d.scalar() - 3 * d.points**2))))
        hs.append(2.0**-k)
    slope = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
    T = uniform(0, 1, 0.25)
    P = VariationalProblem(T, 0, 1, parse("v^2"), [0], [1])
    q = solve_el_newton(P, GridFunction(T, np.zeros(5)))
    E = el_residual_nabla(P, q).values
    system = float(np.max(np.abs(E[1:] - E[0])))
    line = float(np.max(np.abs(q.scalar() - T.points)))
    ok = abs(slope - 1.0) <= 0.2 and system <= 1e-10 and line <= 1e-10
    verdict(8, ok, f"slope={slope:.3f}, Newton system residual={system:.1e}, |q - t|={line:.1e}")
