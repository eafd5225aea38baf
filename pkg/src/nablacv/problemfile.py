"""TOML problem files (``schema = 1``).

Layout::

    schema = 1

    [timescale]
    kind = "uniform"          # "finite" (points), "uniform" (a, b, h) or "qscale" (q, kmin, kmax)
    a = 0
    b = 1
    h = "1/8"

    [problem]
    flavor = "nabla"          # or "delta"
    n = 1
    lagrangian = "(v^2 - 1)^2"
    a = 0
    b = 1
    A = 0                     # number or list of n numbers
    B = 0

    [symmetry]                # optional
    tau = "1"
    xi = ["0"]

    [[trajectory]]            # optional, repeatable
    name = "qtilde"
    values = [0, "1/8", 0, 0, 0, 0, 0, "1/8", 0]
    # or: derivs = [...] and anchor = ...

    [search]                  # optional
    alphabet = [-1, 0, 1]     # or one list per component
    cap = 10000000
    boundary_tol = 1e-9

    [tolerances]              # optional
    constancy = 1e-9
    eps = 1e-4

Numbers may also be written as strings holding a fraction such as ``"1/8"``.
Trajectory values cover either the whole time scale or just ``[a, b]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, Optional

import numpy as np
import tomli_w

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .calculus import GridFunction, dual_function
from .errors import ExpressionSyntaxError, NablaCVError, ProblemFileError
from .lagrangian import parse as parse_lagrangian
from .search import DEFAULT_CAP, DerivativeAlphabet, reconstruct
from .timescale import TimeScale, qscale, uniform
from .variational import BOUNDARY_TOL, DEFAULT_TOL, SymmetryGenerators, VariationalProblem, dual_problem

SCHEMA = 1


@dataclass
class ProblemSpec:
    problem: VariationalProblem
    generators: Optional[SymmetryGenerators] = None
    trajectories: Dict[str, GridFunction] = field(default_factory=dict)
    alphabet: Optional[DerivativeAlphabet] = None
    cap: int = DEFAULT_CAP
    boundary_tol: float = BOUNDARY_TOL
    constancy_tol: float = DEFAULT_TOL
    eps: float = 1e-4
    source: str = ""


class _Reader:
    def __init__(self, source: str):
        self.source = source

    def error(self, message: str, section: str = "", position=None) -> ProblemFileError:
        return ProblemFileError(message, self.source, section, position)

    def section(self, doc: dict, name: str, required: bool = True) -> dict:
        sec = doc.get(name)
        if sec is None:
            if required:
                raise self.error(f"missing section [{name}]")
            return {}
        if not isinstance(sec, dict):
            raise self.error(f"[{name}] must be a table", name)
        return sec

    def key(self, sec: dict, section: str, key: str, default=...):
        if key not in sec:
            if default is ...:
                raise self.error(f"missing key '{key}'", section)
            return default
        return sec[key]

    def number(self, x, section: str, key: str) -> float:
        if isinstance(x, bool):
            raise self.error(f"'{key}' must be a number", section)
        if isinstance(x, (int, float)):
            return float(x)
        if isinstance(x, str):
            try:
                return float(Fraction(x.strip()))
            except (ValueError, ZeroDivisionError):
                pass
        raise self.error(f"'{key}' must be a number or a fraction string, got {x!r}", section)

    def vector(self, x, n: int, section: str, key: str) -> np.ndarray:
        items = x if isinstance(x, list) else [x]
        vals = [self.number(v, section, key) for v in items]
        if len(vals) != n:
            raise self.error(f"'{key}' must have {n} component(s), got {len(vals)}", section)
        return np.array(vals)

    def rows(self, x, n: int, section: str, key: str) -> np.ndarray:
        if not isinstance(x, list) or not x:
            raise self.error(f"'{key}' must be a non-empty list", section)
        return np.array([self.vector(r, n, section, key) for r in x])

    def expression_error(self, exc: ExpressionSyntaxError, section: str, key: str) -> ProblemFileError:
        return self.error(f"'{key}': {exc.message}", section, exc.position)


def _timescale(r: _Reader, doc: dict) -> TimeScale:
    sec = r.section(doc, "timescale")
    kind = r.key(sec, "timescale", "kind", "finite")
    try:
        if kind == "finite":
            pts = r.key(sec, "timescale", "points")
            if not isinstance(pts, list):
                raise r.error("'points' must be a list", "timescale")
            return TimeScale([r.number(p, "timescale", "points") for p in pts])
        if kind == "uniform":
            a, b, h = (r.number(r.key(sec, "timescale", k), "timescale", k) for k in ("a", "b", "h"))
            return uniform(a, b, h)
        if kind == "qscale":
            q = r.number(r.key(sec, "timescale", "q"), "timescale", "q")
            kmin, kmax = (r.key(sec, "timescale", k) for k in ("kmin", "kmax"))
            return qscale(q, int(kmin), int(kmax))
    except ProblemFileError:
        raise
    except NablaCVError as exc:
        raise r.error(str(exc), "timescale") from None
    raise r.error(f"unknown kind {kind!r} (expected finite, uniform or qscale)", "timescale")


def _problem(r: _Reader, doc: dict, scale: TimeScale) -> VariationalProblem:
    sec = r.section(doc, "problem")
    n = r.key(sec, "problem", "n", 1)
    if not isinstance(n, int) or n < 1:
        raise r.error("'n' must be a positive integer", "problem")
    src = r.key(sec, "problem", "lagrangian")
    if not isinstance(src, str):
        raise r.error("'lagrangian' must be a string", "problem")
    try:
        L = parse_lagrangian(src, n)
    except ExpressionSyntaxError as exc:
        raise r.expression_error(exc, "problem", "lagrangian") from None
    a = r.number(r.key(sec, "problem", "a", scale.min), "problem", "a")
    b = r.number(r.key(sec, "problem", "b", scale.max), "problem", "b")
    A = r.vector(r.key(sec, "problem", "A"), n, "problem", "A")
    B = r.vector(r.key(sec, "problem", "B"), n, "problem", "B")
    flavor = r.key(sec, "problem", "flavor", "nabla")
    try:
        return VariationalProblem(scale, a, b, L, A, B, flavor)
    except (NablaCVError, ValueError) as exc:
        raise r.error(str(exc), "problem") from None


def load_text(text: str, source: str = "<string>") -> ProblemSpec:
    r = _Reader(source)
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise r.error(f"invalid TOML: {exc}") from None
    schema = doc.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise r.error(f"unsupported schema {schema!r} (this tool reads schema {SCHEMA})")
    scale = _timescale(r, doc)
    P = _problem(r, doc, scale)
    spec = ProblemSpec(problem=P, source=source)

    sym = r.section(doc, "symmetry", required=False)
    if sym:
        tau = r.key(sym, "symmetry", "tau", "0")
        xi = r.key(sym, "symmetry", "xi", ["0"] * P.n)
        xi = [xi] if isinstance(xi, str) else xi
        if len(xi) != P.n:
            raise r.error(f"'xi' needs {P.n} expression(s)", "symmetry")
        try:
            spec.generators = SymmetryGenerators.parse(str(tau), [str(x) for x in xi], P.n)
        except ExpressionSyntaxError as exc:
            raise r.expression_error(exc, "symmetry", "tau/xi") from None

    trajs = doc.get("trajectory", [])
    if isinstance(trajs, dict):
        trajs = [trajs]
    interval = P.interval
    for k, tr in enumerate(trajs):
        name = str(tr.get("name", f"trajectory{k}"))
        where = f"trajectory.{name}"
        if name in spec.trajectories:
            raise r.error(f"duplicate trajectory name {name!r}", where)
        if "values" in tr:
            vals = r.rows(tr["values"], P.n, where, "values")
            if len(vals) == len(scale):
                q = GridFunction(scale, vals).restrict(P.a, P.b)
            elif len(vals) == len(interval):
                q = GridFunction(interval, vals)
            else:
                raise r.error(
                    f"'values' needs {len(interval)} (interval) or {len(scale)} (scale) entries, got {len(vals)}",
                    where,
                )
        elif "derivs" in tr:
            d = r.rows(tr["derivs"], P.n, where, "derivs")
            anchor = r.vector(tr.get("anchor", list(P.A)), P.n, where, "anchor")
            if len(d) != len(interval) - 1:
                raise r.error(f"'derivs' needs {len(interval) - 1} entries, got {len(d)}", where)
            q = reconstruct(interval, anchor, d)
        else:
            raise r.error("a trajectory needs 'values' or 'derivs'", where)
        spec.trajectories[name] = q

    search = r.section(doc, "search", required=False)
    if search:
        alph = r.key(search, "search", "alphabet")
        if not isinstance(alph, list) or not alph:
            raise r.error("'alphabet' must be a non-empty list", "search")
        comps = alph if isinstance(alph[0], list) else [alph]
        if len(comps) != P.n:
            raise r.error(f"'alphabet' needs {P.n} component list(s)", "search")
        spec.alphabet = DerivativeAlphabet(tuple(tuple(r.number(x, "search", "alphabet") for x in c) for c in comps))
        spec.cap = int(r.key(search, "search", "cap", DEFAULT_CAP))
        spec.boundary_tol = r.number(r.key(search, "search", "boundary_tol", BOUNDARY_TOL), "search", "boundary_tol")

    tols = r.section(doc, "tolerances", required=False)
    if tols:
        spec.constancy_tol = r.number(tols.get("constancy", DEFAULT_TOL), "tolerances", "constancy")
        spec.eps = r.number(tols.get("eps", 1e-4), "tolerances", "eps")
    return spec


def load(path) -> ProblemSpec:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemFileError(f"cannot read file: {exc.strerror}", str(path)) from None
    return load_text(text, str(path))


def to_document(spec: ProblemSpec) -> dict:
    """Plain-dict form of ``spec``; the time scale is always written as explicit points."""
    P = spec.problem

    def vec(v):
        return [float(x) for x in v] if P.n > 1 else float(v[0])

    doc = {
        "schema": SCHEMA,
        "timescale": {"kind": "finite", "points": [float(x) for x in P.scale.points]},
        "problem": {
            "flavor": P.flavor,
            "n": P.n,
            "lagrangian": P.lagrangian.text,
            "a": float(P.a),
            "b": float(P.b),
            "A": vec(P.A),
            "B": vec(P.B),
        },
    }
    if spec.generators is not None:
        tau, xi = spec.generators.texts
        doc["symmetry"] = {"tau": tau, "xi": list(xi)}
    if spec.trajectories:
        doc["trajectory"] = [
            {"name": name, "values": [vec(row) for row in q.values]} for name, q in spec.trajectories.items()
        ]
    if spec.alphabet is not None:
        comps = [[float(x) for x in c] for c in spec.alphabet.components]
        doc["search"] = {
            "alphabet": comps if P.n > 1 else comps[0],
            "cap": spec.cap,
            "boundary_tol": float(spec.boundary_tol),
        }
    doc["tolerances"] = {"constancy": float(spec.constancy_tol), "eps": float(spec.eps)}
    return doc


def dumps(spec: ProblemSpec) -> str:
    return tomli_w.dumps(to_document(spec))


def dual_spec(spec: ProblemSpec) -> ProblemSpec:
    """The same file content transported to the dual problem."""
    return ProblemSpec(
        problem=dual_problem(spec.problem),
        generators=spec.generators.dual() if spec.generators is not None else None,
        trajectories={name: dual_function(q) for name, q in spec.trajectories.items()},
        alphabet=spec.alphabet.negated() if spec.alphabet is not None else None,
        cap=spec.cap,
        boundary_tol=spec.boundary_tol,
        constancy_tol=spec.constancy_tol,
        eps=spec.eps,
        source=spec.source,
    )
