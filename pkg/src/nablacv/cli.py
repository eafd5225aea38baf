"""Command-line front end: ``nablacv <command> problem.toml``.

Exit codes: 0 when every requested verdict passes, 1 when at least one
fails, 2 on input errors. The JSON report goes to ``--json`` (default
stdout); a short human summary goes to stderr.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import math
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from . import problemfile
from .errors import NablaCVError
from .search import classify, candidate_count, enumerate_candidates
from .variational import (
    NABLA,
    dbr_residual,
    el_residual,
    evaluate_functional,
    invariance_check_numeric,
    invariance_residual,
    noether_quantity,
)

COMMANDS = ("validate", "eval", "check-el", "check-dbr", "noether", "invariance", "dual", "enumerate")
AGREEMENT_TOL = 1e-6


class InputError(Exception):
    pass


# ---------------------------------------------------------------- JSON output
def _encode(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps_report(report: dict) -> str:
    """Stable JSON text; floats use 17 significant digits."""
    return _encode(report) + "\n"


# ---------------------------------------------------------------- checks
def _flat(values) -> list:
    arr = np.asarray(values, dtype=float)
    return arr.tolist()


def _constancy_block(report) -> dict:
    return {
        "domain": _flat(report.domain.points),
        "values": _flat(report.values),
        "spread": report.spread,
        "tolerance": report.tolerance,
        "verdict": report.verdict,
    }


def _trajectories(spec) -> dict:
    if not spec.trajectories:
        raise InputError(f"{spec.source}: [trajectory]: this command needs at least one trajectory")
    return spec.trajectories


def _run_eval(spec, args) -> List[dict]:
    P = spec.problem
    out = []
    for name, q in _trajectories(spec).items():
        defect = P.boundary_defect(q)
        out.append(
            {
                "check": "functional",
                "trajectory": name,
                "value": evaluate_functional(P, q),
                "boundary_defect": defect,
                "feasible": defect <= spec.boundary_tol,
            }
        )
    return out


def _run_el(spec, args) -> List[dict]:
    P = spec.problem
    return [
        {"check": f"euler-lagrange-{P.flavor}", "trajectory": name, **_constancy_block(el_residual(P, q, args.tol))}
        for name, q in _trajectories(spec).items()
    ]


def _run_dbr(spec, args) -> List[dict]:
    P = spec.problem
    out = []
    for name, q in _trajectories(spec).items():
        rep = dbr_residual(P, q, args.tol)
        block = {
            "check": f"dubois-reymond-{P.flavor}",
            "trajectory": name,
            "h_domain": _flat(rep.h.points),
            "h_values": _flat(rep.h.values[:, 0]),
            "residual_domain": _flat(rep.residual.points),
            "residual": _flat(rep.residual.values[:, 0]),
            "max_residual": rep.max_residual,
            "tolerance": rep.tolerance,
            "verdict": rep.verdict,
        }
        if rep.h_constancy is not None:
            block["h_spread"] = rep.h_constancy.spread
        out.append(block)
    return out


def _require_generators(spec):
    if spec.generators is None:
        raise InputError(f"{spec.source}: [symmetry]: this command needs a [symmetry] section")
    return spec.generators


def _run_noether(spec, args) -> List[dict]:
    P = spec.problem
    g = _require_generators(spec)
    tau, xi = g.texts
    out = []
    for name, q in _trajectories(spec).items():
        _, rep = noether_quantity(P, g, q, args.tol)
        out.append(
            {"check": f"noether-{P.flavor}", "trajectory": name, "tau": tau, "xi": list(xi), **_constancy_block(rep)}
        )
    return out


def _run_invariance(spec, args) -> List[dict]:
    P = spec.problem
    if P.flavor != NABLA:
        raise InputError(f"{spec.source}: [problem]: invariance checks need a nabla problem (use 'dual' first)")
    g = _require_generators(spec)
    out = []
    for name, q in _trajectories(spec).items():
        analytic = invariance_residual(P, g, q).values[:, 0]
        numeric = invariance_check_numeric(P, g, q, args.eps).values[:, 0]
        worst = float(np.max(np.abs(analytic)))
        agree = bool(np.all(np.abs(numeric - analytic) <= AGREEMENT_TOL * (1.0 + np.abs(analytic))))
        out.append(
            {
                "check": "invariance",
                "trajectory": name,
                "domain": _flat(q.scale.kappa_down().points),
                "analytic": _flat(analytic),
                "numeric": _flat(numeric),
                "eps": args.eps,
                "max_abs_analytic": worst,
                "agreement": agree,
                "tolerance": args.tol,
                "verdict": "pass" if worst <= args.tol else "fail",
            }
        )
    return out


def _run_enumerate(spec, args) -> dict:
    P = spec.problem
    if spec.alphabet is None:
        raise InputError(f"{spec.source}: [search]: this command needs a [search] section")
    cands = enumerate_candidates(P, spec.alphabet, spec.boundary_tol, args.cap)
    rows = classify(P, cands, spec.generators, args.tol, spec.boundary_tol)
    derivs = {c.id: c.derivs for c in cands}
    survivors = sum(r.el_pass and r.dbr_pass for r in rows)
    return {
        "alphabet": [list(c) for c in spec.alphabet.components],
        "candidates": candidate_count(P, spec.alphabet),
        "boundary_feasible": len(cands),
        "el_pass": sum(r.el_pass for r in rows),
        "dbr_pass": sum(r.dbr_pass for r in rows),
        "el_and_dbr_pass": survivors,
        "rows": [
            {
                "id": r.id,
                "derivs": [list(d) if len(d) > 1 else d[0] for d in derivs[r.id]],
                "feasible": r.feasible,
                "el": r.el_verdict,
                "dbr": r.dbr_verdict,
                "noether_spread": r.noether_spread,
                "value": r.value,
            }
            for r in rows
        ],
        "verdict": "pass" if survivors else "fail",
    }


_RUNNERS = {
    "eval": _run_eval,
    "check-el": _run_el,
    "check-dbr": _run_dbr,
    "noether": _run_noether,
    "invariance": _run_invariance,
}


def _echo(spec) -> dict:
    P = spec.problem
    echo = {
        "flavor": P.flavor,
        "n": P.n,
        "lagrangian": P.lagrangian.source,
        "scale": _flat(P.scale.points),
        "a": P.a,
        "b": P.b,
        "A": list(P.A),
        "B": list(P.B),
        "trajectories": list(spec.trajectories),
    }
    if spec.generators is not None:
        tau, xi = spec.generators.texts
        echo["symmetry"] = {"tau": tau, "xi": list(xi)}
    return echo


def _base_report(command: str, file: str) -> dict:
    return {
        "tool": "nablacv",
        "version": __version__,
        "command": command,
        "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "input": {"file": file},
    }


def _summary(report: dict) -> str:
    lines = [f"nablacv {report['command']}: {report.get('status', 'error')}"]
    for c in report.get("checks", []):
        verdict = c.get("verdict")
        detail = f"value={c['value']:.12g}" if "value" in c else f"verdict={verdict}"
        lines.append(f"  {c['check']:<22} {c['trajectory']:<16} {detail}")
    cl = report.get("classification")
    if cl:
        lines.append(
            f"  candidates={cl['candidates']} feasible={cl['boundary_feasible']} "
            f"el_pass={cl['el_pass']} dbr_pass={cl['dbr_pass']}"
        )
    for d in report.get("diagnostics", []):
        lines.append(f"  error: {d}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nablacv", description="Checks for nabla variational problems on time scales."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("file")
        p.add_argument("--tol", type=float, default=None, help="constancy tolerance (default from file or 1e-9)")
        p.add_argument("--eps", type=float, default=None, help="numeric invariance step (default 1e-4)")
        p.add_argument("--cap", type=int, default=None, help="enumeration cap (default 1e7)")
        p.add_argument("--json", dest="json_path", default=None, help="report destination (default stdout)")
        if name == "dual":
            p.add_argument("-o", "--output", default=None, help="write the dual problem file here (default stdout)")
    return parser


def _emit(text: str, path: Optional[str]):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    report = _base_report(args.command, args.file)
    try:
        spec = problemfile.load(args.file)
        args.tol = spec.constancy_tol if args.tol is None else args.tol
        args.eps = spec.eps if args.eps is None else args.eps
        args.cap = spec.cap if args.cap is None else args.cap
        raw = Path(args.file).read_bytes()
        report["input"]["sha256"] = hashlib.sha256(raw).hexdigest()
        report["input"]["problem"] = _echo(spec)
        report["input"]["tolerances"] = {"constancy": args.tol, "eps": args.eps, "boundary": spec.boundary_tol}

        if args.command == "dual":
            _emit(problemfile.dumps(problemfile.dual_spec(spec)), args.output)
            print(f"nablacv dual: wrote {args.output or 'stdout'}", file=sys.stderr)
            return 0
        if args.command == "validate":
            report["checks"] = []
        elif args.command == "enumerate":
            report["classification"] = _run_enumerate(spec, args)
        else:
            report["checks"] = _RUNNERS[args.command](spec, args)
    except (NablaCVError, InputError) as exc:
        report["status"] = "error"
        report["diagnostics"] = [str(exc)]
        _emit(dumps_report(report), args.json_path)
        print(_summary(report), file=sys.stderr)
        return 2

    verdicts = [c["verdict"] for c in report.get("checks", []) if "verdict" in c]
    if "classification" in report:
        verdicts.append(report["classification"]["verdict"])
    ok = all(v == "pass" for v in verdicts)
    report["status"] = "pass" if ok else "fail"
    report["diagnostics"] = []
    _emit(dumps_report(report), args.json_path)
    print(_summary(report), file=sys.stderr)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())
