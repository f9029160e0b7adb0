"""Command-line front end.

Subcommands: deriv, integrate, el-check, evaluate, minimize, demo.
Run configurations are strict JSON (unknown keys are errors) so runs
stay reproducible; command-line flags override config values.

Exit codes are a stable contract:
  0 success / check passed
  1 check failed (residuals or boundary over tolerance, demo failure,
    minimizer did not converge)
  2 input error (flags, config schema, expression syntax, arity)
  3 evaluation error (domain faults, non-finite values, lattice too
    shallow, degenerate stencils)
  4 series non-convergence (integrate / evaluate)

All numbers are rendered with 17 significant digits in json and csv
modes, which round-trips IEEE doubles exactly.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Callable, Sequence

from . import demos
from .core import DEFAULT_DEPTH, DEFAULT_MAX_TERMS, DEFAULT_TOL, GridFunction, HahnParams
from .dsl import Expr, Var, evaluate, parse
from .errors import (
    ArityError,
    ConfigError,
    DegenerateDenominator,
    DomainError,
    ExprSyntaxError,
    HahnvarError,
    InsufficientDepth,
    NonFiniteValue,
    NotAVariation,
    NotDifferentiable,
    UnboundVariable,
    UnknownIdentifier,
)
from .integrals import integral
from .minimize import minimize_direct
from .operators import hahn_derivative_n
from .variational import Problem, el_report, functional_value

_INPUT_ERRORS = (ConfigError, ExprSyntaxError, UnknownIdentifier, ArityError)
_EVAL_ERRORS = (
    DomainError,
    NonFiniteValue,
    UnboundVariable,
    DegenerateDenominator,
    InsufficientDepth,
    NotDifferentiable,
    NotAVariation,
)

_FORMATS = ("table", "json", "csv")

_BUILTIN_CANDIDATES: dict[str, Callable[[float], float]] = {"ystar": demos.ystar}

_BUILTIN_CONFIGS: dict[str, dict] = {
    "double-well": {
        "q": 0.5,
        "omega": 0.5,
        "a": -1.0,
        "b": 1.0,
        "r": 1,
        "lagrangian": "(u0 + 0.5)^2 * (u1^2 - 1)^2",
        "alpha": [0.0],
        "beta": [-1.0],
        "candidate": {"type": "builtin", "name": "ystar"},
        "depth": 40,
        "tol": 1e-9,
    }
}


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _fmt_num(x: float) -> str:
    return format(x, ".17g")


def _json_scalar(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_num(v)
    if isinstance(v, int):
        return str(v)
    if v is None:
        return "null"
    return json.dumps(v)


def _emit_json(obj: Any) -> str:
    if isinstance(obj, dict):
        inner = ", ".join(f"{json.dumps(str(k))}: {_emit_json(v)}" for k, v in obj.items())
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_emit_json(v) for v in obj) + "]"
    return _json_scalar(obj)


def _table_cell(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_num(v)
    return str(v)


def _render_table(report: dict, out: list[str], prefix: str = "") -> None:
    rows_pending: list[tuple[str, list[dict]]] = []
    lists_pending: list[tuple[str, list]] = []
    for key, value in report.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            _render_table(value, out, prefix=f"{name}.")
        elif isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
            rows_pending.append((name, value))
        elif isinstance(value, (list, tuple)):
            lists_pending.append((name, list(value)))
        else:
            out.append(f"{name} = {_table_cell(value)}")
    for name, items in lists_pending:
        for i, v in enumerate(items):
            out.append(f"{name}[{i}] = {_table_cell(v)}")
    for name, rows in rows_pending:
        out.append("")
        out.append(f"[{name}]")
        headers = list(rows[0].keys())
        cells = [[_table_cell(r.get(h, "")) for h in headers] for r in rows]
        widths = [
            max(len(headers[c]), max(len(row[c]) for row in cells)) for c in range(len(headers))
        ]
        out.append("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
        for row in cells:
            out.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))


def _render_csv(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(headers)
    for row in rows:
        writer.writerow([_table_cell(v) for v in row])
    return buf.getvalue().rstrip("\n")


def _output(args, report: dict, headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    fmt = args.format or "table"
    if fmt == "json":
        print(_emit_json(report))
    elif fmt == "csv":
        print(_render_csv(headers, rows))
    else:
        lines: list[str] = []
        _render_table(report, lines)
        print("\n".join(lines))


# ---------------------------------------------------------------------------
# Config handling
# ---------------------------------------------------------------------------

def _require_real(cfg: dict, key: str) -> float:
    v = cfg.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"config key {key!r} must be a number")
    if not math.isfinite(v):
        raise ConfigError(f"config key {key!r} must be finite")
    return float(v)


def _require_int(cfg: dict, key: str) -> int:
    v = cfg.get(key)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"config key {key!r} must be an integer")
    return v


def _require_real_list(cfg: dict, key: str) -> list[float]:
    v = cfg.get(key)
    if not isinstance(v, list):
        raise ConfigError(f"config key {key!r} must be an array of numbers")
    out = []
    for item in v:
        if isinstance(item, bool) or not isinstance(item, (int, float)) or not math.isfinite(item):
            raise ConfigError(f"config key {key!r} must contain finite numbers")
        out.append(float(item))
    return out


_CONFIG_KEYS = {
    "q",
    "omega",
    "a",
    "b",
    "r",
    "lagrangian",
    "alpha",
    "beta",
    "candidate",
    "depth",
    "tol",
    "max_terms",
    "include_omega0",
    "format",
}
_REQUIRED_KEYS = ("q", "omega", "a", "b", "r", "lagrangian", "alpha", "beta")


def _load_config(args) -> dict:
    if getattr(args, "builtin", None):
        name = args.builtin
        if name not in _BUILTIN_CONFIGS:
            raise ConfigError(
                f"unknown builtin config {name!r}; choose from {', '.join(_BUILTIN_CONFIGS)}"
            )
        cfg = json.loads(json.dumps(_BUILTIN_CONFIGS[name]))
    elif getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    else:
        raise ConfigError("provide a config file or --builtin NAME")
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    missing = [k for k in _REQUIRED_KEYS if k not in cfg]
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(missing)}")
    if not isinstance(cfg.get("lagrangian"), str):
        raise ConfigError("config key 'lagrangian' must be a string")
    if "format" in cfg and cfg["format"] not in _FORMATS:
        raise ConfigError(f"config key 'format' must be one of {', '.join(_FORMATS)}")
    if "include_omega0" in cfg and not isinstance(cfg["include_omega0"], bool):
        raise ConfigError("config key 'include_omega0' must be a boolean")
    for key in ("depth", "max_terms"):
        if key in cfg:
            _require_int(cfg, key)
    if "tol" in cfg:
        _require_real(cfg, "tol")
    return cfg


def _build_problem(cfg: dict) -> Problem:
    try:
        return Problem(
            params=HahnParams(_require_real(cfg, "q"), _require_real(cfg, "omega")),
            r=_require_int(cfg, "r"),
            a=_require_real(cfg, "a"),
            b=_require_real(cfg, "b"),
            alpha=tuple(_require_real_list(cfg, "alpha")),
            beta=tuple(_require_real_list(cfg, "beta")),
            lagrangian=cfg["lagrangian"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _expr_of_t(source: str) -> Expr:
    tree = parse(source)

    def check(node: Expr) -> None:
        if isinstance(node, Var) and node.name != "t":
            raise ConfigError(f"candidate expression may only use t, found {node.name!r}")
        for child in getattr(node, "__dict__", {}).values():
            if isinstance(child, Expr):
                check(child)

    check(tree)
    return tree


def _table_candidate(problem: Problem, entry: dict, depth: int) -> GridFunction:
    unknown = set(entry) - {"type", "rows", "omega0"}
    if unknown:
        raise ConfigError(f"unknown table candidate keys: {', '.join(sorted(unknown))}")
    rows = entry.get("rows")
    if not isinstance(rows, list):
        raise ConfigError("table candidate needs a 'rows' array")
    if "omega0" not in entry:
        raise ConfigError("table candidate needs an 'omega0' value")
    fixed = entry["omega0"]
    if isinstance(fixed, bool) or not isinstance(fixed, (int, float)):
        raise ConfigError("table candidate 'omega0' must be a number")
    values: dict[str, dict[int, float]] = {"a": {}, "b": {}}
    for row in rows:
        if not (isinstance(row, list) and len(row) == 3):
            raise ConfigError("table rows must be [origin, n, value] triples")
        origin, n, value = row
        if origin not in values:
            raise ConfigError(f"table row origin must be 'a' or 'b', got {origin!r}")
        if isinstance(n, bool) or not isinstance(n, int) or n < 0:
            raise ConfigError(f"table row index must be a nonnegative integer, got {n!r}")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"table row value must be a number, got {value!r}")
        if n in values[origin]:
            raise ConfigError(f"duplicate table row for ({origin!r}, {n})")
        values[origin][n] = float(value)
    for origin, got in values.items():
        missing = [str(n) for n in range(depth + 1) if n not in got]
        if missing:
            raise ConfigError(
                f"table candidate misses orbit {origin!r} indices: {', '.join(missing[:8])}"
                + ("..." if len(missing) > 8 else "")
            )
    return GridFunction(
        problem.lattice(depth),
        values_a=[values["a"][n] for n in range(depth + 1)],
        values_b=[values["b"][n] for n in range(depth + 1)],
        value_at_fixed=float(fixed),
    )


def _resolve_candidate(args, cfg: dict, problem: Problem, depth: int):
    if getattr(args, "candidate_expr", None) is not None:
        return _expr_of_t(args.candidate_expr)
    if getattr(args, "candidate_builtin", None) is not None:
        name = args.candidate_builtin
        if name not in _BUILTIN_CANDIDATES:
            raise ConfigError(f"unknown builtin candidate {name!r}")
        return _BUILTIN_CANDIDATES[name]
    entry = cfg.get("candidate")
    if entry is None:
        raise ConfigError("config has no candidate; add one or pass --candidate-expr")
    if not isinstance(entry, dict) or "type" not in entry:
        raise ConfigError("candidate must be an object with a 'type' tag")
    kind = entry["type"]
    if kind == "expr":
        if set(entry) != {"type", "value"} or not isinstance(entry.get("value"), str):
            raise ConfigError("expr candidate must be {'type': 'expr', 'value': string}")
        return _expr_of_t(entry["value"])
    if kind == "builtin":
        if set(entry) != {"type", "name"} or entry.get("name") not in _BUILTIN_CANDIDATES:
            raise ConfigError(
                f"builtin candidate must name one of: {', '.join(_BUILTIN_CANDIDATES)}"
            )
        return _BUILTIN_CANDIDATES[entry["name"]]
    if kind == "table":
        return _table_candidate(problem, entry, depth)
    raise ConfigError(f"unknown candidate type {kind!r}")


def _setting(args, cfg: dict, key: str, default):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in cfg:
        return cfg[key]
    return default


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_deriv(args) -> int:
    if args.order < 0:
        raise ConfigError("--order must be nonnegative")
    params = HahnParams(args.q, args.omega)
    expr = _expr_of_t(args.expr)
    value = hahn_derivative_n(params, lambda t: evaluate(expr, {"t": t}), args.order, args.t)
    report = {
        "q": args.q,
        "omega": args.omega,
        "expr": args.expr,
        "t": args.t,
        "order": args.order,
        "value": value,
    }
    _output(args, report, list(report.keys()), [list(report.values())])
    return 0


def _cmd_integrate(args) -> int:
    params = HahnParams(args.q, args.omega)
    expr = _expr_of_t(args.expr)
    tol = args.tol if args.tol is not None else DEFAULT_TOL
    max_terms = args.max_terms if args.max_terms is not None else DEFAULT_MAX_TERMS
    result = integral(params, lambda t: evaluate(expr, {"t": t}), args.a, args.b, tol, max_terms)
    report = {
        "q": args.q,
        "omega": args.omega,
        "expr": args.expr,
        "a": args.a,
        "b": args.b,
        "value": result.value,
        "terms_used": result.terms_used,
        "tail_bound": result.tail_bound,
        "converged": result.converged,
    }
    _output(args, report, list(report.keys()), [list(report.values())])
    if not result.converged:
        print(
            f"series did not converge within {max_terms} terms "
            f"(tail bound {_fmt_num(result.tail_bound)})",
            file=sys.stderr,
        )
        return 4
    return 0


def _problem_echo(problem: Problem) -> dict:
    return {
        "q": problem.params.q,
        "omega": problem.params.omega,
        "a": problem.a,
        "b": problem.b,
        "r": problem.r,
        "lagrangian": str(problem.lagrangian),
    }


def _cmd_evaluate(args) -> int:
    cfg = _load_config(args)
    problem = _build_problem(cfg)
    depth = int(_setting(args, cfg, "depth", DEFAULT_DEPTH))
    tol = float(_setting(args, cfg, "tol", DEFAULT_TOL))
    max_terms = int(_setting(args, cfg, "max_terms", DEFAULT_MAX_TERMS))
    candidate = _resolve_candidate(args, cfg, problem, depth)
    result = functional_value(problem, candidate, tol=tol, max_terms=max_terms)
    report = {
        "problem": _problem_echo(problem),
        "value": result.value,
        "terms_used": result.terms_used,
        "tail_bound": result.tail_bound,
        "converged": result.converged,
    }
    headers = ["value", "terms_used", "tail_bound", "converged"]
    _output(args, report, headers, [[report[h] for h in headers]])
    return 0 if result.converged else 4


def _cmd_el_check(args) -> int:
    cfg = _load_config(args)
    problem = _build_problem(cfg)
    depth = int(_setting(args, cfg, "depth", DEFAULT_DEPTH))
    tol = float(_setting(args, cfg, "tol", 1e-9))
    include_omega0 = bool(_setting(args, cfg, "include_omega0", False))
    candidate = _resolve_candidate(args, cfg, problem, depth)
    report = el_report(problem, candidate, depth=depth, tol=tol, include_omega0=include_omega0)
    residual_rows = [
        {"origin": point.origin.value, "n": point.n, "residual": value}
        for point, value in sorted(
            report.residuals.items(), key=lambda kv: (kv[0].origin.value, kv[0].n)
        )
    ]
    violation_rows = [
        {
            "endpoint": v.endpoint,
            "index": v.index,
            "actual": v.actual,
            "target": v.target,
            "error": v.error,
        }
        for v in report.boundary_violations
    ]
    out = {
        "problem": _problem_echo(problem),
        "depth": depth,
        "tol": tol,
        "max_abs_residual": report.max_abs_residual,
        "depth_used": report.depth_used,
        "omega0_included": report.omega0_included,
        "omega0_residual": report.omega0_residual,
        "passed": report.passed,
        "boundary_violations": violation_rows,
        "residuals": residual_rows,
    }
    _output(
        args,
        out,
        ["origin", "n", "residual"],
        [[r["origin"], r["n"], r["residual"]] for r in residual_rows],
    )
    return 0 if report.passed else 1


def _cmd_minimize(args) -> int:
    cfg = _load_config(args)
    problem = _build_problem(cfg)
    depth = int(_setting(args, cfg, "depth", DEFAULT_DEPTH))
    step_tol = float(_setting(args, cfg, "tol", 1e-10))
    seed = args.seed if args.seed is not None else 0
    result = minimize_direct(
        problem,
        depth=depth,
        seed=seed,
        max_iters=args.max_iters,
        step_tol=step_tol,
    )
    report = {
        "problem": _problem_echo(problem),
        "depth": depth,
        "seed": seed,
        "objective": result.objective,
        "functional": result.functional,
        "converged": result.converged,
        "iterations": result.iterations,
        "boundary_violation_norm": result.boundary_violation_norm,
        "penalty_weight": result.penalty_weight,
        "history": result.history,
    }
    _output(
        args,
        report,
        ["iteration", "objective"],
        [[i, v] for i, v in enumerate(result.history)],
    )
    return 0 if result.converged else 1


def _cmd_demo(args) -> int:
    kwargs: dict[str, Any] = {}
    if args.name == "double-well":
        if args.depth is not None:
            kwargs["depth"] = args.depth
        if args.seed is not None:
            kwargs["seed"] = args.seed
        if args.tol is not None:
            kwargs["tol"] = args.tol
        kwargs["include_omega0"] = bool(args.include_omega0)
        report = demos.run_double_well(**kwargs)
        rows = [[k, v] for k, v in report["functional"].items()]
        _output(args, report, ["field", "value"], rows)
    else:
        if args.depth is not None:
            kwargs["depth"] = args.depth
        report = demos.run_beam(**kwargs)
        _output(
            args,
            report,
            ["q", "omega", "max_abs_residual"],
            [[c["q"], c["omega"], c["max_abs_residual"]] for c in report["cases"]],
        )
    return 0 if report["passed"] else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--format", choices=_FORMATS, default=None, help="output format")
    shared.add_argument("--tol", type=float, default=None, help="tolerance override")
    shared.add_argument("--depth", type=int, default=None, help="lattice depth override")
    shared.add_argument("--max-terms", dest="max_terms", type=int, default=None)
    shared.add_argument("--seed", type=int, default=None, help="rng seed where applicable")
    shared.add_argument(
        "--include-omega0",
        action="store_true",
        help="also check the extrapolated residual at the fixed point",
    )

    config_src = argparse.ArgumentParser(add_help=False)
    config_src.add_argument("config", nargs="?", help="path to a JSON run config")
    config_src.add_argument("--builtin", help="use a named builtin config (double-well)")
    config_src.add_argument("--candidate-expr", help="override candidate with an expression of t")
    config_src.add_argument("--candidate-builtin", help="override candidate with a builtin name")

    parser = argparse.ArgumentParser(
        prog="hahnvar",
        description="Quantum-lattice variational calculus: derivatives, integrals, "
        "stationarity checks, and a direct minimizer.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("deriv", parents=[shared], help="lattice derivative of an expression")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--expr", required=True, help="expression in t")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--order", type=int, default=1)
    p.set_defaults(func=_cmd_deriv)

    p = sub.add_parser("integrate", parents=[shared], help="lattice integral of an expression")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--expr", required=True, help="expression in t")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.set_defaults(func=_cmd_integrate)

    p = sub.add_parser(
        "evaluate", parents=[shared, config_src], help="functional value of a candidate"
    )
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser(
        "el-check", parents=[shared, config_src], help="stationarity residual report"
    )
    p.set_defaults(func=_cmd_el_check)

    p = sub.add_parser(
        "minimize", parents=[shared, config_src], help="direct search for a minimizer"
    )
    p.add_argument("--max-iters", dest="max_iters", type=int, default=5000)
    p.set_defaults(func=_cmd_minimize)

    p = sub.add_parser("demo", parents=[shared], help="run a built-in demonstration")
    p.add_argument("name", choices=list(demos.DEMO_NAMES))
    p.set_defaults(func=_cmd_demo)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _EVAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except HahnvarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
