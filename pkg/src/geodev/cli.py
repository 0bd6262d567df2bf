"""Command-line front end.

``converge`` runs residual convergence studies from a JSON config and writes
``samples.csv`` plus ``report.json``; ``inspect`` prints geometric objects of
a configured scenario as JSON; ``list`` prints the scenario registry.

The config file is the single source of scientific truth; flags only control
reporting.  Exit codes: 0 success, 1 failed order threshold, 2 bad
config/arguments, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy

from . import __version__
from .equations import (DEFAULT_LADDER, ConvergenceReport, EquationId,
                        convergence_study)
from .errors import ConfigError, GeodevError
from .geometry import ChartPoint, PathCurve, Tangent, curvature_at, torsion_at
from .kinematics import Scenario, worldline
from .scenarios import ScenarioSpec, build, list_scenarios
from .transport import OdeConfig, s_tensor, transport_matrix

__all__ = ["main", "run_converge", "dump_json"]

DEFAULT_ORDER_THRESHOLD = 1.9


# ----------------------------------------------------------- deterministic IO

def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ConfigError(f"cannot serialize non-finite float {x}")
    if x == int(x) and abs(x) < 1e16:
        return f"{x:.1f}"
    return f"{x:.17g}"


def dump_json(obj, indent: int = 0) -> str:
    """Deterministic JSON: sorted keys, floats at 17 significant digits."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dump_json(obj[k], indent + 1)}"
                 for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not len(obj):
            return "[]"
        items = [f"{inner}{dump_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    raise ConfigError(f"cannot serialize {type(obj).__name__} to JSON")


# ------------------------------------------------------------- config parsing

_RUN_KEYS = {"s_eval", "r_base", "epsilon_ladder", "equations", "tolerances"}
_TOL_KEYS = {"rel_tol", "abs_tol", "max_steps"}


def _require_keys(mapping: dict, allowed: set, context: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {context}")


def load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config root must be an object")
    _require_keys(config, {"scenario", "params", "run"}, "config")
    if "scenario" not in config or not isinstance(config["scenario"], str):
        raise ConfigError("config requires a 'scenario' name")
    params = config.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("'params' must be an object of numbers")
    for key, value in params.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"parameter '{key}' must be a number")
    run = config.get("run", {})
    if not isinstance(run, dict):
        raise ConfigError("'run' must be an object")
    _require_keys(run, _RUN_KEYS, "'run'")
    tolerances = run.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise ConfigError("'tolerances' must be an object")
    _require_keys(tolerances, _TOL_KEYS, "'run.tolerances'")
    return config


def _parse_equations(run: dict) -> List[EquationId]:
    names = run.get("equations")
    if names is None:
        return list(EquationId)
    if not isinstance(names, list) or not names:
        raise ConfigError("'equations' must be a non-empty array of ids")
    out = []
    for name in names:
        try:
            out.append(EquationId(name))
        except ValueError:
            known = ", ".join(e.value for e in EquationId)
            raise ConfigError(f"unknown equation id '{name}' (known: {known})")
    return out


def _parse_ladder(run: dict) -> tuple:
    ladder = run.get("epsilon_ladder")
    if ladder is None:
        return DEFAULT_LADDER
    if (not isinstance(ladder, list) or len(ladder) < 5
            or not all(isinstance(e, (int, float)) and not isinstance(e, bool)
                       for e in ladder)):
        raise ConfigError("'epsilon_ladder' must be an array of >= 5 numbers")
    values = tuple(float(e) for e in ladder)
    if any(e <= 0 for e in values):
        raise ConfigError("'epsilon_ladder' entries must be positive")
    if any(b >= a for a, b in zip(values, values[1:])):
        raise ConfigError("'epsilon_ladder' must be strictly decreasing")
    return values


def _parse_tolerances(run: dict) -> OdeConfig:
    tol = run.get("tolerances", {})
    try:
        return OdeConfig(rel_tol=float(tol.get("rel_tol", 1e-10)),
                         abs_tol=float(tol.get("abs_tol", 1e-12)),
                         max_steps=int(tol.get("max_steps", 10**6)))
    except ValueError as exc:
        raise ConfigError(f"bad tolerances: {exc}") from exc


def _scenario_from_config(config: dict) -> Scenario:
    run = config.get("run", {})
    spec = ScenarioSpec(
        name=config["scenario"],
        parameters=config.get("params", {}),
        r_base=run.get("r_base"),
        s_eval=run.get("s_eval"),
    )
    return build(spec)


# ----------------------------------------------------------------- converge

def _report_payload(report: ConvergenceReport, s_eval: float) -> dict:
    return {
        "equation": report.eq.value,
        "scenario": report.scenario_label,
        "s_eval": s_eval,
        "exact": report.exact,
        "floor_detected": report.floor_detected,
        "fitted_order": report.fitted_order,
        "fit_r2": report.fit_r2,
        "n_fit_points": report.n_fit_points,
        "epsilon_ladder": list(report.epsilon_ladder),
        "samples": [
            {"epsilon": smp.epsilon, "residual_norm": smp.residual_norm,
             "wall_time_ms": smp.wall_time * 1e3}
            for smp in report.samples
        ],
    }


def _report_status(report: ConvergenceReport, threshold: float) -> str:
    if report.exact:
        return "exact"
    if report.fitted_order is None:
        return "floor"
    return "ok" if report.fitted_order >= threshold else "fail"


def run_converge(config: dict, threshold: float = DEFAULT_ORDER_THRESHOLD,
                 quiet: bool = True, stream=None) -> dict:
    """Run the configured studies and return the full result payload plus
    the csv rows; raises GeodevError subclasses on failure."""
    scenario = _scenario_from_config(config)
    run = config.get("run", {})
    equations = _parse_equations(run)
    ladder = _parse_ladder(run)
    cfg = _parse_tolerances(run)
    s_eval = scenario.s_eval
    try:
        scenario.separation_endpoints(max(ladder))
    except GeodevError as exc:
        raise ConfigError(f"epsilon ladder incompatible with scenario: {exc}")

    started = time.perf_counter()
    reports = []
    for eq in equations:
        report = convergence_study(eq, scenario, s_eval, ladder, cfg)
        reports.append(report)
        if not quiet and stream is not None:
            status = _report_status(report, threshold)
            order = ("n/a" if report.fitted_order is None
                     else f"{report.fitted_order:.3f}")
            r2 = "n/a" if report.fit_r2 is None else f"{report.fit_r2:.4f}"
            print(f"{eq.value:6s} {scenario.label:26s} order={order:>6s} "
                  f"r2={r2:>6s} [{status}]", file=stream)
    total = (time.perf_counter() - started) * 1e3

    payload = {
        "config": config,
        "order_threshold": threshold,
        "reports": [_report_payload(rep, s_eval) for rep in reports],
        "tolerances": {"rel_tol": cfg.rel_tol, "abs_tol": cfg.abs_tol},
        "versions": {"geodev": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__},
        "total_wall_time_ms": total,
    }
    rows = []
    for report in reports:
        for smp in report.samples:
            rows.append((report.eq.value, report.scenario_label, smp.s,
                         smp.epsilon, smp.residual_norm, smp.wall_time * 1e3))
    failed = any(_report_status(rep, threshold) == "fail" for rep in reports)
    return {"payload": payload, "rows": rows, "failed": failed}


def _write_outputs(outdir: str, result: dict) -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["equation,scenario,s,epsilon,residual_norm,wall_time_ms"]
    for eq, label, s, eps, norm, ms in result["rows"]:
        lines.append(f"{eq},{label},{_format_float(s)},{_format_float(eps)},"
                     f"{_format_float(norm)},{ms:.3f}")
    (out / "samples.csv").write_text("\n".join(lines) + "\n")
    (out / "report.json").write_text(dump_json(result["payload"]) + "\n")


def cmd_converge(args) -> int:
    config = load_config(args.config)
    result = run_converge(config, threshold=args.order_threshold,
                          quiet=args.quiet, stream=sys.stdout)
    _write_outputs(args.out, result)
    return 1 if result["failed"] else 0


# ------------------------------------------------------------------- inspect

def _latitude_path(theta0: float) -> PathCurve:
    def pmap(t: float) -> ChartPoint:
        return ChartPoint(np.array([theta0, t]))

    def ptan(t: float) -> Tangent:
        return Tangent(pmap(t), np.array([0.0, 1.0]))

    return PathCurve(map=pmap, tangent=ptan, domain=(0.0, 2.0 * math.pi),
                     second_derivative=lambda t: np.zeros(2))


def cmd_inspect(args) -> int:
    config = load_config(args.config)
    scenario = _scenario_from_config(config)
    at_s = scenario.s_eval if args.at_s is None else args.at_s
    line = worldline(scenario, 1)
    if args.point is not None:
        if len(args.point) != scenario.dimension:
            raise ConfigError(
                f"--point needs {scenario.dimension} coordinates")
        point = ChartPoint(np.asarray(args.point, float))
    else:
        point = line.map(at_s)

    out: Dict[str, object] = {"what": args.what, "scenario": scenario.label}
    if args.what == "torsion":
        out["point"] = point.coords.tolist()
        out["components"] = torsion_at(scenario.conn, point).entries.tolist()
    elif args.what == "curvature":
        out["point"] = point.coords.tolist()
        out["components"] = curvature_at(scenario.conn, point).entries.tolist()
    elif args.what == "s-tensor":
        out["at_s"] = at_s
        out["point"] = line.map(at_s).coords.tolist()
        out["components"] = s_tensor(scenario.law, scenario.conn, line,
                                     at_s).entries.tolist()
    else:  # transport
        if args.latitude is not None:
            if scenario.label not in ("sphere", "offset-transport"):
                raise ConfigError(
                    "--latitude transport needs a sphere-chart scenario")
            path = _latitude_path(args.latitude)
            frm, to = 0.0, 2.0 * math.pi
        else:
            frm = line.domain[0] if args.from_s is None else args.from_s
            to = line.domain[1] if args.to_s is None else args.to_s
            path = line
        mat = transport_matrix(scenario.law, path, frm, to)
        out["from"] = frm
        out["to"] = to
        out["components"] = mat.entries.tolist()
    print(dump_json(out))
    return 0


def cmd_list(_args) -> int:
    print(dump_json(list_scenarios()))
    return 0


# ---------------------------------------------------------------------- main

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geodev",
        description="Numerical verification harness for deviation equations "
                    "in spaces with a linear transport along paths.")
    sub = parser.add_subparsers(dest="command", required=True)

    conv = sub.add_parser("converge", help="run convergence studies")
    conv.add_argument("--config", required=True, help="JSON config path")
    conv.add_argument("--out", required=True, help="output directory")
    conv.add_argument("--order-threshold", type=float,
                      default=DEFAULT_ORDER_THRESHOLD,
                      help="minimum fitted order for exit success")
    conv.add_argument("--quiet", action="store_true",
                      help="suppress per-equation progress lines")
    conv.set_defaults(func=cmd_converge)

    insp = sub.add_parser("inspect", help="print geometric objects as JSON")
    insp.add_argument("--config", required=True)
    insp.add_argument("--what", required=True,
                      choices=["torsion", "curvature", "s-tensor", "transport"])
    insp.add_argument("--point", type=float, nargs="+",
                      help="chart coordinates (default: worldline point)")
    insp.add_argument("--at-s", type=float, default=None,
                      help="worldline parameter for the evaluation point")
    insp.add_argument("--from-s", type=float, default=None)
    insp.add_argument("--to-s", type=float, default=None)
    insp.add_argument("--latitude", type=float, default=None,
                      help="transport around a full latitude circle")
    insp.set_defaults(func=cmd_inspect)

    lst = sub.add_parser("list", help="list registered scenario families")
    lst.set_defaults(func=cmd_list)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except GeodevError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
