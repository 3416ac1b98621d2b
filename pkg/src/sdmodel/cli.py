"""Command-line entry point.

Exit codes: 0 success, 1 parse/validation/input errors (including bad
arguments), 2 runtime errors during simulation, calibration or evaluation.
Diagnostics go to stderr; results go to files, or to stdout where noted.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from . import io as sio
from .calibration import FlowObservation, ProductionObservation, fit_population_flow, fit_production
from .errors import InputError, ModelError
from .scenario import compare_scenarios, evaluate_horizons, load_scenario, run_scenario

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _read_scenario(path: str):
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: cannot read scenario file ({exc.strerror})") from None
    return text, load_scenario(text, str(p))


def _format_for(path: str, explicit: str | None) -> str:
    if explicit:
        return explicit
    return "json" if Path(path).suffix.lower() == ".json" else "csv"


def _write(path: str, writer) -> None:
    try:
        writer()
    except OSError as exc:
        raise ModelError(f"{path}: cannot write output ({exc.strerror})") from None


def cmd_validate(args) -> int:
    _, scenario = _read_scenario(args.scenario)
    print(f"{args.scenario}: ok ({scenario.name}, {scenario.start:g}-{scenario.end:g}, "
          f"{len(scenario.overrides)} overrides, {len(scenario.horizons)} horizon targets)")
    return EXIT_OK


def cmd_simulate(args) -> int:
    text, scenario = _read_scenario(args.scenario)
    trajectory, report = run_scenario(scenario)
    out = args.out
    fmt = _format_for(out, args.format)
    _write(out, lambda: sio.emit_trajectory(trajectory, fmt, out))
    _write(out, lambda: sio.write_json(f"{out}.report.json", report.to_dict()))
    meta = sio.run_metadata(scenario.name, text, __version__)
    _write(out, lambda: sio.write_json(f"{out}.meta.json", meta))
    for e in report.entries:
        status = "met" if e.met else "not met"
        print(f"{e.name}: {e.metric}={e.value:.6g} {e.comparator} {e.threshold:g} -> "
              f"{status} (margin {e.margin:+.6g})")
    return EXIT_OK


def _observations(path, table, cls, columns):
    out = []
    for row in table.rows():
        try:
            out.append(cls(*(row[c] for c in columns)))
        except ModelError as exc:
            raise InputError(f"{path}: year {row['year']:g}: {exc}") from None
    return out


def cmd_calibrate(args) -> int:
    if args.target == "production":
        table = sio.ingest_history(args.data, sio.PRODUCTION_COLUMNS)
        obs = _observations(args.data, table, ProductionObservation, sio.PRODUCTION_COLUMNS)
        params, report = fit_production(obs, constrain_crs=not args.unconstrained)
        values = {"tfp": params.tfp, "labor_elasticity": params.labor_elasticity,
                  "capital_elasticity": params.capital_elasticity}
    else:
        table = sio.ingest_history(args.data, sio.FLOW_COLUMNS)
        obs = _observations(args.data, table, FlowObservation, sio.FLOW_COLUMNS)
        params, report = fit_population_flow(obs)
        values = {"a0": params.a0, "a1": params.a1, "a3": params.a3, "a4": params.a4}
    doc = {
        "target": args.target,
        "constrained": args.target == "production" and not args.unconstrained,
        "params": values,
        "fit": {"r_squared": report.r_squared, "rmse": report.rmse,
                "n_observations": report.n_observations, "estimates": report.estimates},
        "source": {"path": str(args.data), "sha256": sio.content_hash(
            Path(args.data).read_text(encoding="utf-8"))},
    }
    _write(args.out, lambda: sio.write_json(args.out, doc))
    print(f"{args.target}: r_squared={report.r_squared:.12g} rmse={report.rmse:.6g}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    _, scenario = _read_scenario(args.scenario)
    trajectory = sio.read_trajectory(args.trajectory)
    report = evaluate_horizons(trajectory, scenario)
    text = json.dumps(report.to_dict(), indent=2) + "\n"
    if args.out:
        _write(args.out, lambda: Path(args.out).write_text(text, encoding="utf-8"))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_compare(args) -> int:
    if len(args.scenario) < 2:
        raise InputError("compare: need at least two --scenario files")
    scenarios = [_read_scenario(p)[1] for p in args.scenario]
    table = compare_scenarios(scenarios)
    if _format_for(args.out, None) == "json":
        _write(args.out, lambda: sio.write_json(args.out, table))
    else:
        _write(args.out, lambda: sio.write_table_csv(args.out, table))
    for row in table:
        print(f"{row['scenario']}: final I_sd={row['final_i_sd']:.6g} "
              f"(delta {row['delta_i_sd']:+.6g}), horizons {row['horizons_met']}/"
              f"{row['horizons_total']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sdmodel", description="Sustainable-development system-dynamics model")
    parser.add_argument("--version", action="version", version=f"sdmodel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a scenario and write its trajectory")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "json"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="fit parameters from a history CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--target", required=True, choices=("production", "population-flow"))
    p.add_argument("--unconstrained", action="store_true",
                   help="production only: estimate the land exponent freely")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("evaluate", help="check a stored trajectory against horizon targets")
    p.add_argument("--scenario", required=True)
    p.add_argument("--trajectory", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="run several scenarios and tabulate deltas")
    p.add_argument("--scenario", required=True, action="extend", nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", help="load and validate a scenario without running it")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
