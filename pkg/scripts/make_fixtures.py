"""Regenerate the test fixtures under ``tests/fixtures``.

The history CSVs are forward-generated through the model kernel from known
parameters, so calibrating on them should recover those parameters.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from sdmodel.io import format_number, trajectory_csv
from sdmodel.kernel import PpflParams, ProductionParams, population_flow, production
from sdmodel.scenario import load_scenario, run_trajectory

PRODUCTION_TRUTH = ProductionParams(tfp=1.8, labor_elasticity=0.35, capital_elasticity=0.4)
FLOW_TRUTH = PpflParams(a0=9.5, a1=-2.0e-7, a3=1.5e-4, a4=-3.0e-4)


def production_rows(n: int, rng: np.random.Generator) -> list[list[float]]:
    rows = []
    for i in range(n):
        labor, capital, land = rng.uniform(5e3, 2e4), rng.uniform(1e4, 9e4), rng.uniform(800, 1600)
        rows.append([1990 + i, production(PRODUCTION_TRUTH, labor, capital, land),
                     labor, capital, land])
    return rows


def flow_rows(n: int, rng: np.random.Generator) -> list[list[float]]:
    rows = []
    for i in range(n):
        pop, land, green = rng.uniform(1e6, 3e6), rng.uniform(2e3, 4e3), rng.uniform(500, 1500)
        rows.append([1990 + i, population_flow(FLOW_TRUTH, pop, land, green), pop, land, green])
    return rows


def write_csv(path: Path, header: list[str], rows: list[list[float]]) -> None:
    lines = [",".join(header)] + [",".join(format_number(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="")


MINI = {
    "name": "mini",
    "description": "Small synthetic economy for CLI tests.",
    "span": {"start": 2000, "end": 2010},
    "initial": {
        "population": 1000.0, "capital": 400.0, "resource_stock": 50.0,
        "land": {"areas": {"forest": 30.0, "agricultural": 60.0, "urban_industrial": 10.0},
                 "green": ["forest"]},
    },
    "engine": {
        "inflow": {"a0": 3.0}, "outflow": {"a0": 2.5},
        "production": {"tfp": 1.5, "labor_elasticity": 0.3, "capital_elasticity": 0.4},
        "labor_share": 0.5, "savings_rate": 0.2, "depreciation_rate": 0.05,
        "resource_use_per_output": 0.01,
        "land_transitions": {"agricultural": {"urban_industrial": 0.01}},
    },
    "index_config": {"goalposts": {"gdp_per_capita": [0.01, 10.0]}},
    "exogenous": {"government_spending": 0.0, "exports": 0.0, "imports": 0.0,
                  "eu_gdpp_ppp": 1.0},
    "horizons": [
        {"name": "early", "year": 2004, "metric": "gdpp_ppp_ratio", "comparator": ">",
         "threshold": 0.1},
        {"name": "late", "year": 2010, "metric": "I_sd", "comparator": ">=", "threshold": 5.0},
    ],
}

# Each entry: file name, text. Every one must be rejected with a located message.
MALFORMED_SCENARIOS = {
    "syntax_error.json": '{\n  "name": "broken",\n  "span": {"start": 2000 "end": 2010}\n}\n',
    "duplicate_key.json": '{\n  "name": "a",\n  "name": "b"\n}\n',
    "nan_literal.json": '{"engine": {"savings_rate": NaN}}\n',
    "unknown_key.json": '{"engine": {"savings_rat": 0.3}}\n',
    "bad_type.json": '{"initial": {"population": "many"}}\n',
    "rate_out_of_range.json": '{"engine": {"depreciation_rate": 1.5}}\n',
    "elasticities_too_large.json":
        '{"engine": {"production": {"labor_elasticity": 0.6, "capital_elasticity": 0.5}}}\n',
    "override_outside_span.json":
        '{"overrides": [{"year": 2050, "target": "engine.savings_rate", "value": 0.3}]}\n',
    "override_unknown_target.json":
        '{"overrides": [{"year": 2015, "target": "engine.savngs_rate", "value": 0.3}]}\n',
    "over_drain.json":
        '{"engine": {"land_transitions": {"unused": {"forest": 0.7, "agricultural": 0.6}}}}\n',
    "horizon_outside_span.json":
        '{"horizons": [{"name": "x", "year": 2040, "metric": "I_sd", "comparator": ">",'
        ' "threshold": 1}]}\n',
    "not_an_object.json": "[1, 2, 3]\n",
    "empty.json": "",
}

MALFORMED_HISTORY = {
    "duplicate_year.csv": "year,Y,L,K,P\n2004,1,1,1,1\n2005,1,1,1,1\n2005,2,1,1,1\n",
    "comma_decimal.csv": "year,Y,L,K,P\n2004,1,1,1,1\n2005,\"1,5\",1,1,1\n",
    "comma_decimal_unquoted.csv": "year,Y,L,K,P\n2004,1;5,1,1,1\n",
    "missing_column.csv": "year,Y,L,K\n2004,1,1,1\n",
    "missing_cell.csv": "year,Y,L,K,P\n2004,1,,1,1\n",
    "decreasing_year.csv": "year,Y,L,K,P\n2005,1,1,1,1\n2004,1,1,1,1\n",
    "unknown_column.csv": "year,Y,L,K,P,GNP\n2004,1,1,1,1,1\n",
    "nan_cell.csv": "year,Y,L,K,P\n2004,nan,1,1,1\n",
    "nonpositive_input.csv": "year,Y,L,K,P\n2004,1,0,1,1\n2005,1,1,1,1\n2006,2,1,3,1\n",
    "no_year_header.csv": "Y,L,K,P\n1,1,1,1\n",
}

MALFORMED_TRAJECTORIES = {
    "bad_header.csv": "year,population,capital\n2000,1,1\n",
    "non_numeric.csv": None,
    "truncated_row.csv": None,
    "not_array.json": '{"year": 2000}\n',
}


def _trajectory_fixtures(good_csv: str) -> dict[str, str]:
    lines = good_csv.splitlines()
    cells = lines[2].split(",")
    cells[3] = "n/a"
    out = {k: v for k, v in MALFORMED_TRAJECTORIES.items() if v is not None}
    out["non_numeric.csv"] = "\n".join([lines[0], lines[1], ",".join(cells)]) + "\n"
    out["truncated_row.csv"] = "\n".join([lines[0], lines[1], lines[2].rsplit(",", 2)[0]]) + "\n"
    return out


def main(argv: list[str] | None = None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "tests" / "fixtures"))
    ap.add_argument("--seed", type=int, default=20080101)
    args = ap.parse_args(argv)
    root = Path(args.out)
    for sub in ("malformed/scenarios", "malformed/history", "malformed/trajectories"):
        (root / sub).mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(args.seed)
    write_csv(root / "production_history.csv", ["year", "Y", "L", "K", "P"], production_rows(12, rng))
    write_csv(root / "flow_history.csv", ["year", "PPFL", "POP", "LAND", "GREEN_LAND"],
              flow_rows(12, rng))
    (root / "truth.json").write_text(json.dumps({
        "production": {"tfp": PRODUCTION_TRUTH.tfp,
                       "labor_elasticity": PRODUCTION_TRUTH.labor_elasticity,
                       "capital_elasticity": PRODUCTION_TRUTH.capital_elasticity},
        "population-flow": {"a0": FLOW_TRUTH.a0, "a1": FLOW_TRUTH.a1,
                            "a3": FLOW_TRUTH.a3, "a4": FLOW_TRUTH.a4},
    }, indent=2) + "\n", encoding="utf-8")

    (root / "mini.json").write_text(json.dumps(MINI, indent=2) + "\n", encoding="utf-8")
    thrifty = json.loads(json.dumps(MINI))
    thrifty["name"] = "mini_thrifty"
    thrifty["overrides"] = [{"year": 2003, "target": "engine.savings_rate", "value": 0.35}]
    (root / "mini_thrifty.json").write_text(json.dumps(thrifty, indent=2) + "\n", encoding="utf-8")

    for name, text in MALFORMED_SCENARIOS.items():
        (root / "malformed" / "scenarios" / name).write_text(text, encoding="utf-8")
    for name, text in MALFORMED_HISTORY.items():
        (root / "malformed" / "history" / name).write_text(text, encoding="utf-8", newline="")
    traj = trajectory_csv(run_trajectory(load_scenario(MINI)))
    for name, text in _trajectory_fixtures(traj).items():
        (root / "malformed" / "trajectories" / name).write_text(text, encoding="utf-8", newline="")
    print(f"fixtures written to {root}")


if __name__ == "__main__":
    main()
