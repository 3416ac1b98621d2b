"""Scenario documents, scheduled overrides and horizon evaluation.

A scenario document is a JSON tree.  Every key has a documented default
(``DEFAULTS``), so ``{"name": "x"}`` is already a complete scenario.  All
invariants are checked in :func:`load_scenario`; a scenario that loads is
guaranteed not to hit a validation error while running.
"""

from __future__ import annotations

import copy
import difflib
import json
import math
import operator
import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import engine as eng
from .engine import (
    EXOGENOUS_DEFAULTS,
    ExogenousInputs,
    IndexConfig,
    LandAllocation,
    LandTransitionMatrix,
    EngineParams,
    Schedule,
    SimulationState,
    Trajectory,
    TIME_EPS,
)
from .errors import (
    InvalidInput,
    InvariantViolation,
    ModelError,
    ParseError,
    ScenarioRunError,
    SchemaError,
    SpanMismatch,
    TargetYearOutOfRange,
)
from .kernel import Goalposts, NationalAccounts, PpflParams, ProductionParams

DEFAULTS: dict[str, Any] = {
    "name": "default",
    "description": "",
    "span": {"start": 2008, "end": 2030},
    "initial": {
        "population": 21.5e6,
        "capital": 6.3e11,
        "resource_stock": 600.0,
        "land": {
            "areas": {"forest": 6600.0, "agricultural": 14700.0, "unused": 1200.0,
                      "urban_industrial": 1339.0},
            "green": ["forest"],
        },
        "accounts": None,
    },
    "engine": {
        "inflow": {"a0": 12.2354, "a1": 0.0, "a3": 0.0, "a4": 1e-5},
        "outflow": {"a0": 12.2534, "a1": 1e-8, "a3": 0.0, "a4": 0.0},
        "production": {"tfp": 1760.0, "labor_elasticity": 0.3, "capital_elasticity": 0.4},
        "labor_share": 0.45,
        "savings_rate": 0.25,
        "depreciation_rate": 0.05,
        "resource_use_per_output": 1.6e-11,
        "productive_land": ["agricultural", "urban_industrial"],
        "land_transitions": {
            "agricultural": {"urban_industrial": 0.002, "forest": 0.002},
            "forest": {"agricultural": 0.001},
            "unused": {"agricultural": 0.005, "forest": 0.003},
        },
        "dt": 1.0,
    },
    "index_config": {
        "welfare_index": "hdi",
        "hpi_alpha": 3.0,
        "goalposts": {
            "life_expectancy": [25.0, 85.0],
            "gdp_per_capita": [100.0, 40000.0],
            "education": [0.0, 100.0],
        },
        "weights": {
            "social": {"individual_development": 1.0, "social_sector": 1.0},
            "economic": {"income": 1.0, "infrastructure": 1.0},
            "natural": {"green_share": 1.0, "resource_remaining": 1.0},
        },
        "isec": {
            "source": "composite",
            "weights": {"education": 1.0, "health": 1.0, "social_insurance": 1.0},
        },
        "infrastructure": {
            "sub_indices": {"energy": 0.45, "transport": 0.35, "water": 0.5, "telecom": 0.6},
            "weights": {"energy": 1.0, "transport": 1.0, "water": 1.0, "telecom": 1.0},
        },
        "resource_reference": None,
    },
    "exogenous": {
        **EXOGENOUS_DEFAULTS,
        "government_spending": 4.0e10,
        "exports": 7.0e10,
        "imports": 8.5e10,
    },
    "overrides": [],
    "horizons": [
        {"name": "horizon_2013", "year": 2013, "metric": "gdpp_ppp_ratio",
         "comparator": ">", "threshold": 0.5},
        {"name": "horizon_2020", "year": 2020, "metric": "gdpp_ppp_ratio",
         "comparator": ">=", "threshold": 0.8},
        {"name": "horizon_2030", "year": 2030, "metric": "gdpp_ppp_ratio",
         "comparator": ">", "threshold": 1.0},
    ],
}

COMPARATORS = {">": operator.gt, ">=": operator.ge, "<": operator.lt, "<=": operator.le}
# Unicode spellings accepted on input, normalized on load.
_COMPARATOR_ALIASES = {"≥": ">=", "≤": "<="}
METRIC_KEYS = {"gdpp_ppp_ratio": None, "I_sd": "i_sd", "I_lq": "i_lq", "HDI": "hdi", "HPI": "hpi"}


# -- domain types -----------------------------------------------------------

@dataclass(frozen=True)
class OverrideEvent:
    effective_year: float
    target: str
    value: float


@dataclass(frozen=True)
class HorizonTarget:
    name: str
    year: float
    metric: str
    comparator: str
    threshold: float


@dataclass(frozen=True)
class ScenarioParams:
    """The override-able part of a scenario."""

    engine: EngineParams
    exogenous: ExogenousInputs


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    start: float
    end: float
    initial: SimulationState
    engine: EngineParams
    index_config: IndexConfig
    exogenous: ExogenousInputs
    overrides: tuple[OverrideEvent, ...]
    horizons: tuple[HorizonTarget, ...]

    @property
    def params(self) -> ScenarioParams:
        return ScenarioParams(self.engine, self.exogenous)

    @property
    def n_steps(self) -> int:
        return eng.step_count(self.end - self.start, self.engine.dt)


@dataclass(frozen=True)
class HorizonResult:
    name: str
    year: float
    metric: str
    comparator: str
    threshold: float
    value: float
    met: bool
    margin: float
    record_year: float
    gap: float
    first_crossing: float | None

    def to_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


@dataclass(frozen=True)
class ConvergenceReport:
    scenario: str
    entries: tuple[HorizonResult, ...]

    @property
    def met_count(self) -> int:
        return sum(e.met for e in self.entries)

    def to_dict(self) -> dict[str, Any]:
        return {"scenario": self.scenario, "met": self.met_count, "total": len(self.entries),
                "targets": [e.to_dict() for e in self.entries]}


# -- schema -----------------------------------------------------------------

NUMBER, STRING, NULLABLE_NUMBER, NUMBER_MAP, STRING_LIST = (
    "number", "string", "nullable-number", "number-map", "string-list")
SCHEDULE, TRANSITIONS, GOALPOSTS, OVERRIDES, HORIZONS, ACCOUNTS = (
    "schedule", "transitions", "goalposts", "overrides", "horizons", "accounts")

SCHEMA: dict[str, Any] = {
    "name": STRING,
    "description": STRING,
    "span": {"start": NUMBER, "end": NUMBER},
    "initial": {
        "population": NUMBER,
        "capital": NUMBER,
        "resource_stock": NUMBER,
        "land": {"areas": NUMBER_MAP, "green": STRING_LIST},
        "accounts": ACCOUNTS,
    },
    "engine": {
        "inflow": {"a0": NUMBER, "a1": NUMBER, "a3": NUMBER, "a4": NUMBER},
        "outflow": {"a0": NUMBER, "a1": NUMBER, "a3": NUMBER, "a4": NUMBER},
        "production": {"tfp": NUMBER, "labor_elasticity": NUMBER, "capital_elasticity": NUMBER},
        "labor_share": NUMBER,
        "savings_rate": NUMBER,
        "depreciation_rate": NUMBER,
        "resource_use_per_output": NUMBER,
        "productive_land": STRING_LIST,
        "land_transitions": TRANSITIONS,
        "dt": NUMBER,
    },
    "index_config": {
        "welfare_index": STRING,
        "hpi_alpha": NUMBER,
        "goalposts": {"life_expectancy": GOALPOSTS, "gdp_per_capita": GOALPOSTS,
                      "education": GOALPOSTS},
        "weights": {
            "social": {k: NUMBER for k in eng.SEGMENTS["social"]},
            "economic": {k: NUMBER for k in eng.SEGMENTS["economic"]},
            "natural": {k: NUMBER for k in eng.SEGMENTS["natural"]},
        },
        "isec": {"source": STRING, "weights": {k: NUMBER for k in eng.ISEC_PARTS}},
        "infrastructure": {"sub_indices": NUMBER_MAP, "weights": NUMBER_MAP},
        "resource_reference": NULLABLE_NUMBER,
    },
    "exogenous": {k: SCHEDULE for k in EXOGENOUS_DEFAULTS},
    "overrides": OVERRIDES,
    "horizons": HORIZONS,
}

OVERRIDE_KEYS = {"year", "target", "value"}
HORIZON_KEYS = {"name", "year", "metric", "comparator", "threshold"}
ACCOUNT_KEYS = ("consumption", "investment", "government_spending", "exports", "imports")


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _suggest(key: str, options) -> str | None:
    match = difflib.get_close_matches(key, list(options), n=1, cutoff=0.5)
    return match[0] if match else None


def _check_keys(path: str, node: Mapping, allowed) -> None:
    for key in node:
        if key not in allowed:
            raise SchemaError(f"{path}.{key}" if path else key, "unknown key",
                              _suggest(key, allowed))


def _expect_number(path: str, v) -> float:
    if not _is_number(v):
        raise SchemaError(path, f"expected a number, got {type(v).__name__}")
    v = float(v)
    if not math.isfinite(v):
        raise InvariantViolation(path, "must be finite")
    return v


def _resolve(path: str, schema, node, default):
    """Validate ``node`` against ``schema`` and fill defaults, returning plain data."""
    if isinstance(schema, dict):
        if node is None:
            node = {}
        if not isinstance(node, dict):
            raise SchemaError(path or "<root>", f"expected an object, got {type(node).__name__}")
        _check_keys(path, node, schema)
        return {key: _resolve(f"{path}.{key}" if path else key, sub,
                              node[key] if key in node else copy.deepcopy(default[key]),
                              default[key])
                for key, sub in schema.items()}
    if schema == NUMBER:
        return _expect_number(path, node)
    if schema == NULLABLE_NUMBER:
        return None if node is None else _expect_number(path, node)
    if schema == STRING:
        if not isinstance(node, str):
            raise SchemaError(path, f"expected a string, got {type(node).__name__}")
        return node
    if schema == STRING_LIST:
        if not isinstance(node, list) or not all(isinstance(x, str) for x in node):
            raise SchemaError(path, "expected a list of strings")
        return list(node)
    if schema == NUMBER_MAP:
        if not isinstance(node, dict):
            raise SchemaError(path, "expected an object of numbers")
        return {k: _expect_number(f"{path}.{k}", v) for k, v in node.items()}
    if schema == GOALPOSTS:
        if not (isinstance(node, list) and len(node) == 2):
            raise SchemaError(path, "expected [min, max]")
        return [_expect_number(f"{path}[{i}]", v) for i, v in enumerate(node)]
    if schema == SCHEDULE:
        if isinstance(node, dict):
            if not node:
                raise SchemaError(path, "a schedule needs at least one year")
            out = {}
            for year, v in node.items():
                try:
                    y = float(year)
                except ValueError:
                    raise SchemaError(f"{path}.{year}", "schedule keys must be years") from None
                if not math.isfinite(y):
                    raise SchemaError(f"{path}.{year}", "schedule keys must be finite years")
                out[_year_key(y)] = _expect_number(f"{path}.{year}", v)
            return out
        return _expect_number(path, node)
    if schema == TRANSITIONS:
        if not isinstance(node, dict):
            raise SchemaError(path, "expected an object of source -> {target: rate}")
        out = {}
        for src, row in node.items():
            if not isinstance(row, dict):
                raise SchemaError(f"{path}.{src}", "expected an object of target -> rate")
            out[src] = {dst: _expect_number(f"{path}.{src}.{dst}", r) for dst, r in row.items()}
        return out
    if schema == ACCOUNTS:
        if node is None:
            return None
        if not isinstance(node, dict):
            raise SchemaError(path, "expected an object or null")
        _check_keys(path, node, ACCOUNT_KEYS)
        missing = [k for k in ACCOUNT_KEYS if k not in node]
        if missing:
            raise SchemaError(f"{path}.{missing[0]}", "missing account")
        return {k: _expect_number(f"{path}.{k}", node[k]) for k in ACCOUNT_KEYS}
    if schema == OVERRIDES:
        return [_resolve_record(f"{path}[{i}]", item, OVERRIDE_KEYS)
                for i, item in enumerate(_expect_list(path, node))]
    if schema == HORIZONS:
        return [_resolve_record(f"{path}[{i}]", item, HORIZON_KEYS)
                for i, item in enumerate(_expect_list(path, node))]
    raise AssertionError(schema)


def _expect_list(path: str, node) -> list:
    if not isinstance(node, list):
        raise SchemaError(path, "expected a list")
    return node


def _resolve_record(path: str, item, keys: set[str]) -> dict:
    if not isinstance(item, dict):
        raise SchemaError(path, "expected an object")
    _check_keys(path, item, keys)
    for key in sorted(keys):
        if key not in item:
            raise SchemaError(f"{path}.{key}", "missing required key")
    out = {}
    for key in sorted(keys):
        value = item[key]
        if key in ("year", "value", "threshold"):
            out[key] = _expect_number(f"{path}.{key}", value)
        elif not isinstance(value, str):
            raise SchemaError(f"{path}.{key}", "expected a string")
        else:
            out[key] = value
    return out


def _year_key(y: float) -> str:
    return str(int(y)) if float(y).is_integer() else repr(float(y))


# -- loading ----------------------------------------------------------------

def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    return line, pos - (text.rfind("\n", 0, pos) + 1) + 1


def _locate_problem(text: str) -> tuple[int, str] | None:
    """Offset and message of the first duplicate key or non-finite literal.

    The stdlib decoder reports neither with a position, so this walks the
    (already syntactically valid) text tracking strings and object nesting.
    """
    keys: list[set | None] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == '"':
            start = i
            i += 1
            while text[i] != '"':
                i += 2 if text[i] == "\\" else 1
            token = json.loads(text[start:i + 1])
            j = i + 1
            while j < n and text[j] in " \t\r\n":
                j += 1
            if j < n and text[j] == ":" and keys and keys[-1] is not None:
                if token in keys[-1]:
                    return start, f"duplicate key '{token}'"
                keys[-1].add(token)
        elif ch == "{":
            keys.append(set())
        elif ch == "[":
            keys.append(None)
        elif ch in "}]":
            keys.pop()
        elif ch in "NI" or (ch == "-" and text.startswith("-Infinity", i)):
            word = re.match(r"-?[A-Za-z]+", text[i:]).group(0)
            return i, f"non-finite literal {word} is not allowed"
        i += 1
    return None


def parse_document(text: str, source: str = "<document>") -> dict:
    def no_constants(name):
        raise ValueError(f"non-finite literal {name} is not allowed")

    def pairs(items):
        out = {}
        for key, value in items:
            if key in out:
                raise ValueError(f"duplicate key '{key}'")
            out[key] = value
        return out

    try:
        doc = json.loads(text, object_pairs_hook=pairs, parse_constant=no_constants)
    except json.JSONDecodeError as exc:
        raise ParseError(source, exc.lineno, exc.colno, exc.msg) from None
    except ValueError as exc:
        found = _locate_problem(text)
        pos, message = found if found else (0, str(exc))
        raise ParseError(source, *_line_col(text, pos), message) from None
    if not isinstance(doc, dict):
        raise ParseError(source, 1, 1, "top-level value must be an object")
    return doc


def _violation(field: str):
    """Turn a constructor's InvalidInput into an InvariantViolation on ``field``."""

    class _Guard:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc_type is not None and issubclass(exc_type, ModelError) \
                    and not isinstance(exc, (SchemaError, InvariantViolation)):
                raise InvariantViolation(field, str(exc)) from exc
            return False

    return _Guard()


def _schedule(value) -> Schedule:
    if isinstance(value, dict):
        return Schedule(tuple((float(y), v) for y, v in value.items()))
    return Schedule.constant(value)


def load_scenario(document: str | Mapping, source: str = "<document>") -> Scenario:
    """Parse (if given text), validate and build a :class:`Scenario`."""
    doc = parse_document(document, source) if isinstance(document, str) else document
    try:
        if not isinstance(doc, Mapping):
            raise SchemaError("<root>", "expected an object")
        return _build(_resolve("", SCHEMA, dict(doc), DEFAULTS))
    except (SchemaError, InvariantViolation) as exc:
        if exc.source is not None:
            raise
        raise exc.with_source(source) from exc.__cause__


def load_scenario_file(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InvariantViolation("<file>", f"scenario file is not readable ({exc.strerror})",
                                 str(path)) from None
    return load_scenario(text, str(path))


def default_scenario_text() -> str:
    return resources.files("sdmodel").joinpath("data/default_scenario.json").read_text("utf-8")


def default_scenario() -> Scenario:
    return load_scenario(default_scenario_text(), "default_scenario.json")


def _build(d: dict) -> Scenario:
    start, end = d["span"]["start"], d["span"]["end"]
    if not end > start:
        raise InvariantViolation("span", "end must be after start")

    ini = d["initial"]
    with _violation("initial.land"):
        land = LandAllocation(ini["land"]["areas"], tuple(ini["land"]["green"]))
    if not land.areas:
        raise InvariantViolation("initial.land.areas", "at least one land type")
    if land.total <= 0:
        raise InvariantViolation("initial.land.areas", "total land must be > 0")

    e = d["engine"]
    for key in ("inflow", "outflow"):
        with _violation(f"engine.{key}"):
            PpflParams(**e[key])
    with _violation("engine.production"):
        production = ProductionParams(**e["production"])
    for i, t in enumerate(e["productive_land"]):
        if t not in land.areas:
            raise InvariantViolation(f"engine.productive_land[{i}]", f"'{t}' is not a land type")
    for src, row in e["land_transitions"].items():
        if src not in land.areas:
            raise InvariantViolation(f"engine.land_transitions.{src}", "unknown land type")
        for dst in row:
            if dst not in land.areas:
                raise InvariantViolation(f"engine.land_transitions.{src}.{dst}",
                                         "unknown land type")
    with _violation("engine"):
        engine_params = EngineParams(
            inflow=PpflParams(**e["inflow"]),
            outflow=PpflParams(**e["outflow"]),
            production=production,
            labor_share=e["labor_share"],
            savings_rate=e["savings_rate"],
            depreciation_rate=e["depreciation_rate"],
            resource_use_per_output=e["resource_use_per_output"],
            land_transitions=LandTransitionMatrix(e["land_transitions"]),
            dt=e["dt"],
            productive_land=tuple(e["productive_land"]),
        )
    with _violation("span"):
        eng.step_count(end - start, engine_params.dt)

    with _violation("exogenous"):
        exogenous = ExogenousInputs({k: _schedule(v) for k, v in d["exogenous"].items()})
    for name, sched in exogenous.schedules.items():
        if sched.first_year > start + TIME_EPS:
            raise InvariantViolation(f"exogenous.{name}",
                                     f"schedule must start at or before {start:g}")

    ic = d["index_config"]
    w = ic["weights"]
    with _violation("index_config"):
        index_config = IndexConfig(
            welfare_index=ic["welfare_index"],
            hpi_alpha=ic["hpi_alpha"],
            life_expectancy_goalposts=Goalposts(*ic["goalposts"]["life_expectancy"]),
            gdp_goalposts=Goalposts(*ic["goalposts"]["gdp_per_capita"]),
            education_goalposts=Goalposts(*ic["goalposts"]["education"]),
            social_weights=w["social"],
            economic_weights=w["economic"],
            natural_weights=w["natural"],
            isec_source=ic["isec"]["source"],
            isec_weights=ic["isec"]["weights"],
            infrastructure=ic["infrastructure"]["sub_indices"],
            infrastructure_weights=ic["infrastructure"]["weights"],
            resource_reference=ic["resource_reference"],
        )

    with _violation("initial"):
        state = SimulationState(time=start, population=ini["population"], capital=ini["capital"],
                                land=land, resource_stock=ini["resource_stock"])
        if ini["accounts"] is None:
            state = eng.prime_accounts(state, engine_params, exogenous)
        else:
            state = replace(state, accounts=NationalAccounts(**ini["accounts"]))
    if state.population <= 0:
        raise InvariantViolation("initial.population", "must be > 0")
    if index_config.resource_reference is None:
        if state.resource_stock <= 0:
            raise InvariantViolation("index_config.resource_reference",
                                     "required when initial.resource_stock is 0")
        index_config = replace(index_config, resource_reference=state.resource_stock)

    overrides = []
    for i, o in enumerate(d["overrides"]):
        path = f"overrides[{i}]"
        if not start - TIME_EPS <= o["year"] <= end + TIME_EPS:
            raise InvariantViolation(f"{path}.year", f"must lie within span {start:g}-{end:g}")
        valid = override_targets(land.areas)
        if o["target"] not in valid:
            raise SchemaError(f"{path}.target", f"unknown parameter path '{o['target']}'",
                              _suggest(o["target"], valid))
        overrides.append(OverrideEvent(o["year"], o["target"], o["value"]))
    overrides.sort(key=lambda ev: ev.effective_year)

    base = ScenarioParams(engine_params, exogenous)
    for year in sorted({ev.effective_year for ev in overrides}):
        with _violation(f"overrides (effective {year:g})"):
            apply_overrides(base, overrides, year)

    row_keys = set(eng.SNAPSHOT_KEYS) | set(eng.STATE_KEYS[1:]) | {
        f"land_{t}" for t in land.areas}
    horizons = []
    for i, h in enumerate(d["horizons"]):
        path = f"horizons[{i}]"
        comparator = _COMPARATOR_ALIASES.get(h["comparator"], h["comparator"])
        if comparator not in COMPARATORS:
            raise InvariantViolation(f"{path}.comparator", "one of >, >=, <, <=")
        if h["metric"] not in METRIC_KEYS and h["metric"] not in row_keys:
            raise SchemaError(f"{path}.metric", f"unknown metric '{h['metric']}'",
                              _suggest(h["metric"], list(METRIC_KEYS) + sorted(row_keys)))
        if not start - TIME_EPS <= h["year"] <= end + TIME_EPS:
            raise InvariantViolation(f"{path}.year", f"must lie within span {start:g}-{end:g}")
        horizons.append(HorizonTarget(h["name"], h["year"], h["metric"], comparator,
                                      h["threshold"]))

    return Scenario(
        name=d["name"],
        description=d["description"],
        start=start,
        end=end,
        initial=state,
        engine=engine_params,
        index_config=index_config,
        exogenous=exogenous,
        overrides=tuple(overrides),
        horizons=tuple(horizons),
    )


# -- overrides --------------------------------------------------------------

_ENGINE_SCALARS = ("labor_share", "savings_rate", "depreciation_rate", "resource_use_per_output")


def override_targets(land_types) -> list[str]:
    """Every dotted path an override may set."""
    paths = [f"engine.{k}" for k in _ENGINE_SCALARS]
    paths += [f"engine.{flow}.{c}" for flow in ("inflow", "outflow")
              for c in ("a0", "a1", "a3", "a4")]
    paths += [f"engine.production.{k}" for k in ("tfp", "labor_elasticity", "capital_elasticity")]
    paths += [f"engine.land_transitions.{s}.{t}" for s in land_types for t in land_types if s != t]
    paths += [f"exogenous.{k}" for k in EXOGENOUS_DEFAULTS]
    return paths


def _set(params: ScenarioParams, target: str, value: float) -> ScenarioParams:
    parts = target.split(".")
    if parts[0] == "exogenous":
        return replace(params, exogenous=params.exogenous.replace_series(
            parts[1], Schedule.constant(value)))
    e = params.engine
    if len(parts) == 2:
        e = replace(e, **{parts[1]: value})
    elif parts[1] in ("inflow", "outflow", "production"):
        e = replace(e, **{parts[1]: replace(getattr(e, parts[1]), **{parts[2]: value})})
    else:
        _, _, src, dst = parts
        rates = {s: dict(row) for s, row in e.land_transitions.rates.items()}
        rates.setdefault(src, {})[dst] = value
        e = replace(e, land_transitions=LandTransitionMatrix(rates))
    return replace(params, engine=e)


def apply_overrides(params: ScenarioParams, overrides: Sequence[OverrideEvent],
                    current_year: float) -> ScenarioParams:
    """Parameters in force at ``current_year``; later events win on the same path."""
    for ev in overrides:
        if ev.effective_year <= current_year + TIME_EPS:
            params = _set(params, ev.target, ev.value)
    return params


# -- running and evaluation -------------------------------------------------

def run_trajectory(scenario: Scenario) -> Trajectory:
    base = scenario.params
    if scenario.overrides:
        def resolve(t):
            p = apply_overrides(base, scenario.overrides, t)
            return p.engine, p.exogenous
    else:
        def resolve(t):
            return base.engine, base.exogenous
    return eng.simulate(scenario.initial, scenario.n_steps, resolve, scenario.index_config)


def run_scenario(scenario: Scenario) -> tuple[Trajectory, ConvergenceReport]:
    try:
        trajectory = run_trajectory(scenario)
        return trajectory, evaluate_horizons(trajectory, scenario)
    except ModelError as exc:
        raise ScenarioRunError(scenario.name, exc) from exc


def metric_value(row: Mapping[str, float], metric: str, eu_reference: float) -> float:
    if metric == "gdpp_ppp_ratio":
        return row["gdpp"] / eu_reference
    return row[METRIC_KEYS.get(metric) or metric]


def _margin(value: float, comparator: str, threshold: float) -> float:
    return value - threshold if comparator in (">", ">=") else threshold - value


def evaluate_horizons(trajectory: Trajectory, scenario: Scenario) -> ConvergenceReport:
    """Check every horizon target against the record at (or just before) its year."""
    rows = trajectory.rows()
    if not rows:
        raise TargetYearOutOfRange("trajectory is empty")
    times = [r["year"] for r in rows]
    base = scenario.params

    def eu_at(t):
        return apply_overrides(base, scenario.overrides, t).exogenous.at("eu_gdpp_ppp", t)

    entries = []
    for target in scenario.horizons:
        if target.year < times[0] - TIME_EPS or target.year > times[-1] + TIME_EPS:
            raise TargetYearOutOfRange(
                f"target '{target.name}' year {target.year:g} outside trajectory "
                f"{times[0]:g}-{times[-1]:g}")
        idx = max(i for i, t in enumerate(times) if t <= target.year + TIME_EPS)
        row = rows[idx]
        check = COMPARATORS[target.comparator]
        value = metric_value(row, target.metric, eu_at(row["year"]))
        crossing = next((r["year"] for r in rows
                         if check(metric_value(r, target.metric, eu_at(r["year"])),
                                  target.threshold)), None)
        entries.append(HorizonResult(
            name=target.name,
            year=target.year,
            metric=target.metric,
            comparator=target.comparator,
            threshold=target.threshold,
            value=value,
            met=bool(check(value, target.threshold)),
            margin=_margin(value, target.comparator, target.threshold),
            record_year=row["year"],
            gap=target.year - row["year"],
            first_crossing=crossing,
        ))
    return ConvergenceReport(scenario.name, tuple(entries))


COMPARE_METRICS = ("i_sd", "i_lq", "gdpp", "capital", "population")


def compare_scenarios(scenarios: Sequence[Scenario]) -> list[dict[str, Any]]:
    """Final-state metrics per scenario with deltas against the first one."""
    if len(scenarios) < 2:
        raise InvalidInput("compare_scenarios needs at least two scenarios")
    span = (scenarios[0].start, scenarios[0].end)
    for s in scenarios[1:]:
        if (s.start, s.end) != span:
            raise SpanMismatch(
                f"scenario '{s.name}' spans {s.start:g}-{s.end:g}, baseline spans "
                f"{span[0]:g}-{span[1]:g}")
    table = []
    baseline = None
    for s in scenarios:
        trajectory, report = run_scenario(s)
        final = trajectory[-1].row()
        row: dict[str, Any] = {"scenario": s.name}
        for key in COMPARE_METRICS:
            row[f"final_{key}"] = final[key]
        row["horizons_met"] = report.met_count
        row["horizons_total"] = len(report.entries)
        if baseline is None:
            baseline = row
        for key in COMPARE_METRICS:
            row[f"delta_{key}"] = row[f"final_{key}"] - baseline[f"final_{key}"]
        table.append(row)
    return table


# -- serialization ----------------------------------------------------------

def _schedule_doc(sched: Schedule):
    if len(sched.points) == 1 and sched.points[0][0] <= -1e9:
        return sched.points[0][1]
    return {_year_key(y): v for y, v in sched.points}


def scenario_to_document(s: Scenario) -> dict[str, Any]:
    """Inverse of :func:`load_scenario` (accounts and references made explicit)."""
    e, ic, a = s.engine, s.index_config, s.initial.accounts
    return {
        "name": s.name,
        "description": s.description,
        "span": {"start": s.start, "end": s.end},
        "initial": {
            "population": s.initial.population,
            "capital": s.initial.capital,
            "resource_stock": s.initial.resource_stock,
            "land": {"areas": dict(s.initial.land.areas), "green": list(s.initial.land.green)},
            "accounts": {k: getattr(a, k) for k in ACCOUNT_KEYS},
        },
        "engine": {
            "inflow": dict(e.inflow.__dict__),
            "outflow": dict(e.outflow.__dict__),
            "production": dict(e.production.__dict__),
            "labor_share": e.labor_share,
            "savings_rate": e.savings_rate,
            "depreciation_rate": e.depreciation_rate,
            "resource_use_per_output": e.resource_use_per_output,
            "productive_land": list(e.productive_land),
            "land_transitions": {k: dict(v) for k, v in e.land_transitions.rates.items()},
            "dt": e.dt,
        },
        "index_config": {
            "welfare_index": ic.welfare_index,
            "hpi_alpha": ic.hpi_alpha,
            "goalposts": {
                "life_expectancy": [ic.life_expectancy_goalposts.min,
                                    ic.life_expectancy_goalposts.max],
                "gdp_per_capita": [ic.gdp_goalposts.min, ic.gdp_goalposts.max],
                "education": [ic.education_goalposts.min, ic.education_goalposts.max],
            },
            "weights": {"social": dict(ic.social_weights), "economic": dict(ic.economic_weights),
                        "natural": dict(ic.natural_weights)},
            "isec": {"source": ic.isec_source, "weights": dict(ic.isec_weights)},
            "infrastructure": {"sub_indices": dict(ic.infrastructure),
                               "weights": dict(ic.infrastructure_weights)},
            "resource_reference": ic.resource_reference,
        },
        "exogenous": {k: _schedule_doc(v) for k, v in s.exogenous.schedules.items()},
        "overrides": [{"year": o.effective_year, "target": o.target, "value": o.value}
                      for o in s.overrides],
        "horizons": [{"name": h.name, "year": h.year, "metric": h.metric,
                      "comparator": h.comparator, "threshold": h.threshold}
                     for h in s.horizons],
    }


def dump_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_document(s), indent=2) + "\n"
