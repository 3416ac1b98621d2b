"""Discrete-time stock-flow engine.

State advances by explicit Euler with synchronous updates: every sub-update
in :func:`step` reads the pre-step state only, so their order is irrelevant.
Stocks are floored at zero instead of raising, which lets a scenario show a
collapse rather than abort on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Iterator, Mapping

from . import kernel
from .errors import InvalidInput, ModelError, OverDrain, StepError
from .kernel import (
    ComponentIndices,
    Goalposts,
    HdiComponents,
    HpiInputs,
    NationalAccounts,
    PpflParams,
    ProductionParams,
)

#: Slack used when comparing real-valued times against calendar years.
TIME_EPS = 1e-9

DEFAULT_PRODUCTIVE_LAND = ("agricultural", "urban_industrial")


@dataclass(frozen=True)
class LandAllocation:
    areas: Mapping[str, float]
    green: tuple[str, ...] = ("forest",)

    def __post_init__(self):
        areas = {str(k): float(v) for k, v in self.areas.items()}
        for name, area in areas.items():
            if not math.isfinite(area) or area < 0:
                raise InvalidInput(f"land area '{name}' must be finite and >= 0, got {area!r}")
        unknown = [g for g in self.green if g not in areas]
        if unknown:
            raise InvalidInput(f"green land types {unknown} are not land types")
        object.__setattr__(self, "areas", areas)
        object.__setattr__(self, "green", tuple(self.green))

    @property
    def total(self) -> float:
        return math.fsum(self.areas.values())

    @property
    def green_area(self) -> float:
        return math.fsum(self.areas[g] for g in self.green)

    def area_of(self, types) -> float:
        return math.fsum(self.areas[t] for t in types)


@dataclass(frozen=True)
class LandTransitionMatrix:
    """``rates[src][dst]``: fraction of ``src`` land converting to ``dst`` per year."""

    rates: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        rates = {}
        for src, row in self.rates.items():
            clean = {}
            for dst, rate in row.items():
                rate = float(rate)
                if dst == src:
                    raise InvalidInput(f"land transition {src}->{dst} must not be diagonal")
                if not math.isfinite(rate) or rate < 0:
                    raise InvalidInput(f"land transition {src}->{dst} must be >= 0, got {rate!r}")
                clean[str(dst)] = rate
            rates[str(src)] = clean
        object.__setattr__(self, "rates", rates)

    def outflow_rate(self, src: str) -> float:
        return math.fsum(self.rates.get(src, {}).values())

    def check_drain(self, dt: float) -> None:
        for src in self.rates:
            if self.outflow_rate(src) * dt > 1.0 + 1e-12:
                raise OverDrain(
                    f"land type '{src}' loses {self.outflow_rate(src) * dt:.6g} of its area "
                    f"per step (must be <= 1)")


@dataclass(frozen=True)
class EngineParams:
    inflow: PpflParams
    outflow: PpflParams
    production: ProductionParams
    labor_share: float = 0.45
    savings_rate: float = 0.25
    depreciation_rate: float = 0.05
    resource_use_per_output: float = 0.0
    land_transitions: LandTransitionMatrix = field(default_factory=LandTransitionMatrix)
    dt: float = 1.0
    productive_land: tuple[str, ...] = DEFAULT_PRODUCTIVE_LAND

    def __post_init__(self):
        object.__setattr__(self, "productive_land", tuple(self.productive_land))
        if not 0 < self.labor_share <= 1:
            raise InvalidInput(f"labor_share must lie in (0, 1], got {self.labor_share!r}")
        if not 0 <= self.savings_rate < 1:
            raise InvalidInput(f"savings_rate must lie in [0, 1), got {self.savings_rate!r}")
        if not 0 <= self.depreciation_rate < 1:
            raise InvalidInput(
                f"depreciation_rate must lie in [0, 1), got {self.depreciation_rate!r}")
        if not (math.isfinite(self.resource_use_per_output) and self.resource_use_per_output >= 0):
            raise InvalidInput("resource_use_per_output must be finite and >= 0")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise InvalidInput(f"dt must be > 0, got {self.dt!r}")
        self.land_transitions.check_drain(self.dt)


@dataclass(frozen=True)
class Schedule:
    """Piecewise-constant series: the value at t is the last point at or before t."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple(sorted((float(y), float(v)) for y, v in self.points))
        if not pts:
            raise InvalidInput("a schedule needs at least one point")
        years = [y for y, _ in pts]
        if len(set(years)) != len(years):
            raise InvalidInput("schedule years must be unique")
        if not all(math.isfinite(y) and math.isfinite(v) for y, v in pts):
            raise InvalidInput("schedule points must be finite")
        object.__setattr__(self, "points", pts)

    @classmethod
    def constant(cls, value: float) -> "Schedule":
        # -inf would break the finiteness check, so anchor far in the past.
        return cls(((-1e9, value),))

    @property
    def first_year(self) -> float:
        return self.points[0][0]

    def at(self, t: float) -> float:
        value = None
        for year, v in self.points:
            if year <= t + TIME_EPS:
                value = v
            else:
                break
        if value is None:
            raise InvalidInput(f"schedule starts at {self.first_year:g}, queried at {t:g}")
        return value

    def values(self) -> list[float]:
        return [v for _, v in self.points]


#: Exogenous series and their default constant values.
EXOGENOUS_DEFAULTS: dict[str, float] = {
    "government_spending": 0.0,
    "exports": 0.0,
    "imports": 0.0,
    "eu_gdpp_ppp": 25000.0,
    "life_expectancy": 73.0,
    "education": 88.0,
    "hpi_p1": 8.0,
    "hpi_p2": 2.5,
    "hpi_p3": 6.0,
    "social_insurance": 0.6,
    "social_security": 0.6,
}

#: Allowed value ranges per exogenous series (inclusive).
EXOGENOUS_RANGES: dict[str, tuple[float, float]] = {
    "government_spending": (0.0, math.inf),
    "exports": (0.0, math.inf),
    "imports": (0.0, math.inf),
    "eu_gdpp_ppp": (1e-300, math.inf),
    "life_expectancy": (0.0, 150.0),
    "education": (0.0, 100.0),
    "hpi_p1": (0.0, 100.0),
    "hpi_p2": (0.0, 100.0),
    "hpi_p3": (0.0, 100.0),
    "social_insurance": (0.0, 1.0),
    "social_security": (0.0, 1.0),
}


@dataclass(frozen=True)
class ExogenousInputs:
    schedules: Mapping[str, Schedule] = field(default_factory=dict)

    def __post_init__(self):
        merged = {name: Schedule.constant(v) for name, v in EXOGENOUS_DEFAULTS.items()}
        for name, sched in self.schedules.items():
            if name not in EXOGENOUS_DEFAULTS:
                raise InvalidInput(f"unknown exogenous series '{name}'")
            if not isinstance(sched, Schedule):
                sched = Schedule.constant(float(sched))
            lo, hi = EXOGENOUS_RANGES[name]
            for v in sched.values():
                if not lo <= v <= hi:
                    raise InvalidInput(f"exogenous '{name}' value {v!r} outside [{lo:g}, {hi:g}]")
            merged[name] = sched
        object.__setattr__(self, "schedules", merged)

    def at(self, name: str, t: float) -> float:
        return self.schedules[name].at(t)

    def replace_series(self, name: str, schedule: Schedule) -> "ExogenousInputs":
        return ExogenousInputs({**self.schedules, name: schedule})


SEGMENTS = {
    "social": ("individual_development", "social_sector"),
    "economic": ("income", "infrastructure"),
    "natural": ("green_share", "resource_remaining"),
}
ISEC_PARTS = ("education", "health", "social_insurance")


def _equal(keys) -> dict[str, float]:
    return {k: 1.0 for k in keys}


@dataclass(frozen=True)
class IndexConfig:
    """How raw state and exogenous series become the three component indices.

    Each component index is a weighted mean of two segment indicators (see
    ``SEGMENTS``).  The social-security index is either a weighted composite
    of education, health and social-insurance coverage (``isec_source =
    "composite"``) or the exogenous ``social_security`` series (``"series"``).
    GDP per capita is goalposted in log space.
    """

    welfare_index: str = "hdi"
    hpi_alpha: float = kernel.DEFAULT_HPI_ALPHA
    life_expectancy_goalposts: Goalposts = Goalposts(25.0, 85.0)
    gdp_goalposts: Goalposts = Goalposts(100.0, 40000.0)
    education_goalposts: Goalposts = Goalposts(0.0, 100.0)
    social_weights: Mapping[str, float] = field(default_factory=lambda: _equal(SEGMENTS["social"]))
    economic_weights: Mapping[str, float] = field(
        default_factory=lambda: _equal(SEGMENTS["economic"]))
    natural_weights: Mapping[str, float] = field(
        default_factory=lambda: _equal(SEGMENTS["natural"]))
    isec_source: str = "composite"
    isec_weights: Mapping[str, float] = field(default_factory=lambda: _equal(ISEC_PARTS))
    infrastructure: Mapping[str, float] = field(default_factory=lambda: {"composite": 0.5})
    infrastructure_weights: Mapping[str, float] = field(default_factory=lambda: {"composite": 1.0})
    resource_reference: float | None = None

    def __post_init__(self):
        if self.welfare_index not in ("hdi", "hpi"):
            raise InvalidInput(f"welfare_index must be 'hdi' or 'hpi', got {self.welfare_index!r}")
        if self.isec_source not in ("composite", "series"):
            raise InvalidInput(
                f"isec_source must be 'composite' or 'series', got {self.isec_source!r}")
        if not self.hpi_alpha >= 1:
            raise InvalidInput(f"hpi_alpha must be >= 1, got {self.hpi_alpha!r}")
        if self.gdp_goalposts.min <= 0:
            raise InvalidInput("gdp goalposts must be > 0 (normalized in log space)")
        for label, weights, keys in (
            ("social_weights", self.social_weights, SEGMENTS["social"]),
            ("economic_weights", self.economic_weights, SEGMENTS["economic"]),
            ("natural_weights", self.natural_weights, SEGMENTS["natural"]),
            ("isec_weights", self.isec_weights, ISEC_PARTS),
        ):
            if set(weights) != set(keys):
                raise InvalidInput(f"{label} must have exactly the keys {list(keys)}")
            _check_weights(label, weights)
        if set(self.infrastructure) != set(self.infrastructure_weights):
            raise InvalidInput("infrastructure sub-indices and weights need the same keys")
        if not self.infrastructure:
            raise InvalidInput("infrastructure needs at least one sub-index")
        for name, value in self.infrastructure.items():
            if not 0 <= value <= 1:
                raise InvalidInput(f"infrastructure sub-index '{name}' must lie in [0, 1]")
        _check_weights("infrastructure_weights", self.infrastructure_weights)
        if self.resource_reference is not None and not self.resource_reference > 0:
            raise InvalidInput("resource_reference must be > 0")


def _check_weights(label: str, weights: Mapping[str, float]) -> None:
    if any(not math.isfinite(w) or w < 0 for w in weights.values()):
        raise InvalidInput(f"{label} must be finite and >= 0")
    if math.fsum(weights.values()) <= 0:
        raise InvalidInput(f"{label} must not all be zero")


@dataclass(frozen=True)
class SimulationState:
    time: float
    population: float
    capital: float
    land: LandAllocation
    resource_stock: float
    accounts: NationalAccounts = NationalAccounts()

    def __post_init__(self):
        for name in ("time", "population", "capital", "resource_stock"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidInput(f"{name} must be finite, got {value!r}")
            if name != "time" and value < 0:
                raise InvalidInput(f"{name} must be >= 0, got {value!r}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class IndicatorSnapshot:
    gdpp: float
    hdi: float
    hpi: float
    i_s: float
    i_ec: float
    i_n: float
    cos_alpha: float
    i_lq: float
    i_sec: float
    i_sd: float


SNAPSHOT_KEYS = tuple(f.name for f in fields(IndicatorSnapshot))
STATE_KEYS = ("year", "population", "capital", "resource_stock")


@dataclass(frozen=True)
class Record:
    state: SimulationState
    indicators: IndicatorSnapshot

    def row(self) -> dict[str, float]:
        """Flat mapping using the serialized column names."""
        s = self.state
        out = {"year": s.time, "population": s.population, "capital": s.capital,
               "resource_stock": s.resource_stock}
        for name, area in s.land.areas.items():
            out[f"land_{name}"] = area
        for key in SNAPSHOT_KEYS:
            out[key] = getattr(self.indicators, key)
        return out


@dataclass(frozen=True)
class Trajectory:
    records: tuple[Record, ...] = ()

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[Record]:
        return iter(self.records)

    def __getitem__(self, i) -> Record:
        return self.records[i]

    @property
    def times(self) -> list[float]:
        return [r.state.time for r in self.records]

    def rows(self) -> list[dict[str, float]]:
        return [r.row() for r in self.records]

    def column(self, key: str) -> list[float]:
        return [r.row()[key] for r in self.records]


# -- sub-updates --------------------------------------------------------------

def _flow_inputs(state: SimulationState) -> tuple[float, float, float]:
    land = state.land.total
    # Rounding can leave the green sum a hair above the total.
    return state.population, land, min(state.land.green_area, land)


def population_update(state: SimulationState, params: EngineParams, dt: float) -> float:
    pop, land, green = _flow_inputs(state)
    births = kernel.population_flow(params.inflow, pop, land, green)
    deaths = kernel.population_flow(params.outflow, pop, land, green)
    return max(0.0, pop + dt * (births - deaths))


def land_transition(land: LandAllocation, m: LandTransitionMatrix, dt: float) -> LandAllocation:
    for src, row in m.rates.items():
        if src not in land.areas:
            raise InvalidInput(f"land transition source '{src}' is not a land type")
        for dst in row:
            if dst not in land.areas:
                raise InvalidInput(f"land transition target '{dst}' is not a land type")
    m.check_drain(dt)
    new = dict(land.areas)
    for src, row in m.rates.items():
        area = land.areas[src]
        for dst, rate in row.items():
            moved = dt * rate * area
            new[src] -= moved
            new[dst] += moved
    for name, area in new.items():
        if area < 0:
            if area < -1e-9 * max(land.total, 1.0):
                raise OverDrain(f"land type '{name}' would become negative ({area!r})")
            new[name] = 0.0
    return LandAllocation(new, land.green)


def capital_update(state: SimulationState, params: EngineParams, output: float, dt: float) -> float:
    k = state.capital
    return max(0.0, k + dt * (params.savings_rate * output - params.depreciation_rate * k))


def output_of(state: SimulationState, params: EngineParams) -> float:
    labor = params.labor_share * state.population
    land = state.land.area_of(params.productive_land)
    if labor == 0.0 or state.capital == 0.0 or land == 0.0:
        # a stock floored at zero: the Cobb-Douglas limit, rather than a kernel error
        return 0.0
    return kernel.production(params.production, labor, state.capital, land)


def derive_accounts(output: float, params: EngineParams, exogenous: ExogenousInputs,
                    t: float) -> NationalAccounts:
    s = params.savings_rate
    return NationalAccounts(
        consumption=(1.0 - s) * output,
        investment=s * output,
        government_spending=exogenous.at("government_spending", t),
        exports=exogenous.at("exports", t),
        imports=exogenous.at("imports", t),
    )


def prime_accounts(state: SimulationState, params: EngineParams,
                   exogenous: ExogenousInputs | None = None) -> SimulationState:
    """Fill ``state.accounts`` from the state's own output, as :func:`step` would."""
    exogenous = exogenous or ExogenousInputs()
    y = output_of(state, params)
    return replace(state, accounts=derive_accounts(y, params, exogenous, state.time))


def step(state: SimulationState, params: EngineParams,
         exogenous: ExogenousInputs | None = None) -> SimulationState:
    """Advance ``state`` by ``params.dt`` years."""
    exogenous = exogenous or ExogenousInputs()
    dt = params.dt
    y = output_of(state, params)
    accounts = derive_accounts(y, params, exogenous, state.time)
    population = population_update(state, params, dt)
    capital = capital_update(state, params, y, dt)
    land = land_transition(state.land, params.land_transitions, dt)
    resources = max(0.0, state.resource_stock - dt * params.resource_use_per_output * y)
    return SimulationState(
        time=state.time + dt,
        population=population,
        capital=capital,
        land=land,
        resource_stock=resources,
        accounts=accounts,
    )


def _weighted(values: Mapping[str, float], weights: Mapping[str, float]) -> float:
    keys = list(weights)
    return kernel.infrastructure_composite([values[k] for k in keys], [weights[k] for k in keys])


def compute_indicators(state: SimulationState, params: EngineParams | None,
                       index_config: IndexConfig,
                       exogenous: ExogenousInputs | None = None) -> IndicatorSnapshot:
    """Evaluate the whole indicator chain on one state.

    ``params`` is accepted for symmetry with :func:`step`; the current
    indicator set reads only the state, the exogenous series and the config.
    """
    cfg = index_config
    if cfg.resource_reference is None:
        raise InvalidInput("index_config.resource_reference must be resolved before use")
    exogenous = exogenous or ExogenousInputs()
    t = state.time

    gdpp = kernel.gdp_per_capita(state.accounts, state.population).value
    if gdpp > 0:
        log_posts = Goalposts(math.log(cfg.gdp_goalposts.min), math.log(cfg.gdp_goalposts.max))
        gdp_index = kernel.normalize_component(math.log(gdpp), log_posts)
    else:
        gdp_index = 0.0
    le_index = kernel.normalize_component(exogenous.at("life_expectancy", t),
                                          cfg.life_expectancy_goalposts)
    edu_index = kernel.normalize_component(exogenous.at("education", t), cfg.education_goalposts)

    hdi_value = kernel.hdi(HdiComponents(gdp_index, edu_index, le_index))
    hpi_value = kernel.hpi(HpiInputs(exogenous.at("hpi_p1", t), exogenous.at("hpi_p2", t),
                                     exogenous.at("hpi_p3", t), cfg.hpi_alpha))

    if cfg.isec_source == "series":
        i_sec = exogenous.at("social_security", t)
    else:
        i_sec = _weighted({"education": edu_index, "health": le_index,
                           "social_insurance": exogenous.at("social_insurance", t)},
                          cfg.isec_weights)

    development = hdi_value if cfg.welfare_index == "hdi" else 1.0 - hpi_value / 100.0
    total_land = state.land.total
    segments = {
        "individual_development": development,
        "social_sector": i_sec,
        "income": gdp_index,
        "infrastructure": _weighted(cfg.infrastructure, cfg.infrastructure_weights),
        "green_share": min(1.0, state.land.green_area / total_land) if total_land > 0 else 0.0,
        "resource_remaining": min(1.0, state.resource_stock / cfg.resource_reference),
    }
    components = ComponentIndices(
        social=_weighted(segments, cfg.social_weights),
        economic=_weighted(segments, cfg.economic_weights),
        natural=_weighted(segments, cfg.natural_weights),
    )
    cos_alpha = kernel.harmonization(components)
    i_lq = kernel.life_quality(components)
    return IndicatorSnapshot(
        gdpp=gdpp,
        hdi=hdi_value,
        hpi=hpi_value,
        i_s=components.social,
        i_ec=components.economic,
        i_n=components.natural,
        cos_alpha=cos_alpha,
        i_lq=i_lq,
        i_sec=i_sec,
        i_sd=kernel.sustainable_development_index(i_sec, i_lq),
    )


Resolver = Callable[[float], "tuple[EngineParams, ExogenousInputs]"]


def simulate(initial: SimulationState, n_steps: int, resolve: Resolver,
             index_config: IndexConfig) -> Trajectory:
    """Run ``n_steps`` steps, asking ``resolve(t)`` for the parameters in force at t."""
    if index_config.resource_reference is None:
        index_config = replace(index_config, resource_reference=initial.resource_stock or 1.0)
    records = []
    state = initial
    for i in range(n_steps + 1):
        try:
            params, exogenous = resolve(state.time)
            records.append(Record(state, compute_indicators(state, params, index_config,
                                                            exogenous)))
            if i < n_steps:
                state = step(state, params, exogenous)
        except ModelError as exc:
            raise StepError(i, state.time, exc) from exc
    return Trajectory(tuple(records))


def step_count(horizon_years: float, dt: float) -> int:
    if not horizon_years > 0:
        raise InvalidInput(f"horizon must be > 0, got {horizon_years!r}")
    n = round(horizon_years / dt)
    if abs(n * dt - horizon_years) > TIME_EPS * max(1.0, abs(horizon_years)):
        raise InvalidInput(f"horizon {horizon_years:g} is not a multiple of dt={dt:g}")
    return n


def run(initial: SimulationState, params: EngineParams, horizon_years: float,
        index_config: IndexConfig | None = None,
        exogenous: ExogenousInputs | None = None) -> Trajectory:
    """Simulate ``horizon_years`` ahead; returns ``horizon/dt + 1`` records."""
    n = step_count(horizon_years, params.dt)
    exogenous = exogenous or ExogenousInputs()
    return simulate(initial, n, lambda t: (params, exogenous), index_config or IndexConfig())
