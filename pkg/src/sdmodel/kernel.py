"""Closed-form indicator formulas.

Every function here is pure and works on plain floats.  The small frozen
dataclasses validate their own invariants on construction, so a kernel call
on a valid parameter object only has to check the per-call inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import (
    DegenerateGoalposts,
    DegenerateIndices,
    ExponentOverflow,
    InvalidAlpha,
    InvalidInput,
    LengthMismatch,
    NonPositiveInput,
    ZeroPopulation,
    ZeroWeightSum,
)

#: Largest exponent magnitude accepted by :func:`population_flow`.
EXPONENT_GUARD = 700.0

DEFAULT_HPI_ALPHA = 3.0


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidInput(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class PpflParams:
    """Coefficients of the exponential population-flow law.

    ``a2`` is deliberately absent: the flow exponent uses the intercept and
    the population, land and green-land coefficients only.
    """

    a0: float = 0.0
    a1: float = 0.0
    a3: float = 0.0
    a4: float = 0.0

    def __post_init__(self):
        for name in ("a0", "a1", "a3", "a4"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))


@dataclass(frozen=True)
class NationalAccounts:
    consumption: float = 0.0
    investment: float = 0.0
    government_spending: float = 0.0
    exports: float = 0.0
    imports: float = 0.0

    def __post_init__(self):
        for name in ("consumption", "investment", "government_spending", "exports", "imports"):
            value = _finite(name, getattr(self, name))
            if value < 0:
                raise InvalidInput(f"{name} must be >= 0, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def gdp(self) -> float:
        return (self.consumption + self.investment + self.government_spending
                + (self.exports - self.imports))


@dataclass(frozen=True)
class HdiComponents:
    gdp_index: float
    education_index: float
    life_expectancy_index: float

    def __post_init__(self):
        for name in ("gdp_index", "education_index", "life_expectancy_index"):
            value = _finite(name, getattr(self, name))
            if not 0.0 <= value <= 1.0:
                raise InvalidInput(f"{name} must lie in [0, 1], got {value!r}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class HpiInputs:
    """Deprivation percentages and the substitutability exponent.

    p1 is the probability of not surviving to 40 (x100), p2 the adult
    illiteracy rate and p3 the averaged water-access / underweight share.
    """

    p1: float
    p2: float
    p3: float
    alpha: float = DEFAULT_HPI_ALPHA

    def __post_init__(self):
        for name in ("p1", "p2", "p3"):
            value = _finite(name, getattr(self, name))
            if not 0.0 <= value <= 100.0:
                raise InvalidInput(f"{name} must lie in [0, 100], got {value!r}")
            object.__setattr__(self, name, value)
        alpha = float(self.alpha)
        if math.isnan(alpha) or alpha < 1.0:
            raise InvalidAlpha(f"alpha must be >= 1, got {alpha!r}")
        object.__setattr__(self, "alpha", alpha)


@dataclass(frozen=True)
class ProductionParams:
    tfp: float
    labor_elasticity: float
    capital_elasticity: float

    def __post_init__(self):
        a = _finite("tfp", self.tfp)
        alpha = _finite("labor_elasticity", self.labor_elasticity)
        beta = _finite("capital_elasticity", self.capital_elasticity)
        if a <= 0:
            raise InvalidInput(f"tfp must be > 0, got {a!r}")
        if alpha <= 0 or beta <= 0:
            raise InvalidInput("labor and capital elasticities must be > 0")
        if alpha + beta >= 1:
            raise InvalidInput(
                f"labor_elasticity + capital_elasticity must be < 1, got {alpha + beta!r}")
        object.__setattr__(self, "tfp", a)
        object.__setattr__(self, "labor_elasticity", alpha)
        object.__setattr__(self, "capital_elasticity", beta)

    @property
    def land_elasticity(self) -> float:
        return 1.0 - self.labor_elasticity - self.capital_elasticity


@dataclass(frozen=True)
class ComponentIndices:
    social: float
    economic: float
    natural: float

    def __post_init__(self):
        for name in ("social", "economic", "natural"):
            value = _finite(name, getattr(self, name))
            if value < 0:
                raise InvalidInput(f"component index {name} must be >= 0, got {value!r}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class Goalposts:
    min: float
    max: float

    def __post_init__(self):
        lo = float(self.min)
        hi = float(self.max)
        if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
            raise DegenerateGoalposts(f"goalposts need finite max > min, got ({lo!r}, {hi!r})")
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)


class GdpPerCapita(NamedTuple):
    value: float
    #: True when net exports pushed total GDP below zero.
    negative: bool


def population_flow(params: PpflParams, pop: float, land: float, green_land: float) -> float:
    """Persons per year from ``exp(a0 + a1*pop + a3*land + a4*green_land)``."""
    pop = _finite("pop", pop)
    land = _finite("land", land)
    green_land = _finite("green_land", green_land)
    if pop < 0 or land < 0 or green_land < 0:
        raise InvalidInput("pop, land and green_land must be >= 0")
    if green_land > land:
        raise InvalidInput(f"green_land ({green_land!r}) exceeds land ({land!r})")
    exponent = params.a0 + params.a1 * pop + params.a3 * land + params.a4 * green_land
    if not abs(exponent) <= EXPONENT_GUARD:
        raise ExponentOverflow(f"flow exponent {exponent!r} exceeds +/-{EXPONENT_GUARD:g}")
    return math.exp(exponent)


def gdp_per_capita(accounts: NationalAccounts, pop: float) -> GdpPerCapita:
    pop = float(pop)
    if not pop > 0:
        raise ZeroPopulation(f"population must be > 0, got {pop!r}")
    gdp = accounts.gdp
    return GdpPerCapita(gdp / pop, gdp < 0)


def normalize_component(value: float, goalposts: Goalposts) -> float:
    """Min-max scale ``value`` onto [0, 1], clamping outside the goalposts."""
    if goalposts.max <= goalposts.min:
        raise DegenerateGoalposts("goalposts need max > min")
    value = float(value)
    if math.isnan(value):
        raise InvalidInput("cannot normalize NaN")
    scaled = (value - goalposts.min) / (goalposts.max - goalposts.min)
    return min(1.0, max(0.0, scaled))


def hdi(c: HdiComponents) -> float:
    return (c.gdp_index + c.education_index + c.life_expectancy_index) / 3.0


def hpi(h: HpiInputs) -> float:
    """Power mean of the three deprivation rates with exponent ``h.alpha``."""
    ps = (h.p1, h.p2, h.p3)
    alpha = h.alpha
    top = max(ps)
    if top == 0.0:
        return 0.0
    if alpha == 1.0:
        value = (h.p1 + h.p2 + h.p3) / 3.0
    else:
        # Factor out the maximum so large alpha cannot overflow.
        ratio_mean = sum((p / top) ** alpha for p in ps) / 3.0
        value = top * ratio_mean ** (1.0 / alpha)
    return min(top, max(min(ps), value))


def production(p: ProductionParams, labor: float, capital: float, land: float) -> float:
    """Cobb-Douglas output with the land exponent fixed at one minus the others."""
    for name, value in (("labor", labor), ("capital", capital), ("land", land)):
        if not float(value) > 0:
            raise NonPositiveInput(f"{name} must be > 0, got {value!r}")
    return (p.tfp * float(labor) ** p.labor_elasticity
            * float(capital) ** p.capital_elasticity
            * float(land) ** p.land_elasticity)


def harmonization(c: ComponentIndices) -> float:
    """Cosine between the component vector and the equal-weights diagonal."""
    top = max(c.social, c.economic, c.natural)
    if top == 0.0:
        raise DegenerateIndices("harmonization is undefined when all components are zero")
    if c.social == c.economic == c.natural:
        return 1.0
    # Scale by the largest component so tiny inputs cannot underflow when squared.
    xs = (c.social / top, c.economic / top, c.natural / top)
    return min(1.0, sum(xs) / math.sqrt(3.0 * sum(x * x for x in xs)))


def life_quality(c: ComponentIndices) -> float:
    # Square root of the plain sum, not of the sum of squares.
    return math.sqrt(c.social + c.economic + c.natural) * harmonization(c)


def sustainable_development_index(i_sec: float, i_lq: float) -> float:
    i_sec = _finite("i_sec", i_sec)
    i_lq = _finite("i_lq", i_lq)
    if i_sec < 0 or i_lq < 0:
        raise InvalidInput("i_sec and i_lq must be >= 0")
    return math.hypot(i_sec, i_lq)


def infrastructure_composite(sub_indices: Sequence[float], weights: Sequence[float]) -> float:
    """Weighted mean of sub-indices; also used for every segment aggregation."""
    xs = [float(x) for x in sub_indices]
    ws = [float(w) for w in weights]
    if not xs or len(xs) != len(ws):
        raise LengthMismatch(
            f"need equal-length, non-empty lists, got {len(xs)} values and {len(ws)} weights")
    if any(not math.isfinite(w) or w < 0 for w in ws):
        raise InvalidInput("weights must be finite and >= 0")
    if any(not math.isfinite(x) for x in xs):
        raise InvalidInput("sub-indices must be finite")
    total = math.fsum(ws)
    if total <= 0:
        raise ZeroWeightSum("weights sum to zero")
    return math.fsum(w * x for w, x in zip(ws, xs)) / total
