"""Least-squares calibration of the production and population-flow laws.

Both laws are linear in their parameters after taking logs, so the fits
reduce to ordinary least squares.  :func:`ols_solve` works on a QR
factorization of the column-equilibrated design matrix rather than on the
normal equations: levels such as population (~1e7) sit next to an intercept
column of ones, and squaring that conditioning loses most of the digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    EstimateOutOfDomain,
    InvalidInput,
    NonPositiveFlow,
    RankDeficient,
    TooFewObservations,
)
from .kernel import PpflParams, ProductionParams

#: Relative pivot magnitude below which a column counts as dependent.
RANK_TOL = 1e-10


@dataclass(frozen=True)
class ProductionObservation:
    output: float
    labor: float
    capital: float
    land: float

    def __post_init__(self):
        for name in ("output", "labor", "capital", "land"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value > 0):
                raise InvalidInput(f"{name} must be finite and > 0, got {value!r}")


@dataclass(frozen=True)
class FlowObservation:
    flow: float
    pop: float
    land: float
    green_land: float

    def __post_init__(self):
        if not (math.isfinite(self.flow) and self.flow > 0):
            raise NonPositiveFlow(f"flow must be > 0 to take its log, got {self.flow!r}")
        for name in ("pop", "land", "green_land"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value >= 0):
                raise InvalidInput(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class FitReport:
    estimates: dict[str, float]
    r_squared: float
    rmse: float
    residuals: tuple[float, ...]
    n_observations: int


def ols_solve(design, targets, names: Sequence[str] | None = None) -> np.ndarray:
    """Least-squares coefficients of ``design @ beta ~= targets``.

    Raises :class:`RankDeficient` naming the first column that is (numerically)
    a combination of the columns before it.
    """
    x = np.asarray(design, dtype=float)
    y = np.asarray(targets, dtype=float)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise InvalidInput(f"design {x.shape} and targets {y.shape} do not line up")
    n, k = x.shape
    if n < k or k == 0:
        raise TooFewObservations(f"need at least {k} observations for {k} coefficients, got {n}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidInput("design and targets must be finite")

    norms = np.linalg.norm(x, axis=0)
    for j in range(k):
        if norms[j] == 0.0:
            raise RankDeficient(j, names[j] if names else None)
    q, r = np.linalg.qr(x / norms, mode="reduced")
    # Columns have unit norm, so |R_jj| is the part of column j not explained
    # by columns 0..j-1.
    diag = np.abs(np.diag(r))
    for j in range(k):
        if diag[j] <= RANK_TOL:
            raise RankDeficient(j, names[j] if names else None)
    scaled = _back_substitute(r, q.T @ y)
    return scaled / norms


def _back_substitute(r: np.ndarray, b: np.ndarray) -> np.ndarray:
    k = r.shape[0]
    out = np.zeros(k)
    for i in range(k - 1, -1, -1):
        out[i] = (b[i] - r[i, i + 1:] @ out[i + 1:]) / r[i, i]
    return out


def _report(design: np.ndarray, targets: np.ndarray, coef: np.ndarray,
            estimates: dict[str, float]) -> FitReport:
    resid = targets - design @ coef
    ssr = float(resid @ resid)
    centered = targets - targets.mean()
    sst = float(centered @ centered)
    if sst > 0:
        r2 = min(1.0, max(0.0, 1.0 - ssr / sst))
    else:
        r2 = 1.0
    return FitReport(
        estimates=estimates,
        r_squared=r2,
        rmse=math.sqrt(ssr / len(targets)),
        residuals=tuple(float(v) for v in resid),
        n_observations=len(targets),
    )


def fit_production(observations: Sequence[ProductionObservation],
                   constrain_crs: bool = True) -> tuple[ProductionParams, FitReport]:
    """Estimate (A, alpha, beta) from log-linear least squares.

    With ``constrain_crs`` (the default) the regression is run on per-land
    quantities so the land exponent equals ``1 - alpha - beta`` by
    construction.  The unconstrained fit estimates the land exponent freely
    and reports it (and the returns-to-scale sum) in the fit report only.
    """
    obs = list(observations)
    if len(obs) < 4:
        raise TooFewObservations(f"production fit needs >= 4 observations, got {len(obs)}")
    y = np.array([o.output for o in obs], dtype=float)
    lab = np.array([o.labor for o in obs], dtype=float)
    cap = np.array([o.capital for o in obs], dtype=float)
    land = np.array([o.land for o in obs], dtype=float)
    ones = np.ones(len(obs))

    if constrain_crs:
        design = np.column_stack([ones, np.log(lab / land), np.log(cap / land)])
        targets = np.log(y / land)
        coef = ols_solve(design, targets, ["intercept", "log_labor_per_land",
                                           "log_capital_per_land"])
        log_a, alpha, beta = coef
        raw = {"tfp": math.exp(log_a), "labor_elasticity": float(alpha),
               "capital_elasticity": float(beta), "land_elasticity": float(1 - alpha - beta)}
    else:
        design = np.column_stack([ones, np.log(lab), np.log(cap), np.log(land)])
        targets = np.log(y)
        coef = ols_solve(design, targets, ["intercept", "log_labor", "log_capital", "log_land"])
        log_a, alpha, beta, gamma = coef
        raw = {"tfp": math.exp(log_a), "labor_elasticity": float(alpha),
               "capital_elasticity": float(beta), "land_elasticity": float(gamma),
               "returns_to_scale": float(alpha + beta + gamma)}

    if alpha <= 0 or beta <= 0 or alpha + beta >= 1:
        raise EstimateOutOfDomain(
            "estimated elasticities violate alpha > 0, beta > 0, alpha + beta < 1", raw)
    params = ProductionParams(raw["tfp"], raw["labor_elasticity"], raw["capital_elasticity"])
    return params, _report(design, targets, coef, raw)


def fit_population_flow(observations: Sequence[FlowObservation]) -> tuple[PpflParams, FitReport]:
    obs = list(observations)
    if len(obs) < 5:
        raise TooFewObservations(f"population-flow fit needs >= 5 observations, got {len(obs)}")
    design = np.column_stack([
        np.ones(len(obs)),
        [o.pop for o in obs],
        [o.land for o in obs],
        [o.green_land for o in obs],
    ])
    targets = np.log([o.flow for o in obs])
    coef = ols_solve(design, targets, ["intercept", "pop", "land", "green_land"])
    raw = {"a0": float(coef[0]), "a1": float(coef[1]), "a3": float(coef[2]), "a4": float(coef[3])}
    return PpflParams(**raw), _report(design, targets, coef, raw)
