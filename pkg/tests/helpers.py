"""Independent re-derivations used as test oracles."""

import math


def oracle_step(state, params, exogenous):
    """Hand-rolled Euler step using only ``math``, mirroring the documented sub-steps."""
    dt = params.dt
    areas = dict(state.land.areas)
    total = math.fsum(areas.values())
    green = math.fsum(areas[g] for g in state.land.green)
    pop, cap = state.population, state.capital

    prod = params.production
    labor = params.labor_share * pop
    land_in = sum(areas[t] for t in params.productive_land)
    y = (prod.tfp * labor ** prod.labor_elasticity * cap ** prod.capital_elasticity
         * land_in ** (1 - prod.labor_elasticity - prod.capital_elasticity))

    def flow(p):
        return math.exp(p.a0 + p.a1 * pop + p.a3 * total + p.a4 * green)

    new_pop = max(0.0, pop + dt * (flow(params.inflow) - flow(params.outflow)))
    new_cap = max(0.0, cap + dt * (params.savings_rate * y - params.depreciation_rate * cap))
    new_areas = {}
    rates = params.land_transitions.rates
    for j in areas:
        gain = sum(rates.get(i, {}).get(j, 0.0) * areas[i] for i in areas if i != j)
        loss = sum(rates.get(j, {}).values()) * areas[j]
        new_areas[j] = areas[j] + dt * gain - dt * loss
    new_res = max(0.0, state.resource_stock - dt * params.resource_use_per_output * y)
    t = state.time
    accounts = {
        "consumption": (1 - params.savings_rate) * y,
        "investment": params.savings_rate * y,
        "government_spending": exogenous.at("government_spending", t),
        "exports": exogenous.at("exports", t),
        "imports": exogenous.at("imports", t),
    }
    return {"time": t + dt, "population": new_pop, "capital": new_cap, "areas": new_areas,
            "resource_stock": new_res, "accounts": accounts, "output": y}


def grid_minimize(design, targets, lo, hi, points=41, rounds=5):
    """Minimize the squared error by repeated grid refinement (k <= 2 columns).

    Returns the minimizer and the final grid spacing per coordinate.  Each
    round shrinks the spacing tenfold; past ~1e-7 the squared error is flat
    to rounding, so keep ``rounds`` small enough that spacing stays above it.
    """
    import itertools

    import numpy as np

    x = np.asarray(design, dtype=float)
    y = np.asarray(targets, dtype=float)
    k = x.shape[1]
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    best = (lo + hi) / 2
    for _ in range(rounds):
        axes = [np.linspace(lo[j], hi[j], points) for j in range(k)]
        best_err = np.inf
        for cand in itertools.product(*axes):
            cand = np.array(cand)
            r = x @ cand - y
            err = float(r @ r)
            if err < best_err:
                best_err, best = err, cand
        step = (hi - lo) / (points - 1)
        lo, hi = best - 2 * step, best + 2 * step
    return best, step


def synthetic_trajectory(ratio_by_year, eu=25000.0):
    """Trajectory whose GDP per capita equals ``ratio * eu`` in each listed year."""
    from sdmodel.engine import IndicatorSnapshot, LandAllocation, Record, SimulationState, Trajectory

    records = []
    for year, ratio in sorted(ratio_by_year.items()):
        state = SimulationState(float(year), 1.0, 1.0, LandAllocation({"forest": 1.0}, ()), 1.0)
        snap = IndicatorSnapshot(gdpp=ratio * eu, hdi=0.5, hpi=10.0, i_s=0.5, i_ec=0.5, i_n=0.5,
                                 cos_alpha=1.0, i_lq=1.2, i_sec=0.5, i_sd=1.3)
        records.append(Record(state, snap))
    return Trajectory(tuple(records))


MINI_DOC = {
    "name": "mini",
    "span": {"start": 2000, "end": 2003},
    "initial": {
        "population": 1000.0, "capital": 400.0, "resource_stock": 50.0,
        "land": {"areas": {"forest": 30.0, "agricultural": 60.0, "urban_industrial": 10.0},
                 "green": ["forest"]},
    },
    "engine": {
        "inflow": {"a0": 3.0, "a1": 0.0, "a3": 0.0, "a4": 0.0},
        "outflow": {"a0": 2.5, "a1": 0.0, "a3": 0.0, "a4": 0.0},
        "production": {"tfp": 1.5, "labor_elasticity": 0.3, "capital_elasticity": 0.4},
        "labor_share": 0.5, "savings_rate": 0.2, "depreciation_rate": 0.05,
        "resource_use_per_output": 0.01,
        "land_transitions": {"agricultural": {"urban_industrial": 0.01}},
    },
    "index_config": {"goalposts": {"gdp_per_capita": [0.01, 10.0]}},
    "exogenous": {"government_spending": 0.0, "exports": 0.0, "imports": 0.0,
                  "eu_gdpp_ppp": 1.0},
    "horizons": [{"name": "h", "year": 2003, "metric": "gdpp_ppp_ratio", "comparator": ">",
                  "threshold": 0.1}],
}
