"""Halve the step size repeatedly and report how end-of-run stocks move.

Explicit Euler is first order, so successive differences should shrink by
roughly half with each refinement.
"""

from __future__ import annotations

import argparse
from dataclasses import replace

from sdmodel import engine as eng
from sdmodel.scenario import default_scenario


def main(argv: list[str] | None = None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--years", type=float, default=22.0)
    ap.add_argument("--levels", type=int, default=5)
    args = ap.parse_args(argv)
    s = default_scenario()
    prev = None
    print(f"{'dt':>8} {'population':>14} {'capital':>14} {'I_sd':>10} {'d_capital':>12}")
    for level in range(args.levels):
        dt = 1.0 / 2 ** level
        params = replace(s.engine, dt=dt)
        last = eng.run(s.initial, params, args.years, s.index_config, s.exogenous)[-1]
        change = "" if prev is None else f"{last.state.capital - prev:12.4g}"
        print(f"{dt:8.4f} {last.state.population:14.1f} {last.state.capital:14.6g} "
              f"{last.indicators.i_sd:10.6f} {change}")
        prev = last.state.capital


if __name__ == "__main__":
    main()
