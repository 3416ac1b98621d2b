"""Sweep the savings rate and report the horizon-target outcomes for each value."""

from __future__ import annotations

import argparse
from dataclasses import replace

import numpy as np

from sdmodel.scenario import OverrideEvent, default_scenario, evaluate_horizons, run_trajectory


def main(argv: list[str] | None = None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--low", type=float, default=0.15)
    ap.add_argument("--high", type=float, default=0.45)
    ap.add_argument("--steps", type=int, default=7)
    ap.add_argument("--from-year", type=int, default=2010)
    args = ap.parse_args(argv)
    base = default_scenario()
    names = [h.name for h in base.horizons]
    print(f"{'savings':>8} " + " ".join(f"{n:>14}" for n in names) + f" {'final I_sd':>11}")
    for rate in np.linspace(args.low, args.high, args.steps):
        s = replace(base, overrides=(OverrideEvent(args.from_year, "engine.savings_rate",
                                                   float(rate)),))
        traj = run_trajectory(s)
        report = evaluate_horizons(traj, s)
        cells = [f"{e.value:8.3f} {'ok' if e.met else '--':>5}" for e in report.entries]
        print(f"{rate:8.3f} " + " ".join(cells) + f" {traj[-1].indicators.i_sd:11.4f}")


if __name__ == "__main__":
    main()
