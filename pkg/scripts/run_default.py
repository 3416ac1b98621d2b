"""Run a scenario (the bundled default unless given) and print a yearly summary."""

from __future__ import annotations

import argparse

from sdmodel.scenario import default_scenario, load_scenario_file, run_scenario


def main(argv: list[str] | None = None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("scenario", nargs="?", help="scenario JSON file")
    ap.add_argument("--every", type=int, default=1, help="print every n-th record")
    args = ap.parse_args(argv)
    scenario = load_scenario_file(args.scenario) if args.scenario else default_scenario()
    trajectory, report = run_scenario(scenario)
    eu = scenario.exogenous
    print(f"{'year':>6} {'population':>12} {'gdpp':>10} {'ratio':>7} {'HDI':>6} "
          f"{'I_lq':>7} {'I_sd':>7}")
    for i, rec in enumerate(trajectory):
        if i % args.every and i != len(trajectory) - 1:
            continue
        st, ind = rec.state, rec.indicators
        ratio = ind.gdpp / eu.at("eu_gdpp_ppp", st.time)
        print(f"{st.time:6.0f} {st.population:12.0f} {ind.gdpp:10.1f} {ratio:7.3f} "
              f"{ind.hdi:6.3f} {ind.i_lq:7.4f} {ind.i_sd:7.4f}")
    print()
    for e in report.entries:
        crossing = "never" if e.first_crossing is None else f"{e.first_crossing:.0f}"
        print(f"{e.name}: {e.value:.4f} {e.comparator} {e.threshold:g} "
              f"{'met' if e.met else 'not met'} (margin {e.margin:+.4f}, first crossing {crossing})")


if __name__ == "__main__":
    main()
