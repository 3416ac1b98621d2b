import copy
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import MINI_DOC, oracle_step, synthetic_trajectory
from sdmodel import engine as eng
from sdmodel.errors import (
    InvariantViolation,
    ParseError,
    SchemaError,
    ScenarioRunError,
    SpanMismatch,
    TargetYearOutOfRange,
)
from sdmodel.scenario import (
    DEFAULTS,
    OverrideEvent,
    apply_overrides,
    compare_scenarios,
    default_scenario_text,
    dump_scenario,
    evaluate_horizons,
    load_scenario,
    run_scenario,
    run_trajectory,
    scenario_to_document,
)


def with_(doc, **changes):
    out = copy.deepcopy(doc)
    out.update(changes)
    return out


class TestLoad:
    def test_minimal_document_uses_defaults(self):
        s = load_scenario('{"name": "x"}')
        full = load_scenario(default_scenario_text())
        assert s.name == "x"
        assert s.engine == full.engine
        assert s.initial == full.initial
        assert s.index_config.hpi_alpha == 3.0
        assert [h.threshold for h in s.horizons] == [0.5, 0.8, 1.0]
        assert [h.comparator for h in s.horizons] == [">", ">=", ">"]
        assert [h.year for h in s.horizons] == [2013, 2020, 2030]

    def test_bundled_file_matches_code_defaults(self):
        doc = json.loads(default_scenario_text())
        doc.pop("description")
        expected = copy.deepcopy(DEFAULTS)
        expected.pop("description")
        assert doc == expected

    def test_unknown_key_suggests_nearest(self):
        with pytest.raises(SchemaError) as info:
            load_scenario({"engine": {"savings_rat": 0.3}})
        assert info.value.path == "engine.savings_rat"
        assert info.value.suggestion == "savings_rate"

    def test_unknown_override_path(self):
        doc = {"overrides": [{"year": 2010, "target": "engine.savings", "value": 0.3}]}
        with pytest.raises(SchemaError) as info:
            load_scenario(doc)
        assert "engine.savings" in str(info.value)
        assert info.value.suggestion == "engine.savings_rate"

    def test_parse_error_has_position(self):
        with pytest.raises(ParseError) as info:
            load_scenario('{\n  "name": "x",\n  oops\n}', "s.json")
        assert (info.value.line, info.value.source) == (3, "s.json")
        assert str(info.value).startswith("s.json:3:")

    @pytest.mark.parametrize("text", ['{"name": NaN}', '{"a": 1, "a": 2}', "[1, 2]"])
    def test_parse_rejects(self, text):
        with pytest.raises(ParseError):
            load_scenario(text)

    @pytest.mark.parametrize("doc,field", [
        ({"engine": {"savings_rate": 1.5}}, "engine"),
        ({"engine": {"production": {"labor_elasticity": 0.7}}}, "engine.production"),
        ({"span": {"start": 2010, "end": 2005}}, "span"),
        ({"engine": {"dt": 0.7}}, "span"),
        ({"engine": {"land_transitions": {"forest": {"wetland": 0.1}}}},
         "engine.land_transitions.forest.wetland"),
        ({"exogenous": {"hpi_p1": 140}}, "exogenous"),
        ({"exogenous": {"education": {"2010": 80}}}, "exogenous.education"),
        ({"overrides": [{"year": 2100, "target": "engine.savings_rate", "value": 0.3}]},
         "overrides[0].year"),
        ({"overrides": [{"year": 2010, "target": "engine.savings_rate", "value": 3}]},
         "overrides (effective 2010)"),
        ({"horizons": [{"name": "h", "year": 2050, "metric": "I_sd", "comparator": ">",
                        "threshold": 1}]}, "horizons[0].year"),
        ({"horizons": [{"name": "h", "year": 2010, "metric": "I_sd", "comparator": "=",
                        "threshold": 1}]}, "horizons[0].comparator"),
        ({"initial": {"land": {"areas": {"forest": 1.0}, "green": ["forest"]}}},
         "engine.productive_land[0]"),
    ])
    def test_invariant_violations_name_field(self, doc, field):
        with pytest.raises(InvariantViolation) as info:
            load_scenario(doc)
        assert info.value.field == field

    def test_round_trip(self, scenario):
        again = load_scenario(dump_scenario(scenario))
        assert again == scenario
        assert load_scenario(dump_scenario(again)) == again
        assert scenario_to_document(again) == scenario_to_document(scenario)

    def test_round_trip_with_schedules_and_overrides(self):
        doc = with_(MINI_DOC, exogenous={**MINI_DOC["exogenous"],
                                         "government_spending": {"1990": 1.0, "2002": 5.0}},
                    overrides=[{"year": 2002, "target": "engine.savings_rate", "value": 0.3},
                               {"year": 2001, "target": "exogenous.exports", "value": 2.0}])
        s = load_scenario(doc)
        assert [o.effective_year for o in s.overrides] == [2001, 2002]
        assert load_scenario(dump_scenario(s)) == s

    def test_unicode_comparator_normalized(self):
        s = load_scenario({"horizons": [{"name": "h", "year": 2020, "metric": "HDI",
                                         "comparator": "≥", "threshold": 0.8}]})
        assert s.horizons[0].comparator == ">="


class TestApplyOverrides:
    def test_empty(self, scenario):
        assert apply_overrides(scenario.params, [], 2020) == scenario.params

    def test_last_writer_wins(self, scenario):
        evs = [OverrideEvent(2015, "engine.savings_rate", 0.3),
               OverrideEvent(2020, "engine.savings_rate", 0.35)]
        assert apply_overrides(scenario.params, evs, 2022).engine.savings_rate == 0.35
        assert apply_overrides(scenario.params, evs, 2017).engine.savings_rate == 0.3

    def test_future_not_applied(self, scenario):
        evs = [OverrideEvent(2025, "engine.savings_rate", 0.3)]
        assert apply_overrides(scenario.params, evs, 2020) == scenario.params

    def test_original_untouched(self, scenario):
        before = scenario.params
        evs = [OverrideEvent(2010, "engine.production.tfp", 2000.0),
               OverrideEvent(2010, "engine.land_transitions.forest.unused", 0.01),
               OverrideEvent(2010, "exogenous.government_spending", 1.0)]
        after = apply_overrides(before, evs, 2010)
        assert after.engine.production.tfp == 2000.0
        assert after.engine.land_transitions.rates["forest"]["unused"] == 0.01
        assert after.exogenous.at("government_spending", 2010) == 1.0
        assert before == scenario.params
        assert before.engine.land_transitions.rates["forest"] == {"agricultural": 0.001}


TARGETS = {"horizons": [
    {"name": "h2013", "year": 2013, "metric": "gdpp_ppp_ratio", "comparator": ">",
     "threshold": 0.5},
    {"name": "h2020", "year": 2020, "metric": "gdpp_ppp_ratio", "comparator": ">=",
     "threshold": 0.8},
    {"name": "h2030", "year": 2030, "metric": "gdpp_ppp_ratio", "comparator": ">",
     "threshold": 1.0},
]}


class TestEvaluateHorizons:
    s = load_scenario(TARGETS)

    def test_worked_examples(self):
        traj = synthetic_trajectory({2008: 0.4, 2013: 0.55, 2020: 0.80, 2030: 0.99})
        r = evaluate_horizons(traj, self.s)
        e13, e20, e30 = r.entries
        assert e13.met and e13.margin == pytest.approx(0.05, abs=1e-12)
        assert e20.met and e20.margin == pytest.approx(0.0, abs=1e-12)
        assert not e30.met and e30.margin == pytest.approx(-0.01, abs=1e-12)
        assert e13.first_crossing == 2013

    def test_misaligned_record_reports_gap(self):
        traj = synthetic_trajectory({2008: 0.4, 2012: 0.6, 2016: 0.7, 2022: 0.9, 2030: 1.2})
        r = evaluate_horizons(traj, self.s)
        assert r.entries[0].record_year == 2012 and r.entries[0].gap == 1
        assert r.entries[1].record_year == 2016 and not r.entries[1].met

    def test_out_of_range(self):
        with pytest.raises(TargetYearOutOfRange):
            evaluate_horizons(synthetic_trajectory({2008: 0.5, 2025: 0.9}), self.s)

    def test_less_than_margin_sign(self):
        s = load_scenario({"horizons": [{"name": "poverty", "year": 2020, "metric": "HPI",
                                         "comparator": "<", "threshold": 12.0}]})
        r = evaluate_horizons(synthetic_trajectory({2008: 0.5, 2020: 0.5}), s)
        assert r.entries[0].met and r.entries[0].margin == 2.0

    def test_pure(self):
        traj = synthetic_trajectory({2008: 0.4, 2013: 0.55, 2020: 0.80, 2030: 0.99})
        assert evaluate_horizons(traj, self.s) == evaluate_horizons(traj, self.s)


class TestRunScenario:
    def test_no_overrides_equals_direct_engine_run(self, scenario):
        traj, _ = run_scenario(scenario)
        direct = eng.run(scenario.initial, scenario.engine, scenario.end - scenario.start,
                         scenario.index_config, scenario.exogenous)
        assert traj == direct

    def test_override_causality(self):
        base = load_scenario(MINI_DOC)
        bumped = load_scenario(with_(MINI_DOC, overrides=[
            {"year": 2001, "target": "engine.savings_rate", "value": 0.4}]))
        a, b = run_trajectory(base), run_trajectory(bumped)
        for ra, rb in zip(a, b):
            if ra.state.time <= 2001:
                assert ra == rb
            else:
                assert rb.state.capital > ra.state.capital

    def test_bundled_default_reports_three_horizons(self, scenario):
        traj, report = run_scenario(scenario)
        assert len(traj) == 23
        assert [e.year for e in report.entries] == [2013, 2020, 2030]

    def test_errors_carry_scenario_name(self):
        doc = with_(MINI_DOC, engine={**MINI_DOC["engine"],
                                      "inflow": {"a0": 0.0, "a1": 0.9, "a3": 0.0, "a4": 0.0}})
        with pytest.raises(ScenarioRunError) as info:
            run_scenario(load_scenario(doc))
        assert "mini" in str(info.value) and "step 0" in str(info.value)


class TestCompare:
    def test_self_comparison(self, scenario):
        table = compare_scenarios([scenario, scenario])
        assert all(v == 0 for k, v in table[1].items() if k.startswith("delta_"))

    def test_end_of_span_override_is_noop(self):
        base = load_scenario(MINI_DOC)
        late = load_scenario(with_(MINI_DOC, name="late", overrides=[
            {"year": 2003, "target": "engine.savings_rate", "value": 0.5}]))
        a, b = compare_scenarios([base, late])
        assert {k: v for k, v in a.items() if k != "scenario"} == {
            k: v for k, v in b.items() if k != "scenario"}

    def test_higher_savings_matches_hand_stepped_miniature(self):
        base = load_scenario(MINI_DOC)
        rich_doc = with_(MINI_DOC, name="rich",
                         engine={**MINI_DOC["engine"], "savings_rate": 0.35})
        rich = load_scenario(rich_doc)
        _, row = compare_scenarios([base, rich])

        def hand(s):
            state = s.initial
            for _ in range(3):
                nxt = oracle_step(state, s.engine, s.exogenous)
                state = eng.SimulationState(
                    nxt["time"], nxt["population"], nxt["capital"],
                    eng.LandAllocation(nxt["areas"], state.land.green), nxt["resource_stock"],
                    eng.NationalAccounts(**nxt["accounts"]))
            return state

        hb, hr = hand(base), hand(rich)
        gdpp = lambda st_: st_.accounts.gdp / st_.population  # noqa: E731
        assert math.copysign(1, row["delta_capital"]) == math.copysign(1, hr.capital - hb.capital)
        assert row["delta_capital"] == pytest.approx(hr.capital - hb.capital, rel=1e-9)
        assert row["delta_gdpp"] == pytest.approx(gdpp(hr) - gdpp(hb), rel=1e-9)
        assert row["delta_population"] == 0.0
        assert row["delta_capital"] > 0

    def test_span_mismatch(self):
        a = load_scenario(MINI_DOC)
        b = load_scenario(with_(MINI_DOC, span={"start": 2000, "end": 2002}, horizons=[]))
        with pytest.raises(SpanMismatch):
            compare_scenarios([a, b])


documents = st.fixed_dictionaries({}, optional={
    "engine": st.fixed_dictionaries({}, optional={
        "savings_rate": st.floats(-0.5, 1.5),
        "depreciation_rate": st.floats(-0.1, 1.1),
        "labor_share": st.floats(-0.1, 1.2),
        "dt": st.sampled_from([0.5, 1.0, 2.0, 0.3]),
        "production": st.fixed_dictionaries({}, optional={
            "labor_elasticity": st.floats(-0.1, 0.9),
            "capital_elasticity": st.floats(-0.1, 0.9)}),
    }),
    "span": st.fixed_dictionaries({"start": st.integers(2000, 2010),
                                   "end": st.integers(2005, 2040)}),
    "exogenous": st.fixed_dictionaries({}, optional={
        "hpi_p2": st.floats(-10, 120), "social_insurance": st.floats(-0.5, 1.5)}),
    "overrides": st.lists(st.fixed_dictionaries({
        "year": st.integers(1995, 2045),
        "target": st.sampled_from(["engine.savings_rate", "engine.labor_share",
                                   "engine.depreciation_rate", "exogenous.hpi_p1",
                                   "engine.land_transitions.unused.forest", "engine.typo"]),
        "value": st.floats(-0.5, 1.5)}), max_size=3),
    "horizons": st.lists(st.fixed_dictionaries({
        "name": st.just("t"), "year": st.integers(1995, 2045),
        "metric": st.sampled_from(["I_sd", "HDI", "population", "bogus"]),
        "comparator": st.sampled_from([">", "<=", "=="]),
        "threshold": st.floats(0, 2)}), max_size=2),
})


@given(documents)
@settings(max_examples=150)
def test_loadable_scenarios_run_without_validation_errors(doc):
    try:
        s = load_scenario(doc)
    except (SchemaError, InvariantViolation):
        return
    traj, report = run_scenario(s)
    assert len(report.entries) == len(s.horizons)
    assert len(traj) == s.n_steps + 1
