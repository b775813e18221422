import json

import pytest

from orliczmorrey.harness import suites
from orliczmorrey.harness.experiments import ExperimentSpec, SpecError, physical_family, power_sweep, run_experiment
from orliczmorrey.harness.report import canonical_json, read_report, render_text, to_csv, to_svg, write_report

SMALL = {"scenario": "riesz_boundedness", "seed": 1, "n": 1, "alpha": 0.25, "resolutions": [512, 1024]}


@pytest.mark.parametrize("bad,field", [
    ({"seed": 1}, "scenario"),
    ({"scenario": "nope"}, "scenario"),
    ({"scenario": "riesz_boundedness", "colour": 1}, "colour"),
    ({"scenario": "riesz_boundedness", "n": 3}, "n"),
    ({"scenario": "riesz_boundedness", "alpha": 2.0}, "alpha"),
    ({"scenario": "riesz_boundedness", "resolutions": [1024, 512]}, "resolutions"),
    ({"scenario": "riesz_boundedness", "seed": 1.5}, "seed"),
    ({"scenario": "riesz_boundedness", "psi": {"kind": "power"}}, "psi"),
    ({"scenario": "riesz_boundedness", "model": {"p": 2}}, "model.q"),
    ({"scenario": "riesz_boundedness", "fields": [{"kind": "blob"}]}, "fields[0].kind"),
])
def test_spec_errors_name_the_field(bad, field):
    with pytest.raises(SpecError) as exc:
        ExperimentSpec.from_dict(bad)
    assert exc.value.field == field


def test_spec_round_trip():
    spec = ExperimentSpec.from_dict(SMALL)
    assert ExperimentSpec.from_dict(spec.to_dict()) == spec


def test_physical_family_fixed_across_resolutions():
    spec = ExperimentSpec.from_dict(SMALL)
    assert physical_family(spec).family_id == physical_family(spec).family_id
    assert physical_family(spec).radii[0] == pytest.approx(1 / 64)


def test_boundedness_small_run_is_stable():
    rep = run_experiment(SMALL)
    assert rep["status"] == "holds"
    assert rep["in_hypothesis"]
    assert rep["drift"] <= 0.10
    assert all(p["constant"] > 0 for p in rep["per_resolution"])
    assert rep["provenance"]["seed"] == 1


def test_out_of_hypothesis_is_labeled():
    spec = dict(SMALL, model={"p": 2.0, "q": 4.0, "lambda": 0.4, "mu": 0.6})
    rep = run_experiment(spec)
    assert rep["in_hypothesis"] is False
    assert rep["status"] == "inconclusive"


def test_commutator_constant_b_gives_zero_ratios():
    spec = dict(SMALL, scenario="commutator_boundedness", b={"kind": "constant", "value": 3.0})
    rep = run_experiment(spec)
    for p in rep["per_resolution"]:
        assert all(row.get("ratio", 0.0) == 0.0 for row in p["fields"])


def test_local_estimate_zero_field_skipped():
    spec = {"scenario": "local_estimate", "n": 1, "resolutions": [256, 512], "fields": [{"kind": "zero"}]}
    rep = run_experiment(spec)
    assert rep.get("skipped") is True


def test_local_estimate_far_support():
    spec = {"scenario": "local_estimate", "n": 1, "resolutions": [1024, 2048],
            "fields": [{"kind": "shifted_indicator", "center": 2.5, "radius": 0.25}],
            "balls": {"centers": [0.0], "radii": [0.125, 0.25]}}
    rep = run_experiment(spec)
    assert rep["status"] == "holds"


def test_lemma_suite_broken_phi():
    rep = run_experiment({"scenario": "lemma_suite", "phi": {"kind": "piecewise_linear_convex",
                                                             "knots": [[1, 2], [2, 3]]}})
    assert rep["status"] == "fails"
    assert rep["reason"] == "construction rejected"


def test_lemma_suite_zero_field_vacuous():
    rep = run_experiment({"scenario": "lemma_suite", "sweep": {"zero_field": True}})
    assert rep["status"] == "holds" and rep["vacuous"]


def test_hardy_scenario():
    rep = run_experiment({"scenario": "hardy_sharpness"})
    assert rep["hardy"]["plain"]["B"] == pytest.approx(1.0, abs=1e-6)
    assert rep["hardy"]["log"]["B"] == pytest.approx(2.0, abs=1e-6)


def test_power_sweep_deterministic():
    assert power_sweep(10, 3) == power_sweep(10, 3)
    assert len(power_sweep(10, 3)) == 10


def test_timing_only_when_asked():
    assert "wall_time" not in run_experiment({"scenario": "hardy_sharpness"})
    assert "wall_time" in run_experiment({"scenario": "hardy_sharpness", "timing": True})


def test_report_io(tmp_path):
    rep = run_experiment(SMALL)
    p = tmp_path / "r.json"
    write_report(rep, p)
    assert read_report(p) == json.loads(canonical_json(rep))
    assert p.read_text() == canonical_json(rep)
    csv_text = to_csv(rep)
    assert csv_text.splitlines()[0] == "cells,constant"
    assert len(csv_text.splitlines()) == 3
    assert to_svg(rep).startswith("<svg") and "polyline" in to_svg(rep)
    assert "status:   holds" in render_text(rep)


def test_canonical_json_non_finite():
    assert json.loads(canonical_json({"a": float("inf"), "b": float("nan")})) == {"a": "inf", "b": "nan"}


def test_suite_records():
    assert suites.lp_consistency(trials=10)["status"] == "holds"
    assert suites.sandwich()["status"] == "holds"
    assert suites.l1_bound(trials=20)["status"] == "holds"
    assert suites.weak_le_strong(trials=20)["status"] == "holds"
    assert suites.zero_field_norms()["status"] == "holds"
    phi, rec = suites.young_check("power:2")
    assert phi is not None and rec["status"] == "holds"
    phi, rec = suites.young_check("cube:2")
    assert phi is None and rec["status"] == "fails"
