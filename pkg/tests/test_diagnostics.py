import json

import numpy as np
import pytest

from akahler import diagnostics as D
from akahler import zoo


@pytest.fixture(scope="module")
def kt_report():
    return D.integrability_defects(zoo.kodaira_thurston(), nsamples=20, seed=42)


@pytest.fixture(scope="module")
def ladder():
    return {eps: D.integrability_defects(zoo.symplectic_twist_r4(eps), 20, 42, identities=False) for eps in (0.3, 0.1, 0.03)}


def _defects(**kw):
    base = dict.fromkeys(D.DEFECTS, 0.0)
    base.update(kw)
    return base


def test_classify_thresholds():
    assert D.classify(_defects()) == "kahler-consistent"
    assert D.classify(_defects(nijenhuis=1.0, L_diagonal=1.0)) == "non-integrable"
    assert D.classify(dict.fromkeys(D.DEFECTS, 1e-6)) == "inconclusive"
    assert D.classify(_defects(bisectional=1e-8)) == "inconclusive"
    with pytest.raises(ValueError):
        D.classify({"nijenhuis": 0.0})


def test_sample_points_start_at_center(kt):
    pts = D.sample_points(kt, 5, 1)
    assert np.array_equal(pts[0], kt.center)
    assert np.array_equal(pts[1:], kt.sample_points(4, 1))
    assert len(D.sample_points(kt, 1, 1)) == 1


@pytest.mark.parametrize("chart", [zoo.flat_kahler(2), zoo.flat_kahler(3), zoo.symplectic_twist_r4(0.0)], ids=lambda c: c.label)
def test_kahler_charts_are_consistent(chart):
    rep = D.integrability_defects(chart, nsamples=10, seed=1)
    assert rep.verdict == "kahler-consistent"
    assert max(rep.defects.values()) <= 1e-10
    assert all(r.residual <= 1e-10 for r in rep.identities)


def test_kt_defects(kt_report):
    rep = kt_report
    assert rep.verdict == "non-integrable"
    assert rep.defects["nijenhuis"] == pytest.approx(1.0, abs=1e-8)
    assert rep.argmax["nijenhuis"]["point"] == [0.0, 0.0, 0.0, 0.0]
    assert rep.argmax["nijenhuis"]["where"] == "N_J(X1, X2)"
    assert all(v >= 1e-3 for v in rep.defects.values())
    # left-invariant structure: the values read from the run are exact fractions
    assert rep.defects["L_diagonal"] == pytest.approx(0.5, abs=1e-12)
    assert rep.defects["RJ_vs_R"] == pytest.approx(0.25, abs=1e-12)
    assert rep.defects["hermitian_vs_R"] == pytest.approx(0.125, abs=1e-12)


def test_contrapositive_on_every_nonintegrable_chart(kt_report, ladder):
    for rep in [kt_report, *ladder.values()]:
        assert rep.defects["nijenhuis"] >= 1e-3
        for name in D.DEFECTS[1:]:
            assert rep.defects[name] >= 1e-6, (rep.chart, name)


def test_monotone_ladder(ladder):
    for name in D.DEFECTS:
        vals = [ladder[eps].defects[name] for eps in (0.3, 0.1, 0.03)]
        assert vals[0] > vals[1] > vals[2], (name, vals)


def test_defects_continuous_in_eps():
    base = D.integrability_defects(zoo.symplectic_twist_r4(0.1), 5, 3, identities=False).defects
    gaps = []
    for delta in (1e-2, 1e-3, 1e-4):
        near = D.integrability_defects(zoo.symplectic_twist_r4(0.1 + delta), 5, 3, identities=False).defects
        gaps.append(max(abs(near[k] - base[k]) for k in D.DEFECTS))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-3


@pytest.mark.parametrize("chart", [zoo.kodaira_thurston(), zoo.symplectic_twist_r4(0.3)], ids=lambda c: c.label)
def test_identity_suite_passes(chart):
    table = D.identity_suite(chart, nsamples=20, seed=42)
    assert [r.name for r in table.rows] == list(D.IDENTITIES)
    assert table.passed, [(r.name, r.residual) for r in table.rows if not r.passed]
    assert table.wr1_variant["verdict"] == "L_jbar_i_r_sbar"


def test_identity_suite_subset_and_tolerance_override(kt):
    table = D.identity_suite(kt, 3, 1, rows=["sekigawa", "hermitian_curvature_L"], tols={"sekigawa": 1e-12})
    assert [r.name for r in table.rows] == ["sekigawa", "hermitian_curvature_L"]
    assert table.row("sekigawa").tol == 1e-12
    with pytest.raises(KeyError):
        D.identity_suite(kt, 3, 1, rows=["nope"])


def test_literal_quarter_bracket_constant_fails_on_kt(kt):
    """The -1/4 reading of the normal-frame bracket relation is refuted; -4 holds."""
    row = D.identity_suite(kt, 3, 1, rows=["frame_bracket"]).row("frame_bracket")
    assert row.detail["fitted"] <= 1e-12
    assert row.detail["quarter"] > 0.5


def test_wr1_verdict_rules():
    assert D.wr1_verdict(1e-12, 0.2) == "L_i_jbar_r_sbar"
    assert D.wr1_verdict(0.2, 1e-12) == "L_jbar_i_r_sbar"
    assert D.wr1_verdict(1e-12, 1e-12) == "indistinguishable"
    assert D.wr1_verdict(1e-2, 1e-2) == "neither"
    assert D.wr1_verdict(1e-12, 1e-5).endswith("(weak separation)")


def test_report_json_schema(kt_report):
    body = json.loads(kt_report.to_json())
    assert body["schema"] == "v1"
    for key in ("chart", "seed", "nsamples", "defects", "verdict", "identities", "wr1_variant"):
        assert key in body
    assert set(body["defects"]) == set(D.DEFECTS)
    row = body["identities"][0]
    assert set(row) >= {"name", "paper_anchor", "residual", "pass"}
    assert body["wr1_variant"]["verdict"] == "L_jbar_i_r_sbar"


def test_reports_are_deterministic():
    chart = zoo.symplectic_twist_r4(0.3)
    a = D.integrability_defects(chart, 5, 11).to_json()
    b = D.integrability_defects(zoo.symplectic_twist_r4(0.3), 5, 11).to_json()
    assert a == b
    c = D.integrability_defects(chart, 5, 12).to_json()
    assert a != c


def test_core_rows_are_complete_without_frame_rows():
    table = D.identity_suite(zoo.flat_kahler(1), 2, 1, rows=list(D.CORE_IDENTITIES))
    assert [r.name for r in table.rows] == list(D.CORE_IDENTITIES)
