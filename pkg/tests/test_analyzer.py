import json
import math

import numpy as np
import pytest

from torussym.analyzer import (SCHEMA_VERSION, Budgets, analyze, check_complete_reinhardt, closure_note,
                               default_degree, dumps_stable, verify_calculation_identity, verify_invariance)
from torussym.condition_d import HOLDS_BOUNDED
from torussym.domains import (SHEAR, Ball, ExpProfileFamily, LinearImageBall, Polydisk, PolydiskDifference,
                              Predicate, ProfileDomain, PuncturedBall, QuasiCircularCubic, catalog)
from torussym.profile import parse_profile
from torussym.torus import TorusAction

SMALL = Budgets(200_000, 40, 20_000)
ID2 = TorusAction.identity(2)


def _span(*cols):
    return TorusAction(len(cols[0]), tuple(tuple(c) for c in cols))


def test_analyze_polydisk():
    rep = analyze(Polydisk((1, 1)), 3)
    assert rep.classification.is_reinhardt
    assert all(v.verdict == HOLDS_BOUNDED for v in rep.condition_d.per_coordinate.values())
    assert rep.theorem_asserted and "int(closure(Omega))" in rep.theorem_statement
    assert rep.star_shaped["applicable"] and rep.star_shaped["star_shaped"]
    assert rep.errors == []


def test_analyze_sheared_ball_mc():
    rep = analyze(LinearImageBall(SHEAR), 3, SMALL, seed=1, method="mc")
    c = rep.classification
    assert c.is_circular and not c.is_reinhardt and c.hartogs_coords == ()
    assert rep.detected_action.same_lattice(_span((1, 1)))
    assert rep.star_shaped == {"applicable": False}


def test_analyze_mixed_mc():
    rep = analyze(catalog()["mixed_quasi_reinhardt"], 3, SMALL, seed=2, method="mc")
    assert rep.detected_action.same_lattice(_span((1, 2, 0), (0, 0, 1)))
    assert rep.classification.hartogs_coords == (3,)


@pytest.mark.parametrize("method", ["auto", "mc"])
def test_translated_disk_is_hartogs_in_second_coordinate_only(method):
    rep = analyze(catalog()["translated_disk_product"], 3, SMALL, seed=3, method=method)
    assert rep.detected_action.same_lattice(_span((0, 1)))
    assert rep.classification.hartogs_coords == (2,)


def test_declared_action_inside_detected_lattice():
    from torussym.symmetry import lattice_membership
    for name, spec in catalog().items():
        A = spec.declared_action
        if A is None:
            continue
        rep = analyze(spec, 3, SMALL, seed=5)
        assert all(lattice_membership(rep.detected_action, c) for c in A.columns), name


def test_punctured_ball_report_matches_ball():
    ball = analyze(Ball(1.0, 2), 3, SMALL, seed=4, method="mc").to_json()
    punct = analyze(PuncturedBall(1.0, 2, (0.5, 0.25)), 3, SMALL, seed=4, method="mc").to_json()
    assert "neither Reinhardt, circular nor Hartogs" in punct["closure_note"]
    assert punct["omega_equals_closure_interior"] is False and ball["omega_equals_closure_interior"] is True
    for key in ("domain", "closure_note", "omega_equals_closure_interior"):
        ball.pop(key), punct.pop(key)
    assert dumps_stable(ball) == dumps_stable(punct)


def test_report_idempotent_and_schema():
    spec = QuasiCircularCubic()
    a = analyze(spec, 2, SMALL, seed=9, method="mc").dumps()
    b = analyze(spec, 2, SMALL, seed=9, method="mc").dumps()
    assert a == b
    js = json.loads(a)
    assert js["schema_version"] == SCHEMA_VERSION and js["seed"] == 9
    assert list(js)[:3] == ["schema_version", "tool", "domain"]
    assert js["budgets"] == {"mc_samples": 200_000, "terms": 40, "check_samples": 20_000}
    assert js["classification"]["quasi_circular_weights"] == [1, 2]
    for d in js["differences"]:
        assert 1 <= len(d["witnesses"])
    assert any("Monte Carlo" in h for h in js["unverified_hypotheses"])


def test_theorem_withheld_when_condition_d_fails():
    rep = analyze(ExpProfileFamily(k=1), 2)
    assert rep.classification.is_reinhardt
    assert not rep.theorem_asserted and "Hypotheses not met" in rep.theorem_statement
    assert "int(closure(Omega))" in rep.theorem_statement
    rep0 = analyze(ExpProfileFamily(k=0), 2)
    assert rep0.theorem_asserted


def test_no_symmetry_is_not_an_error():
    # a disk centred at 1/2: <z, 1> = pi/2 breaks every rotation
    shifted = Predicate(lambda Z: np.abs(Z[:, 0] - 0.5) < 1, (1.5,), vectorized=True)
    rep = analyze(shifted, 2, SMALL, seed=1)
    assert rep.detected_action.r == 0
    assert "no torus symmetry detected at degree 2" in rep.classification.caveats
    assert not rep.theorem_asserted and rep.errors == []
    assert rep.omega_equals_closure_interior is None


def test_partial_report_on_gram_failure():
    rep = analyze(ProfileDomain(parse_profile("1/(1+r^2)^2")), 3)
    assert rep.errors and rep.errors[0]["stage"] == "gram"
    assert rep.classification is None and not rep.theorem_asserted
    js = json.loads(rep.dumps())
    assert js["errors"][0]["message"].startswith("NonIntegrableError")


def test_default_degree():
    assert (default_degree(1), default_degree(2), default_degree(3), default_degree(5)) == (6, 4, 3, 2)
    with pytest.raises(ValueError):
        analyze(Polydisk((1, 1)), 0)


def test_verify_invariance_examples():
    ok = verify_invariance(Ball(1.0, 2), _span((1, 1)), 100_000)
    assert ok.violations == 0 and ok.rate == 0
    bad = verify_invariance(LinearImageBall(SHEAR), ID2, 20_000)
    assert bad.rate > 0.01 and len(bad.witnesses) == 10
    z, lam = bad.witnesses[0]
    zc = np.array([complex(*p) for p in z])
    lc = np.array([complex(*p) for p in lam])
    assert not LinearImageBall(SHEAR).contains((lc * zc)[None, :])[0]
    assert verify_invariance(QuasiCircularCubic(), _span((1, 2)), 100_000).violations == 0
    with pytest.raises(ValueError):
        verify_invariance(Ball(1.0, 3), ID2)


def test_verify_invariance_is_seeded():
    a = verify_invariance(LinearImageBall(SHEAR), ID2, 5000, seed=3)
    b = verify_invariance(LinearImageBall(SHEAR), ID2, 5000, seed=3)
    assert a == b
    assert a.to_json()["witnesses"][0].keys() == {"z", "lambda"}


def test_calculation_identity_examples():
    c = verify_calculation_identity(Ball(1.0, 2), _span((1, 1)), (1, 0), (0, 0), method="mc", budget=200_000)
    assert c.passed and not c.g_trivial
    assert abs(c.estimate.value) <= 4 * c.estimate.std_error
    assert c.max_residual <= c.residual_bound

    p = verify_calculation_identity(Polydisk((1, 1)), ID2, (1, 0), (1, 0))
    assert p.g_trivial and p.max_residual == 0 and p.passed

    q = verify_calculation_identity(QuasiCircularCubic(), _span((1, 2)), (2, 0), (0, 1), method="mc",
                                    budget=200_000)
    assert q.g_trivial and q.max_residual == 0 and q.passed
    assert abs(q.estimate.value) > 10 * q.estimate.std_error


def test_calculation_identity_detects_wrong_action():
    # the sheared ball is not Reinhardt and <z1, z2> = pi^2/6 is far from zero
    c = verify_calculation_identity(LinearImageBall(SHEAR), ID2, (1, 0), (0, 1), method="mc", budget=200_000)
    assert not c.passed and c.max_residual > c.residual_bound


def test_complete_reinhardt_examples():
    assert check_complete_reinhardt(Polydisk((1, 1)), 50_000).violations == 0
    assert check_complete_reinhardt(ExpProfileFamily(k=0), 50_000).violations == 0
    hole = check_complete_reinhardt(PolydiskDifference((2, 2), (1, 1)), 50_000)
    assert hole.rate > 0.1
    z, mu = hole.witnesses[0]
    assert all(math.hypot(*m) <= 1 for m in mu)
    assert hole.to_json()["witnesses"][0].keys() == {"z", "mu"}


def test_closure_note_variants():
    text, regular = closure_note(PuncturedBall(1.0, 2, (0.5, 0.25)))
    assert regular is False and "full ball" in text
    assert closure_note(Polydisk((1, 1)))[1] is True
    box = Predicate(lambda Z: np.abs(Z[:, 0]) < 1, (1.0,), vectorized=True)
    assert closure_note(box)[1] is None
    for spec in catalog().values():
        assert "int(closure(Omega))" in closure_note(spec)[0]


def test_dumps_stable_formatting():
    text = dumps_stable({"a": 0.1, "b": [1, 2.5], "c": float("nan"), "d": {"e": True, "f": None}, "g": 3.0})
    assert '"a": 0.10000000000000001' in text
    assert '"b": [1, 2.5]' in text
    assert '"c": null' in text and '"g": 3.0' in text
    back = json.loads(text)
    assert back["a"] == 0.1 and back["d"] == {"e": True, "f": None}
    assert dumps_stable(back) == text.replace("NaN", "null")
