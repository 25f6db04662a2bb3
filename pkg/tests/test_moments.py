import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torussym.domains import (SHEAR, Ball, ExpProfileFamily, LinearImageBall, NonIntegrableError, Polydisk,
                              Predicate, ProfileDomain, PuncturedBall, TranslatedDiskProduct, catalog,
                              multi_indices)
from torussym.moments import (CLOSED_FORM, INCONCLUSIVE, MONTE_CARLO, NONZERO, QUADRATURE, ZERO, GramData,
                              MomentEstimate, Policy, QuadratureError, decide_nonzero, gram, inner_product,
                              profile_moment_quadrature)
from torussym.profile import parse_profile
from torussym.sampling import sample_uniform

PI2 = math.pi ** 2


def test_closed_form_examples():
    e = inner_product(Polydisk((1, 1)), (0, 0), (0, 0))
    assert e.value == pytest.approx(PI2) and e.std_error == 0 and e.method == CLOSED_FORM
    assert inner_product(Polydisk((1, 1)), (1, 0), (1, 0)).value == pytest.approx(PI2 / 2)


def test_mc_examples():
    e = inner_product(LinearImageBall(SHEAR), (1, 0), (0, 1), "mc", 400_000, seed=1)
    assert e.method == MONTE_CARLO and e.std_error > 0
    assert abs(e.value - PI2 / 6) < 4 * e.std_error
    e = inner_product(TranslatedDiskProduct(0.5, 1, 1), (1, 0), (0, 0), "mc", 400_000, seed=1)
    assert abs(e.value - PI2 / 2) < 4 * e.std_error


def test_quadrature_examples():
    f = parse_profile("exp(-r)")
    e = profile_moment_quadrature(f, (0, 0), (0, 0))
    assert e.method == QUADRATURE and e.std_error == 0
    assert e.value.real == pytest.approx(PI2 / 2, rel=1e-12)
    assert e.tolerance <= 1e-10 * e.value.real
    assert profile_moment_quadrature(f, (1, 0), (0, 0)).value == 0
    assert profile_moment_quadrature(f, (1, 0), (1, 0)).value.real == pytest.approx(3 * PI2 / 4, rel=1e-12)
    slow = parse_profile("exp(-r^0.5)")
    assert profile_moment_quadrature(slow, (1, 0), (1, 0)).value.real == pytest.approx(
        PI2 * math.factorial(7) / 2 ** 6, rel=1e-12)


def test_quadrature_rejects_growing_profile():
    with pytest.raises(QuadratureError):
        profile_moment_quadrature(lambda r: 1.0 + r, (0, 0), (0, 0))


def test_method_routing():
    spec = ProfileDomain(parse_profile("exp(-r)"))
    assert inner_product(spec, (1, 0), (1, 0)).method == QUADRATURE
    assert inner_product(spec, (1, 0), (1, 0), "quad").method == QUADRATURE
    assert inner_product(Polydisk((1, 1)), (1, 0), (1, 0), "mc", 1000).method == MONTE_CARLO
    with pytest.raises(ValueError):
        inner_product(Polydisk((1, 1)), (0, 0), (0, 0), "bogus")
    box = Predicate(lambda Z: np.abs(Z[:, 0]) < 1, (1.0,), vectorized=True)
    assert inner_product(box, (1,), (1,), "auto", 1000).method == MONTE_CARLO
    with pytest.raises(ValueError):
        inner_product(box, (0,), (0,), "quad")
    with pytest.raises(ValueError):
        inner_product(Polydisk((1, 1)), (0, 0, 0), (0, 0))


def test_non_integrable_monomial():
    spec = ProfileDomain(parse_profile("1/(1+r^2)"))
    with pytest.raises(NonIntegrableError):
        inner_product(spec, (1, 0), (1, 0))
    with pytest.raises(NonIntegrableError):
        gram(spec, 1)


def test_gram_examples():
    g = gram(Polydisk((1, 1)), 1)
    assert [g[a, a].value.real for a in g.indices] == pytest.approx([PI2, PI2 / 2, PI2 / 2])
    assert all(g[a, b].value == 0 for a, b in g.upper_pairs())
    g = gram(Ball(1, 2), 1)
    assert [g[a, a].value.real for a in g.indices] == pytest.approx([PI2 / 2, PI2 / 6, PI2 / 6])
    assert all(g[a, b].value == 0 for a, b in g.upper_pairs())


def test_punctured_ball_gram_identical_to_ball():
    a = gram(Ball(1, 2), 2, "mc", 100_000, seed=4)
    b = gram(PuncturedBall(1, 2, (0.5, 0.25)), 2, "mc", 100_000, seed=4)
    assert a.dumps() == b.dumps()


@pytest.mark.parametrize("name", ["sheared_ball", "quasi_circular_cubic", "polydisk"])
def test_gram_hermitian_and_diagonal(name):
    g = gram(catalog()[name], 2, "mc", 100_000, seed=2)
    for a in g.indices:
        for b in g.indices:
            assert g[b, a].value == g[a, b].value.conjugate()
        d = g[a, a]
        assert d.value.real > 0 and abs(d.value.imag) <= 4 * d.std_error


def test_gram_json_round_trip_is_bit_exact():
    for g in (gram(catalog()["quasi_circular_cubic"], 3, "mc", 50_000, seed=8),
              gram(LinearImageBall(((1, 0.5j), (0.25, 1))), 2)):
        back = GramData.loads(g.dumps())
        assert back.N == g.N and back.indices == g.indices
        for key, e in g.entries.items():
            f = back.entries[key]
            assert f.value == e.value and f.std_error == e.std_error and f.method == e.method
        assert back.dumps() == g.dumps()


def test_gram_mc_matches_inner_product_on_shared_sample():
    spec = catalog()["sheared_ball"]
    s = sample_uniform(spec, 3, 100_000)
    g = gram(spec, 2, "mc", sample=s)
    e = inner_product(spec, (1, 0), (0, 1), "mc", sample=s)
    assert g[(1, 0), (0, 1)].value == pytest.approx(e.value, rel=1e-12)


def test_profile_off_diagonal_mc_vanishes():
    spec = ExpProfileFamily(k=0)
    g = gram(spec, 2, "mc", 200_000, seed=6)
    for a, b in g.upper_pairs():
        assert abs(g[a, b].value) <= 4 * g[a, b].std_error


def test_polydisk_scaling():
    for alpha in multi_indices(2, 3):
        small = inner_product(Polydisk((1, 1)), alpha, alpha).value.real
        big = inner_product(Polydisk((2, 2)), alpha, alpha).value.real
        assert big == small * 2 ** (2 * sum(alpha) + 4)
    small = gram(Polydisk((1, 1)), 2, "mc", 200_000, seed=1)
    big = gram(Polydisk((2, 2)), 2, "mc", 200_000, seed=1)
    for a in small.indices:
        f = 2 ** (2 * sum(a) + 4)
        s, b = small[a, a], big[a, a]
        assert abs(b.value.real - f * s.value.real) <= 4 * math.hypot(b.std_error, f * s.std_error)


def test_decide_examples():
    pol = Policy(1e-3, 5)
    assert decide_nonzero(MomentEstimate(PI2 / 6, 0.003, MONTE_CARLO), pol) == NONZERO
    assert decide_nonzero(MomentEstimate(2e-5, 1e-5, MONTE_CARLO), pol) == ZERO
    assert decide_nonzero(MomentEstimate(8e-4, 5e-4, MONTE_CARLO), pol) == INCONCLUSIVE
    assert decide_nonzero(MomentEstimate(5e-4, 0.0, CLOSED_FORM), pol) == ZERO
    with pytest.raises(ValueError):
        decide_nonzero(MomentEstimate(1.0), Policy())
    assert Policy().resolve(2.0).abs_tol == 2e-3


values = st.floats(0, 1, allow_nan=False)
ses = st.floats(0, 0.1, allow_nan=False)
tols = st.floats(1e-6, 0.5, allow_nan=False)


@given(values, ses, tols, tols)
def test_decision_monotone_in_abstol(v, se, t1, t2):
    lo, hi = sorted((t1, t2))
    est = MomentEstimate(complex(v), se, MONTE_CARLO)
    if decide_nonzero(est, Policy(lo)) == ZERO:
        assert decide_nonzero(est, Policy(hi)) == ZERO
    if decide_nonzero(est, Policy(hi)) == NONZERO:
        assert decide_nonzero(est, Policy(lo)) == NONZERO
