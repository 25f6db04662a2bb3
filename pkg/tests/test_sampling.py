import math

import numpy as np
import pytest
from scipy.integrate import quad

from torussym.domains import Ball, Polydisk, Predicate, ProfileDomain, PuncturedBall, catalog
from torussym.profile import parse_profile
from torussym.sampling import DegenerateDomainError, default_truncation, sample_uniform


def test_polydisk_volume():
    s = sample_uniform(Polydisk((1.0, 1.0)), 0, 1_000_000)
    assert len(s.points) == 1_000_000
    assert abs(s.volume - math.pi ** 2) < 4 * s.volume_se
    assert not s.truncated


def test_ball_volume():
    s = sample_uniform(Ball(1.0, 2), 0, 1_000_000)
    assert abs(s.volume - math.pi ** 2 / 2) < 4 * s.volume_se


def test_punctured_ball_gives_identical_samples():
    a = sample_uniform(Ball(1.0, 2), 3, 100_000)
    b = sample_uniform(PuncturedBall(1.0, 2, (0.5, 0.25)), 3, 100_000)
    np.testing.assert_array_equal(a.points, b.points)
    assert a.volume == b.volume and a.proposals == b.proposals


def test_deterministic_given_seed():
    spec = catalog()["quasi_circular_cubic"]
    a = sample_uniform(spec, 9, 50_000)
    b = sample_uniform(spec, 9, 50_000)
    c = sample_uniform(spec, 10, 50_000)
    np.testing.assert_array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)


@pytest.mark.parametrize("threads", [1, 2, 3, 8])
def test_independent_of_thread_count(threads):
    spec = catalog()["sheared_ball"]
    ref = sample_uniform(spec, 1, 300_000, threads=1)
    got = sample_uniform(spec, 1, 300_000, threads=threads)
    np.testing.assert_array_equal(ref.points, got.points)
    assert ref.proposals == got.proposals


def test_thread_env(monkeypatch):
    spec = Polydisk((1.0, 2.0))
    ref = sample_uniform(spec, 5, 200_000)
    monkeypatch.setenv("TORUSSYM_THREADS", "3")
    np.testing.assert_array_equal(sample_uniform(spec, 5, 200_000).points, ref.points)


def test_prefix_property():
    # a smaller request is a prefix of a larger one with the same seed
    spec = Ball(1.0, 3)
    small = sample_uniform(spec, 2, 1000).points
    big = sample_uniform(spec, 2, 100_000).points
    np.testing.assert_array_equal(small, big[:1000])


def test_degenerate_domain():
    thin = Predicate(lambda Z: np.abs(Z[:, 0]) < 1e-6, (1.0,), vectorized=True)
    with pytest.raises(DegenerateDomainError):
        sample_uniform(thin, 0, 10)


def test_truncated_profile_sampling():
    spec = Predicate(lambda Z: np.abs(Z[:, 1]) < np.exp(-np.abs(Z[:, 0])), (None, 1.0),
                     truncation=12.0, vectorized=True)
    s = sample_uniform(spec, 0, 200_000)
    assert s.truncated and s.truncation == 12.0
    assert abs(s.volume - math.pi ** 2 / 2) < 4 * s.volume_se


def test_default_truncation_is_certified():
    spec = ProfileDomain(parse_profile("exp(-r)"))
    R = default_truncation(spec)
    # tail of r^17 e^(-2r) beyond R relative to the head
    tail = quad(lambda r: r ** 17 * math.exp(-2 * r), R, np.inf)[0]
    head = quad(lambda r: r ** 17 * math.exp(-2 * r), 0, R)[0]
    assert tail < 1e-14 * head
    assert R <= 128


def test_count_validation():
    with pytest.raises(ValueError):
        sample_uniform(Ball(), 0, 0)
