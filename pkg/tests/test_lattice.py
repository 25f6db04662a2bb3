import itertools
import math
import random

import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from torussym import lattice
from torussym.symmetry import integer_kernel, lattice_membership
from torussym.torus import TorusAction


def _q_rank(rows, n):
    return sympy.Matrix(rows).rank() if rows else 0


def _max_minor_gcd(rows):
    # gcd of the r x r minors equals 1 exactly for a saturated rank-r lattice
    M = sympy.Matrix(rows)
    r = M.rows
    g = 0
    for cols in itertools.combinations(range(M.cols), r):
        g = math.gcd(g, int(M[:, list(cols)].det()))
    return g


def _random_diffs(rng, n):
    bound = 1 if n == 3 else 3
    diffs = []
    for _ in range(rng.randint(0, n + 1)):
        d = [rng.randint(-bound, bound) for _ in range(n)]
        if any(d):
            diffs.append(tuple(d))
    return diffs


def _brute_kernel(diffs, n, bound=3):
    return [v for v in itertools.product(range(-bound, bound + 1), repeat=n)
            if any(v) and all(sum(a * b for a, b in zip(v, d)) == 0 for d in diffs)]


def test_xgcd():
    for a, b in [(12, 18), (-4, 6), (0, 5), (7, 0), (0, 0), (-3, -9)]:
        g, x, y = lattice._xgcd(a, b)
        assert g == math.gcd(a, b) and a * x + b * y == g


def test_kernel_examples():
    assert lattice.kernel([], 2) == [[1, 0], [0, 1]]
    assert lattice.kernel([(2, -1)], 2) == [[1, 2]]
    assert lattice.kernel([(1, -1), (1, 1)], 2) == []
    assert lattice.kernel([(2, -1, 0)], 3) == [[1, 2, 0], [0, 0, 1]]


def test_integer_kernel_examples():
    assert integer_kernel([], 2).same_lattice(TorusAction.identity(2))
    assert integer_kernel([(2, -1)], 2).same_lattice(TorusAction(2, ((1, 2),)))
    assert integer_kernel([(1, -1), (1, 1)], 2).r == 0
    A = integer_kernel([(2, -1, 0)], 3)
    assert A.r == 2 and A.same_lattice(TorusAction(3, ((1, 2, 0), (0, 0, 1))))


def test_kernel_is_saturated_even_for_non_primitive_rows():
    # (2, 4) and (1, 2) constrain the same lattice; (2, -1) must come out primitive
    assert lattice.kernel([(2, 4)], 2) == lattice.kernel([(1, 2)], 2)
    K = lattice.kernel([(4, 6, 0)], 3)
    assert _max_minor_gcd(K) == 1


def test_big_entries_do_not_overflow():
    d = [(10 ** 30 + 7, -(10 ** 30), 3)]
    K = lattice.kernel(d, 3)
    assert all(sum(a * b for a, b in zip(v, d[0])) == 0 for v in K)
    assert _max_minor_gcd(K) == 1


def test_membership_examples():
    A = TorusAction(2, ((1, 2),))
    assert lattice_membership(A, (2, 4))
    assert not lattice_membership(A, (1, 1))
    assert lattice_membership(TorusAction.identity(2), (3, -7))
    assert lattice_membership(TorusAction.trivial(2), (0, 0))
    assert not lattice_membership(TorusAction.trivial(2), (1, 0))


def test_hnf_canonical():
    a = [[2, 4, 0], [0, 0, 3]]
    b = [[2, 4, 3], [2, 4, 6], [4, 8, 6]]
    assert lattice.same_lattice(a, b, 3)
    H = lattice.hnf(b, 3)
    for row in H:
        piv = next(x for x in row if x)
        assert piv > 0


def test_saturation_and_primitive():
    assert lattice.saturation([[2, 4]], 2) == [[1, 2]]
    assert not lattice.is_saturated([[2, 4]], 2)
    assert lattice.is_saturated([[1, 2]], 2)
    assert lattice.primitive([4, -6, 8]) == [2, -3, 4]
    assert lattice.primitive([0, 0]) == [0, 0]


def test_kernel_matches_brute_force_oracle():
    rng = random.Random(20240611)
    for _ in range(200):
        n = rng.randint(1, 3)
        diffs = _random_diffs(rng, n)
        K = integer_kernel(diffs, n).columns
        brute = _brute_kernel(diffs, n)
        for v in K:
            assert all(sum(a * b for a, b in zip(v, d)) == 0 for d in diffs)
        # same rational span: rank(B) = rank(K) = rank(B stacked on K)
        assert _q_rank(list(brute), n) == len(K) == _q_rank(list(brute) + list(K), n)
        if K:
            assert _max_minor_gcd(K) == 1


def test_maximality_brute_force():
    rng = random.Random(7)
    for _ in range(200):
        n = rng.randint(1, 3)
        diffs = [tuple(rng.randint(-3, 3) for _ in range(n)) for _ in range(rng.randint(0, 3))]
        diffs = [d for d in diffs if any(d)]
        A = integer_kernel(diffs, n)
        for v in _brute_kernel(diffs, n):
            assert lattice_membership(A, v)


small = st.lists(st.integers(-4, 4), min_size=3, max_size=3).filter(any)


@settings(max_examples=150, deadline=None)
@given(st.lists(small, max_size=3), st.lists(small, max_size=2))
def test_monotone_in_the_difference_set(d1, extra):
    A1 = integer_kernel(d1, 3)
    A2 = integer_kernel(d1 + extra, 3)
    assert all(lattice_membership(A1, c) for c in A2.columns)
    assert A2.r == 3 - lattice.rank(d1 + extra, 3)
