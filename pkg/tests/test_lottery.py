import random
from fractions import Fraction as F
from math import sqrt

import pytest
from hypothesis import given, settings

from fairnom import (
    Instance,
    IntegralAllocation,
    Lottery,
    birkhoff,
    expected_allocation,
    is_ef,
    is_ef1,
    is_prop,
    probabilistic_serial,
    ps_lottery,
    sample,
)
from fairnom.lottery import NotBistochastic, eat, ps_matrix, recompose

from helpers import instances, random_bistochastic, random_instance


def test_identical_preferences_split_evenly():
    frac, _ = probabilistic_serial(Instance.from_rows([[3, 2, 1]] * 3))
    third = F(1, 3)
    assert frac.shares == ((third,) * 3,) * 3


def test_opposite_preferences_give_top_items_entirely():
    frac, _ = probabilistic_serial(Instance.from_rows([[4, 3, 2, 1], [1, 2, 3, 4]]))
    assert frac.shares[0] == (1, 1, 0, 0)
    # m not divisible by n: the rest is a fraction of the next item
    frac, _ = probabilistic_serial(Instance.from_rows([[3, 2, 1], [1, 2, 3]]))
    assert frac.shares[0] == (1, F(1, 2), 0)


def test_eating_schedule_hand_example():
    # both start on item 0; it runs out at 1/2, then they split
    sched = eat([[0, 1, 2], [0, 2, 1]], 3)
    half = F(1, 2)
    assert sched.segments[0] == ((0, F(0), half), (1, half, F(3, 2)))
    assert sched.segments[1] == ((0, F(0), half), (2, half, F(3, 2)))
    assert sched.horizon == F(3, 2)
    assert sched.window(0, F(0), F(1)) == {0: half, 1: half}


def _check_schedule(sched, n, m):
    for segs in sched.segments:
        t = F(0)
        for g, s, e in segs:
            assert s == t and e > s
            t = e
        assert t == F(m, n)
    eaten = sched.shares(m)
    for g in range(m):
        assert sum(eaten[i][g] for i in range(n)) == 1


def test_ps_random_instances():
    rng = random.Random(12)
    for _ in range(100):
        n, m = rng.randint(1, 4), rng.randint(1, 8)
        inst = random_instance(rng, n, m)
        frac, sched = probabilistic_serial(inst)
        _check_schedule(sched, n, m)
        assert is_ef(inst, frac)
        assert all(sum(frac.shares[i]) == F(m, n) for i in range(n))


# -- Birkhoff ---------------------------------------------------------------------


def test_permutation_matrix_is_a_fixed_point():
    mat = [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
    assert birkhoff(mat) == [(F(1), (1, 2, 0))]


def test_half_matrix():
    h = F(1, 2)
    assert birkhoff([[h, h], [h, h]]) == [(h, (0, 1)), (h, (1, 0))]


@pytest.mark.parametrize(
    "mat",
    [
        [[1, 0], [0, 1], [0, 0]],
        [[F(1, 2), F(1, 2)], [F(1, 2), F(1, 3)]],
        [[2, -1], [-1, 2]],
        [[1, 0], [1, 0]],
    ],
)
def test_not_bistochastic(mat):
    with pytest.raises(NotBistochastic):
        birkhoff(mat)


def _check_decomposition(mat, terms):
    k = len(mat)
    assert recompose(terms, k) == [[F(x) for x in r] for r in mat]
    assert sum(w for w, _ in terms) == 1
    assert all(w > 0 for w, _ in terms)
    assert len(terms) <= k * k - k + 1
    residual = [[F(x) for x in r] for r in mat]
    for w, perm in terms:
        assert sorted(perm) == list(range(k))
        assert all(residual[r][perm[r]] >= w > 0 for r in range(k))
        for r in range(k):
            residual[r][perm[r]] -= w


def test_random_five_by_five():
    rng = random.Random(13)
    for _ in range(20):
        mat = random_bistochastic(rng, 5)
        _check_decomposition(mat, birkhoff(mat))


# -- PS-Lottery ----------------------------------------------------------------------


def test_opposed_preferences_give_a_point_lottery():
    lot = ps_lottery(Instance.from_rows([[2, 1], [1, 2]]))
    assert lot.support == ((F(1), IntegralAllocation(((0,), (1,)))),)


def test_no_items():
    lot = ps_lottery(Instance.from_rows([[], []]))
    assert lot.support[0][1].bundles == ((), ())


def test_ps_matrix_is_bistochastic_with_padding():
    mat, c, _ = ps_matrix(Instance.from_rows([[3, 2, 1], [1, 2, 3]]))
    assert c == 2 and len(mat) == 4
    assert all(sum(r) == 1 for r in mat)
    assert all(sum(r[j] for r in mat) == 1 for j in range(4))


def test_zero_valued_agent_eats_real_items_before_dummies():
    inst = Instance.from_rows([[0, 0, 0], [1, 2, 3]])
    frac, _ = probabilistic_serial(inst)
    assert sum(frac.shares[0]) == F(3, 2)
    assert expected_allocation(ps_lottery(inst), 3) == frac


def test_ps_lottery_properties_random():
    rng = random.Random(14)
    for _ in range(60):
        n, m = rng.randint(1, 4), rng.randint(0, 8)
        inst = random_instance(rng, n, m)
        lot = ps_lottery(inst)
        frac, _ = probabilistic_serial(inst)
        exp = expected_allocation(lot, m)
        assert exp == frac
        assert is_ef(inst, exp) and is_prop(inst, exp)
        for _, a in lot.support:
            assert is_ef1(inst, a)
            assert {len(b) for b in a.bundles} <= {m // n, -(-m // n)}


@settings(max_examples=40, deadline=None)
@given(instances(max_n=3, max_m=6, min_m=1))
def test_ps_lottery_expectation_property(inst):
    assert expected_allocation(ps_lottery(inst), inst.m) == probabilistic_serial(inst)[0]


# -- sampling ------------------------------------------------------------------------


def test_sample_point_and_reproducible():
    a = IntegralAllocation(((0,), ()))
    assert sample(Lottery.point(a), 3) == a
    lot = ps_lottery(Instance.from_rows([[1, 1, 1], [1, 1, 1]]))
    assert sample(lot, 42) == sample(lot, 42)


def test_sample_frequencies():
    a, b, c = (IntegralAllocation(((g,),)) for g in range(3))
    lot = Lottery(((F(1, 2), a), (F(1, 3), b), (F(1, 6), c)))
    draws = 100_000
    counts = {a: 0, b: 0, c: 0}
    for seed in range(draws):
        counts[sample(lot, seed)] += 1
    for p, x in lot.support:
        sigma = sqrt(draws * p * (1 - p))
        assert abs(counts[x] - draws * p) <= 3 * sigma
