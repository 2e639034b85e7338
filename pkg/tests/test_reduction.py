import itertools
import random
from fractions import Fraction as F
from functools import partial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairnom import (
    Instance,
    IntegralAllocation,
    ReportSpace,
    audit_deterministic,
    check_lemma54,
    ef1_set,
    exhaustive_inner,
    is_ef1,
    is_fpo,
    is_po,
    mechanism_one,
    realize_allocation,
    round_robin,
)
from fairnom.checkers import is_clean, is_non_wasteful
from fairnom.core import ScaleError, row_value
from fairnom.reduction import (
    InnerContractError,
    assemble,
    desire_profile,
    in_ef1_set,
    swap_transfer,
    worst_in_set,
)

from helpers import random_instance


def bundles(*bs):
    return IntegralAllocation(tuple(tuple(b) for b in bs))


def _unused(bids):
    raise AssertionError("inner algorithm should not be called")


# -- desire profile -------------------------------------------------------------


def test_desire_profile_three_agents():
    dp = desire_profile(Instance.from_rows([[1, 1, 0], [0, 1, 0], [0, 0, 1]]))
    assert dp.desired == (frozenset({0, 1}), frozenset({1}), frozenset({2}))
    assert dp.exclusive == (frozenset({0}), frozenset(), frozenset({2}))
    assert dp.others_disjoint == (True, True, False)
    assert not dp.all_disjoint


def test_two_agents_flag_each_other_trivially():
    dp = desire_profile(Instance.from_rows([[1, 1], [1, 0]]))
    assert dp.others_disjoint == (True, True)
    assert not dp.all_disjoint


# -- the four cases ------------------------------------------------------------------


def test_case_disjoint_desires():
    inst = Instance.from_rows([[1, 0, 0], [0, 2, 0], [0, 0, 3]])
    assert mechanism_one(inst, _unused) == bundles([0], [1], [2])


def test_case_disjoint_two_agents_leaves_worthless_items():
    inst = Instance.from_rows([[1, 0, 0], [0, 1, 0]])
    assert mechanism_one(inst, _unused) == bundles([0], [1])


def test_case_one_flag_uses_exclusive_items():
    # agent 0 gets item 0, the only item nobody else wants; agents 1, 2 keep their sets
    inst = Instance.from_rows([[1, 1, 1], [0, 1, 0], [0, 0, 1]])
    assert mechanism_one(inst, _unused) == bundles([0], [1], [2])


def test_case_one_flag_falls_back_when_not_ef1():
    # agent 0 would get nothing while agent 1 holds two items she wants
    inst = Instance.from_rows([[1, 1, 0], [1, 1, 0], [0, 0, 1]])
    calls = []

    def inner(bids):
        calls.append(bids)
        return exhaustive_inner(bids)

    out = mechanism_one(inst, inner)
    assert calls == [inst]
    assert is_ef1(inst, out)


@pytest.mark.parametrize(
    "rows, expected",
    [
        # agent 0 values the shared item less, so she takes the leftovers
        ([[1, 2], [0, 3]], bundles([0], [1])),
        ([[0, 3], [1, 2]], bundles([1], [0])),
    ],
)
def test_case_two_flags_two_agents(rows, expected):
    assert mechanism_one(Instance.from_rows(rows), _unused) == expected


def test_case_two_flags_tie_goes_to_second_agent():
    # agent 1 takes the leftovers, which are empty; still EF1 for her
    inst = Instance.from_rows([[1, 1], [0, 1]])
    assert mechanism_one(inst, _unused) == bundles([0, 1], [])


def test_case_no_flags_calls_inner():
    inst = Instance.from_rows([[1, 1, 1]] * 3)
    assert mechanism_one(inst, exhaustive_inner) == bundles([0], [1], [2])


def test_inner_contract_violation():
    inst = Instance.from_rows([[1, 1, 1]] * 3)

    def greedy(bids):
        return bundles([0, 1, 2], [], [])

    with pytest.raises(InnerContractError):
        mechanism_one(inst, greedy, check_inner=True)
    # unchecked, the output is passed through (and cleaned)
    assert mechanism_one(inst, greedy) == bundles([0, 1, 2], [], [])


def test_round_robin_is_not_clean_enough_but_checked_wrapper_catches_it():
    inst = Instance.from_rows([[1, 1, 0], [1, 1, 0], [1, 1, 0]])
    with pytest.raises(InnerContractError):
        mechanism_one(inst, round_robin, check_inner=True)


def test_mechanism_one_random_outputs():
    rng = random.Random(21)
    for _ in range(100):
        n, m = rng.randint(1, 3), rng.randint(0, 5)
        inst = random_instance(rng, n, m, max_den=4, zero_bias=0.4)
        out = mechanism_one(inst, exhaustive_inner, check_inner=True)
        assert is_clean(inst, out) and is_non_wasteful(inst, out) and is_ef1(inst, out)


# -- exhaustive inner --------------------------------------------------------------


def test_exhaustive_inner_single_agent():
    inst = Instance.from_rows([[1, 0, 2]])
    assert exhaustive_inner(inst) == bundles([0, 2])


def test_exhaustive_inner_identical_agents_split():
    inst = Instance.from_rows([[1, 1], [1, 1]])
    assert exhaustive_inner(inst) == bundles([0], [1])


def test_exhaustive_inner_random():
    rng = random.Random(22)
    for _ in range(100):
        n, m = rng.randint(1, 3), rng.randint(0, 5)
        inst = random_instance(rng, n, m, max_den=4, zero_bias=0.4)
        a = exhaustive_inner(inst)
        assert is_clean(inst, a) and is_non_wasteful(inst, a)
        assert is_ef1(inst, a) and is_fpo(inst, a)


def test_exhaustive_inner_cap():
    with pytest.raises(ScaleError):
        exhaustive_inner(Instance.from_rows([[1] * 6] * 3), cap=10)


# -- EF1 sets ----------------------------------------------------------------------


def test_ef1_set_single_item():
    assert ef1_set(0, [1], 2) == [bundles([0], []), bundles([], [0])]


def test_ef1_set_all_zero_values_only_empty_bundle():
    # any partial allocation keeping agent 0 empty is fine
    out = ef1_set(0, [0, 0], 2)
    assert all(a[0] == () for a in out)
    assert len(out) == 4


def test_ef1_set_membership_rules():
    v = [2, 1, 0]
    assert in_ef1_set(0, v, bundles([0], [1, 2]), 3)
    assert not in_ef1_set(0, v, bundles([0, 2], [1]), 3)  # holds an item worth 0 to her
    assert not in_ef1_set(0, v, bundles([0], []), 3)  # item 1 left unallocated
    assert not in_ef1_set(0, v, bundles([], [0, 1]), 3)  # envy survives removing one item


def test_ef1_set_matches_brute_force():
    v = (F(3), F(0), F(1))
    n, m = 3, 3
    expected = []
    for owners in itertools.product(range(n + 1), repeat=m):
        a = IntegralAllocation.from_owners(owners, n)
        own = a[0]
        if any(v[g] == 0 for g in own):
            continue
        if any(v[g] > 0 and owners[g] == n for g in range(m)):
            continue
        mine = row_value(v, own)
        if all(
            not a[j] or mine >= row_value(v, a[j]) - max(v[g] for g in a[j])
            for j in range(1, n)
        ):
            expected.append(a)
    assert ef1_set(0, v, n) == expected


def test_worst_in_set():
    v = [2, 1]
    # the empty bundle fails EF1 against both items
    assert worst_in_set(0, v, ef1_set(0, v, 2)) == 1
    assert worst_in_set(0, v, [bundles([0], [1]), bundles([1], [0])]) == 1


# -- realizing members of the EF1 set ------------------------------------------


def test_realize_disjoint_profile():
    v = [1, 0, 1]
    a = bundles([0, 2], [1])
    rows = realize_allocation(0, v, a)
    assert rows == ((F(0), F(1), F(0)),)
    assert mechanism_one(assemble(0, v, rows), _unused) == a


def test_realize_single_overlap_boosts_that_opponent():
    v = [1, 1, 1]
    a = bundles([0], [1, 2], [])
    rows = realize_allocation(0, v, a)
    assert rows[0] == (F(0), F(4), F(4))
    assert rows[1] == (F(0),) * 3
    assert mechanism_one(assemble(0, v, rows), _unused) == a


def test_realize_rejects_non_members():
    with pytest.raises(ValueError):
        realize_allocation(0, [1, 1], bundles([], [0, 1]))


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("v", [(1, 2, 0), (1, 1, 1), (0, 0, 0), (3, 0, 1)])
def test_every_member_is_realized(n, v):
    for a in ef1_set(0, v, n):
        rows = realize_allocation(0, v, a)
        assert mechanism_one(assemble(0, v, rows), _unused) == a


def test_realize_round_trip_random():
    rng = random.Random(23)
    for _ in range(30):
        n, m = rng.randint(2, 3), rng.randint(1, 4)
        i = rng.randrange(n)
        v = [F(rng.randint(0, 3)) for _ in range(m)]
        members = ef1_set(i, v, n)
        a = rng.choice(members)
        rows = realize_allocation(i, v, a)
        assert mechanism_one(assemble(i, v, rows), _unused) == a


@settings(max_examples=40, deadline=None)
@given(
    st.integers(2, 3),
    st.lists(st.integers(0, 3), min_size=1, max_size=3),
    st.lists(st.lists(st.integers(0, 3), min_size=3, max_size=3), min_size=2, max_size=2),
)
def test_reduction_output_lies_in_ef1_set(n, v, others):
    m = len(v)
    rows = [r[:m] for r in others[: n - 1]]
    inst = assemble(0, v, rows)
    out = mechanism_one(inst, exhaustive_inner, check_inner=True)
    assert out in ef1_set(0, v, n)


def test_best_case_is_the_whole_desired_set():
    v = [2, 0, 1, 3]
    inst = assemble(0, v, [[0] * 4, [0] * 4])
    assert mechanism_one(inst, _unused)[0] == (0, 2, 3)


# -- worst-case comparison ------------------------------------------------------


def test_worst_case_comparison_equal_reports():
    r = check_lemma54(0, [2, 1, 1], [2, 1, 1], 2)
    assert r.holds and r.worst_truthful == r.worst_other
    assert r.swap is None and r.swap_ok is None


def test_worst_case_comparison_zero_misreport():
    # reporting nothing guarantees nothing
    r = check_lemma54(0, [1, 1, 1], [0, 0, 0], 2)
    assert r.holds and r.worst_other == 0
    assert r.counterpart[0] == ()


def test_worst_case_comparison_full_two_agent_grid():
    grid = list(itertools.product(range(3), repeat=3))
    for v in grid:
        for v2 in grid:
            assert check_lemma54(0, v, v2, 2).holds


def test_swap_transfer_moves_best_item():
    a = bundles([], [0, 1], [2])
    v2 = [F(3), F(1), F(2)]
    # agent 1 keeps 1 after dropping her best item 0, agent 2 keeps 0
    assert swap_transfer(0, v2, a) == bundles([1], [0], [2])
    with pytest.raises(ValueError):
        swap_transfer(0, v2, bundles([0, 1, 2], [], []))


@pytest.mark.parametrize("v", [(2, 1, 0), (1, 1, 1), (3, 0, 1), (0, 0, 0)])
def test_audited_worst_case_equals_worst_of_ef1_set(v):
    v = tuple(F(x) for x in v)
    members = ef1_set(1, v, 3)
    profiles = tuple(realize_allocation(1, v, a) for a in members)
    space = ReportSpace(((F(1), F(1), F(1)),), ("zero", "unit"), profiles)
    mech = partial(mechanism_one, inner=exhaustive_inner)
    rep = audit_deterministic(mech, 1, v, [v], space, 3)[0]
    assert rep.honest_worst == worst_in_set(1, v, members)
    assert rep.honest_best == sum(v)


def test_reduction_output_is_pareto_efficient():
    rng = random.Random(24)
    for _ in range(60):
        n, m = rng.randint(1, 3), rng.randint(0, 4)
        inst = random_instance(rng, n, m, max_den=4, zero_bias=0.4)
        a = mechanism_one(inst, exhaustive_inner)
        assert is_fpo(inst, a) and is_po(inst, a)
