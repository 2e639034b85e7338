"""Black-box reduction from EF1 algorithms to non-obviously-manipulable mechanisms.

``mechanism_one`` wraps any algorithm returning clean, non-wasteful, EF1
allocations. The rest of the module is the machinery that explains why the
wrapper resists obvious manipulation: the set ``ef1_set(i, v)`` of partial
allocations an agent reporting ``v`` can end up with, a constructor that
realizes each member with explicit opponent reports, and an exhaustive
checker for the worst-case comparison between two such sets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .checkers import clean, ef1_holds, is_clean, is_ef1, is_non_wasteful
from .core import FairnomError, Instance, IntegralAllocation, check_scale, row_value, to_fraction
from .lp import is_fpo

InnerAlgorithm = Callable[[Instance], IntegralAllocation]


class InnerContractError(FairnomError):
    """The inner algorithm returned an allocation that is not clean, non-wasteful and EF1."""


@dataclass(frozen=True)
class DesireProfile:
    desired: tuple[frozenset[int], ...]
    exclusive: tuple[frozenset[int], ...]  # items no other agent desires
    others_disjoint: tuple[bool, ...]

    @property
    def all_disjoint(self) -> bool:
        # with two agents both flags hold trivially, so test the sets themselves
        return _pairwise_disjoint(self.desired)


def _pairwise_disjoint(sets: Sequence[frozenset[int]]) -> bool:
    seen: set[int] = set()
    for s in sets:
        if seen & s:
            return False
        seen |= s
    return True


def desire_profile(bids: Instance) -> DesireProfile:
    n = bids.n
    items = frozenset(range(bids.m))
    desired = tuple(frozenset(g for g, v in enumerate(row) if v > 0) for row in bids.values)
    exclusive = []
    disjoint = []
    for i in range(n):
        others = [desired[j] for j in range(n) if j != i]
        exclusive.append(items - frozenset().union(*others))
        disjoint.append(_pairwise_disjoint(others))
    return DesireProfile(desired, tuple(exclusive), tuple(disjoint))


def _with_exclusive(dp: DesireProfile, i: int) -> IntegralAllocation:
    bundles = list(dp.desired)
    bundles[i] = dp.exclusive[i]
    return IntegralAllocation(tuple(tuple(b) for b in bundles))


def _call_inner(inner: InnerAlgorithm, bids: Instance, check: bool) -> IntegralAllocation:
    out = inner(bids)
    if check:
        if not (is_clean(bids, out) and is_non_wasteful(bids, out) and is_ef1(bids, out)):
            raise InnerContractError(f"{getattr(inner, '__name__', inner)} returned {out.bundles}")
    return out


def mechanism_one(bids: Instance, inner: InnerAlgorithm, check_inner: bool = False) -> IntegralAllocation:
    """Run the four-case reduction and clean the result.

    Case I   every desired set is disjoint: each agent gets her desired set.
    Case II  exactly one agent ``i`` sees the others' sets as disjoint: try
             giving her the items nobody else wants, else call ``inner``.
    Case III exactly two such agents ``i < j``: the one valuing the shared
             items less gets the leftover bundle (if that is EF1), else ``inner``.
    Case IV  otherwise ``inner``.
    """
    dp = desire_profile(bids)
    flags = [i for i, r in enumerate(dp.others_disjoint) if r]
    if dp.all_disjoint:
        result = IntegralAllocation(tuple(tuple(d) for d in dp.desired))
    elif len(flags) == 1:
        cand = _with_exclusive(dp, flags[0])
        result = cand if is_ef1(bids, cand) else _call_inner(inner, bids, check_inner)
    elif len(flags) == 2:
        i, j = flags
        shared = dp.desired[i] & dp.desired[j]
        k = i if row_value(bids.values[i], shared) < row_value(bids.values[j], shared) else j
        cand = _with_exclusive(dp, k)
        result = cand if is_ef1(bids, cand) else _call_inner(inner, bids, check_inner)
    else:
        # three flagged agents force every pair to be disjoint
        assert not flags, f"impossible flag pattern {flags}"
        result = _call_inner(inner, bids, check_inner)
    return clean(bids, result)


@lru_cache(maxsize=65536)
def exhaustive_inner(bids: Instance, cap: int | None = None) -> IntegralAllocation:
    """Lexicographically first clean, non-wasteful, EF1 and fPO partial allocation.

    Clean and non-wasteful pin each item to the agents valuing it (or leave it
    unallocated when nobody does), so only those assignments are scanned.
    """
    choices = []
    for g in range(bids.m):
        wanters = [i for i in range(bids.n) if bids.values[i][g] > 0]
        choices.append(wanters or [bids.n])
    total = 1
    for c in choices:
        total *= len(c)
    check_scale(total, cap)
    for owners in itertools.product(*choices):
        cand = IntegralAllocation.from_owners(owners, bids.n)
        if is_ef1(bids, cand) and is_fpo(bids, cand):
            return cand
    raise AssertionError(f"no clean, non-wasteful, EF1, fPO allocation for {bids.values}")


def _in_ef1_set(i: int, v: Sequence[Fraction], alloc: IntegralAllocation, m: int) -> bool:
    own = alloc[i]
    if any(v[g] <= 0 for g in own):
        return False
    taken = alloc.allocated()
    if any(v[g] != 0 for g in range(m) if g not in taken):
        return False
    return all(ef1_holds(v, own, alloc[j]) for j in range(alloc.n) if j != i)


def in_ef1_set(i: int, v: Sequence, alloc: IntegralAllocation, m: int) -> bool:
    return _in_ef1_set(i, tuple(to_fraction(x) for x in v), alloc, m)


@lru_cache(maxsize=4096)
def _ef1_set(i: int, v: tuple[Fraction, ...], n: int, m: int, cap: int | None):
    check_scale((n + 1) ** m, cap)
    out = []
    for owners in itertools.product(range(n + 1), repeat=m):
        a = IntegralAllocation.from_owners(owners, n)
        if _in_ef1_set(i, v, a, m):
            out.append(a)
    return tuple(out)


def ef1_set(i: int, v: Sequence, n: int, m: int | None = None, cap: int | None = None):
    """Partial allocations that are clean and non-wasteful for agent ``i`` and EF1 from her view.

    >>> [a.bundles for a in ef1_set(0, [1], 2)]
    [((0,), ()), ((), (0,))]
    """
    v = tuple(to_fraction(x) for x in v)
    m = len(v) if m is None else m
    return list(_ef1_set(i, v, n, m, cap))


def worst_in_set(i: int, v_eval: Sequence, allocs: Sequence[IntegralAllocation]) -> Fraction:
    v_eval = [to_fraction(x) for x in v_eval]
    return min(row_value(v_eval, a[i]) for a in allocs)


def realize_allocation(i: int, v_i: Sequence, alloc: IntegralAllocation) -> tuple[tuple[Fraction, ...], ...]:
    """Opponent reports (in agent order, skipping ``i``) under which the reduction outputs ``alloc``.

    Each opponent desires exactly her own bundle. If ``i``'s desired items
    meet exactly one opponent bundle, that opponent values the shared items
    at twice ``i``'s value for them, so she wins the Case III comparison.
    """
    v_i = tuple(to_fraction(x) for x in v_i)
    m, n = len(v_i), alloc.n
    if not _in_ef1_set(i, v_i, alloc, m):
        raise ValueError(f"{alloc.bundles} is not in the EF1 set of agent {i}")
    desired = frozenset(g for g in range(m) if v_i[g] > 0)
    hit = [j for j in range(n) if j != i and desired & set(alloc[j])]
    rows = []
    for j in range(n):
        if j == i:
            continue
        row = [Fraction(0)] * m
        for g in alloc[j]:
            row[g] = Fraction(1)
        if len(hit) == 1 and j == hit[0]:
            shared = desired & set(alloc[j])
            high = 2 * row_value(v_i, shared)
            for g in shared:
                row[g] = high
        rows.append(tuple(row))
    return tuple(rows)


def assemble(i: int, v_i: Sequence, others: Sequence[Sequence]) -> Instance:
    """Profile with ``v_i`` in position ``i`` and ``others`` filling the rest in order."""
    rows = list(others)
    rows.insert(i, v_i)
    return Instance.from_rows(rows, len(v_i))


@dataclass(frozen=True)
class Lemma54Result:
    holds: bool
    worst_truthful: Fraction
    worst_other: Fraction
    witness: IntegralAllocation  # worst allocation in the truthful set
    counterpart: IntegralAllocation  # worst allocation (under v) in the other set
    swap: IntegralAllocation | None  # (j*, g*) transfer, built only when witness is outside the other set
    swap_no_better: bool | None  # swap bundle worth at most the witness bundle under v
    swap_in_set: bool | None  # swap lies in the other set

    @property
    def swap_ok(self) -> bool | None:
        if self.swap is None:
            return None
        return self.swap_no_better and self.swap_in_set


def swap_transfer(i: int, v2: Sequence[Fraction], a: IntegralAllocation) -> IntegralAllocation:
    """Give ``i`` the bundle of ``j*`` minus ``g*`` and hand ``j*`` the old bundle of ``i`` plus ``g*``.

    ``j*`` holds the bundle worth most under ``v2`` after dropping its best
    item ``g*``; ties go to the smaller index.
    """
    holders = [j for j in range(a.n) if j != i and a[j]]
    if not holders:
        raise ValueError("no opponent holds an item")

    def up_to_one(j: int) -> Fraction:
        return row_value(v2, a[j]) - max(v2[g] for g in a[j])

    j_star = max(holders, key=lambda j: (up_to_one(j), -j))
    g_star = max(a[j_star], key=lambda g: (v2[g], -g))
    bundles = [tuple(b) for b in a.bundles]
    bundles[i] = tuple(g for g in a[j_star] if g != g_star)
    bundles[j_star] = tuple(a[i]) + (g_star,)
    return IntegralAllocation(tuple(bundles))


def check_lemma54(i: int, v: Sequence, v2: Sequence, n: int, cap: int | None = None) -> Lemma54Result:
    """Compare the worst case (under ``v``) of the EF1 sets for reports ``v`` and ``v2``.

    When the truthful worst case is outside the other set, the swap transfer
    is also built and both of its properties are reported. It is a cross
    check only: ``holds`` comes from the enumeration.
    """
    v = tuple(to_fraction(x) for x in v)
    v2 = tuple(to_fraction(x) for x in v2)
    m = len(v)
    own = ef1_set(i, v, n, m, cap)
    other = ef1_set(i, v2, n, m, cap)
    worst = min(own, key=lambda a: row_value(v, a[i]))
    counterpart = min(other, key=lambda a: row_value(v, a[i]))
    w1 = row_value(v, worst[i])
    w2 = row_value(v, counterpart[i])
    swap = no_better = in_set = None
    if not _in_ef1_set(i, v2, worst, m):
        swap = swap_transfer(i, v2, worst)
        no_better = row_value(v, swap[i]) <= w1
        in_set = _in_ef1_set(i, v2, swap, m)
    return Lemma54Result(w1 >= w2, w1, w2, worst, counterpart, swap, no_better, in_set)
