"""Round-Robin and the welfare-maximizing allocation rules.

The welfare maximizers return the whole argmax set over complete integral
allocations (found by enumeration, so they are desk-scale only). Use
:func:`deterministic` or :func:`uniform_randomized` to turn a set-valued rule
into a mechanism.
"""

from __future__ import annotations

import enum
import logging
from fractions import Fraction
from math import prod
from typing import Callable, Sequence

from .core import (
    Instance,
    IntegralAllocation,
    Lottery,
    is_normalized,
    normalize,
    to_fraction,
)
from .lp import complete_allocations, scaled_rows

log = logging.getLogger(__name__)

SetRule = Callable[[Instance], list[IntegralAllocation]]
Mechanism = Callable[[Instance], IntegralAllocation]
RandomizedMechanism = Callable[[Instance], Lottery]


class TieBreak(enum.Enum):
    SMALLEST_INDEX = "smallest-index"
    THEOREM42 = "theorem42"
    LEX_ALLOCATION = "lex"


def preference_order(row: Sequence[Fraction]) -> list[int]:
    """Items from most to least valued; equal values in ascending index order."""
    return sorted(range(len(row)), key=lambda g: (-row[g], g))


def round_robin(bids: Instance, order: Sequence[int] | None = None) -> IntegralAllocation:
    """Agents take turns, in ``order``, picking their highest-bid remaining item.

    >>> round_robin(Instance.from_rows([[3, 1], [3, 1]])).bundles
    ((0,), (1,))
    """
    n, m = bids.n, bids.m
    order = list(range(n)) if order is None else list(order)
    if sorted(order) != list(range(n)):
        raise ValueError(f"order {order} is not a permutation of the agents")
    prefs = [preference_order(r) for r in bids.values]
    ptr = [0] * n
    taken = [False] * m
    bundles = [[] for _ in range(n)]
    for t in range(m):
        a = order[t % n]
        p = prefs[a]
        k = ptr[a]
        while taken[p[k]]:
            k += 1
        g = p[k]
        ptr[a] = k + 1
        taken[g] = True
        bundles[a].append(g)
    return IntegralAllocation(tuple(tuple(b) for b in bundles))


def round_robin_count(rank: int, n: int, m: int) -> int:
    """Number of items the agent picking ``rank``-th (1-based) receives."""
    return m // n + (1 if rank <= m % n else 0)


def round_robin_worst_best(values: Sequence, rank: int, n: int) -> tuple[Fraction, Fraction]:
    """Closed-form worst and best Round-Robin utility for the ``rank``-th picker.

    Worst: the values ranked ``rank, rank + n, rank + 2n, ...`` in her own
    order (what she gets when every opponent shares her ranking). Best: her
    top ``l`` values, ``l`` being the number of items she receives.

    >>> round_robin_worst_best([4, 3, 2, 1], 1, 2)
    (Fraction(6, 1), Fraction(7, 1))
    """
    vals = sorted((to_fraction(v) for v in values), reverse=True)
    m = len(vals)
    if not 1 <= rank <= n:
        raise ValueError(f"rank must lie in 1..{n}")
    count = round_robin_count(rank, n, m)
    worst = sum((vals[rank - 1 + k * n] for k in range(count)), Fraction(0))
    best = sum(vals[:count], Fraction(0))
    return worst, best


def _tb_winner(tied: list[int], n: int, tie: TieBreak) -> int:
    if tie is TieBreak.THEOREM42 and len(tied) == 2 and tied == [0, n - 1]:
        return n - 1
    return tied[0]


def max_utilitarian(bids: Instance, tie: TieBreak = TieBreak.SMALLEST_INDEX) -> IntegralAllocation:
    """Give each item to a highest (normalized) bidder.

    Ties go to the smallest index; under ``THEOREM42`` a tie between exactly
    the first and the last agent goes to the last agent instead.
    """
    if tie is TieBreak.LEX_ALLOCATION:
        raise ValueError("use THEOREM42 or SMALLEST_INDEX for the utilitarian rule")
    if not is_normalized(bids):
        log.debug("max_utilitarian: normalizing reported rows")
    b = normalize(bids)
    owners = []
    for g in range(b.m):
        col = [b.values[i][g] for i in range(b.n)]
        top = max(col)
        tied = [i for i, v in enumerate(col) if v == top]
        owners.append(_tb_winner(tied, b.n, tie))
    return IntegralAllocation.from_owners(owners, b.n)


def utilitarian_lottery(bids: Instance) -> Lottery:
    """Utilitarian rule that breaks every tie uniformly at random, item by item."""
    b = normalize(bids)
    winners = []
    for g in range(b.m):
        col = [b.values[i][g] for i in range(b.n)]
        top = max(col)
        winners.append([i for i, v in enumerate(col) if v == top])
    p = Fraction(1, prod(len(w) for w in winners))
    support = [((p, IntegralAllocation.from_owners(owners, b.n))) for owners in _product(winners)]
    return Lottery(tuple(support))


def _product(choices: list[list[int]]):
    if not choices:
        yield ()
        return
    for first in choices[0]:
        for rest in _product(choices[1:]):
            yield (first,) + rest


# -- enumeration-based welfare rules ----------------------------------------


def utility_table(bids: Instance, cap: int | None = None):
    """Yield ``(owners, utilities)`` for every complete allocation.

    Utilities are integers: the values times a common denominator, which
    preserves every comparison the welfare rules make.
    """
    vals = scaled_rows(bids)
    n = bids.n
    for owners in complete_allocations(n, bids.m, cap):
        u = [0] * n
        for g, o in enumerate(owners):
            u[o] += vals[o][g]
        yield owners, u


def _argmax(bids: Instance, key, cap: int | None = None) -> list[IntegralAllocation]:
    best_key, best = None, []
    for owners, u in utility_table(bids, cap):
        k = key(u)
        if best_key is None or k > best_key:
            best_key, best = k, [owners]
        elif k == best_key:
            best.append(owners)
    return [IntegralAllocation.from_owners(o, bids.n) for o in best]


def _positive(u: list[int]) -> list[int]:
    return [x for x in u if x > 0]


def _egal_key(u):
    pos = _positive(u)
    return (len(pos), min(pos) if pos else 0)


def _nash_key(u):
    # equal counts scale every product by the same power of the denominator
    pos = _positive(u)
    return (len(pos), prod(pos))


def _leximin_key(u):
    return (len(_positive(u)), tuple(sorted(u)))


def _count_key(u):
    return (len(_positive(u)),)


def max_egalitarian(bids: Instance, cap: int | None = None) -> list[IntegralAllocation]:
    """Maximize the number of agents with positive utility, then their minimum utility."""
    return _argmax(bids, _egal_key, cap)


def max_nash(bids: Instance, cap: int | None = None) -> list[IntegralAllocation]:
    """MNW allocations: most agents with positive utility, then the largest product."""
    return _argmax(bids, _nash_key, cap)


def leximin(bids: Instance, cap: int | None = None) -> list[IntegralAllocation]:
    """Most positive-utility agents, then the lexicographically largest sorted utility vector."""
    return _argmax(bids, _leximin_key, cap)


def max_positive_count(bids: Instance, cap: int | None = None) -> list[IntegralAllocation]:
    return _argmax(bids, _count_key, cap)


def pareto_filter(bids: Instance, allocs: list[IntegralAllocation], cap: int | None = None):
    """Keep the allocations no complete integral allocation Pareto-dominates."""
    vectors = {tuple(u) for _, u in utility_table(bids, cap)}
    # only maximal vectors can dominate; prune first
    frontier = [v for v in vectors if not any(_dominates(w, v) for w in vectors)]
    vals = scaled_rows(bids)
    out = []
    for a in allocs:
        u = tuple(sum(vals[i][g] for g in a[i]) for i in range(bids.n))
        if not any(_dominates(w, u) for w in frontier):
            out.append(a)
    return out


def _dominates(w, v) -> bool:
    return all(x >= y for x, y in zip(w, v)) and any(x > y for x, y in zip(w, v))


def po_max_positive_count(bids: Instance, cap: int | None = None) -> list[IntegralAllocation]:
    return pareto_filter(bids, max_positive_count(bids, cap), cap)


def po_max_egalitarian(bids: Instance, cap: int | None = None) -> list[IntegralAllocation]:
    return pareto_filter(bids, max_egalitarian(bids, cap), cap)


# -- wrappers -----------------------------------------------------------------


def lex_first(allocs: Sequence[IntegralAllocation], m: int) -> IntegralAllocation:
    """The allocation with the smallest owner vector (agent 0 first, unallocated last)."""
    return min(allocs, key=lambda a: a.sort_key(m))


def deterministic(rule: SetRule) -> Mechanism:
    def mech(bids: Instance) -> IntegralAllocation:
        return lex_first(rule(bids), bids.m)

    mech.__name__ = f"lex_{rule.__name__}"
    return mech


def uniform_randomized(rule: SetRule) -> RandomizedMechanism:
    def mech(bids: Instance) -> Lottery:
        return Lottery.uniform(rule(bids))

    mech.__name__ = f"uniform_{rule.__name__}"
    return mech


SET_RULES: dict[str, SetRule] = {
    "egal": max_egalitarian,
    "nash": max_nash,
    "leximin": leximin,
    "max-count": max_positive_count,
}
