"""Probabilistic serial, Birkhoff decomposition and the PS-Lottery construction."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, lcm
from typing import Sequence

from .core import FairnomError, FractionalAllocation, Instance, IntegralAllocation, Lottery
from .mechanisms import preference_order

ZERO = Fraction(0)
ONE = Fraction(1)

Segment = tuple[int, Fraction, Fraction]  # (item, start, end)


class NotBistochastic(FairnomError):
    pass


@dataclass(frozen=True)
class EatingSchedule:
    """For each agent, the consecutive ``(item, start, end)`` segments she ate."""

    segments: tuple[tuple[Segment, ...], ...]
    horizon: Fraction

    def shares(self, m: int) -> list[list[Fraction]]:
        out = [[ZERO] * m for _ in self.segments]
        for a, segs in enumerate(self.segments):
            for g, s, e in segs:
                out[a][g] += e - s
        return out

    def window(self, agent: int, lo: Fraction, hi: Fraction) -> dict[int, Fraction]:
        """Amount of each item the agent eats during ``(lo, hi]``."""
        got: dict[int, Fraction] = {}
        for g, s, e in self.segments[agent]:
            overlap = min(e, hi) - max(s, lo)
            if overlap > 0:
                got[g] = got.get(g, ZERO) + overlap
        return got

    def to_json(self) -> list[list[dict]]:
        from .core import fmt

        return [
            [{"item": g + 1, "start": fmt(s), "end": fmt(e)} for g, s, e in segs]
            for segs in self.segments
        ]


def eat(prefs: Sequence[Sequence[int]], m: int) -> EatingSchedule:
    """Simulate simultaneous eating at unit speed along strict preference lists.

    Exact event-driven simulation: between events every agent eats one fixed
    item, and the next event is the earliest time some item runs out.
    """
    n = len(prefs)
    left = [ONE] * m
    ptr = [0] * n
    segs: list[list[list]] = [[] for _ in range(n)]
    t = ZERO
    remaining_items = m
    while remaining_items:
        cur = []
        for a in range(n):
            p = prefs[a]
            k = ptr[a]
            while left[p[k]] == 0:
                k += 1
            ptr[a] = k
            cur.append(p[k])
        eaters: dict[int, int] = {}
        for g in cur:
            eaters[g] = eaters.get(g, 0) + 1
        dt = min(left[g] / c for g, c in eaters.items())
        for a, g in enumerate(cur):
            if segs[a] and segs[a][-1][0] == g and segs[a][-1][2] == t:
                segs[a][-1][2] = t + dt
            else:
                segs[a].append([g, t, t + dt])
        for g, c in eaters.items():
            left[g] -= c * dt
            if left[g] == 0:
                remaining_items -= 1
        t += dt
    return EatingSchedule(tuple(tuple((g, s, e) for g, s, e in sa) for sa in segs), t)


def probabilistic_serial(bids: Instance) -> tuple[FractionalAllocation, EatingSchedule]:
    """PS with ties in an agent's ranking broken towards the smaller item index."""
    prefs = [preference_order(r) for r in bids.values]
    sched = eat(prefs, bids.m)
    shares = sched.shares(bids.m)
    return FractionalAllocation(tuple(tuple(r) for r in shares)), sched


def _check_bistochastic(mat: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    k = len(mat)
    rows = [[Fraction(x) for x in r] for r in mat]
    if any(len(r) != k for r in rows):
        raise NotBistochastic("matrix is not square")
    if any(x < 0 for r in rows for x in r):
        raise NotBistochastic("matrix has a negative entry")
    if any(sum(r) != 1 for r in rows):
        raise NotBistochastic("a row does not sum to one")
    if any(sum(r[j] for r in rows) != 1 for j in range(k)):
        raise NotBistochastic("a column does not sum to one")
    return rows


def _perfect_matching(mat: list[list[Fraction]]) -> list[int] | None:
    """Augmenting-path matching on positive entries; rows and columns scanned in index order.

    A row takes the first free column it can before displacing anyone.
    """
    k = len(mat)
    match_col = [-1] * k

    def augment(r: int, seen: set[int]) -> bool:
        for c in range(k):
            if mat[r][c] > 0 and match_col[c] == -1:
                seen.add(c)
                match_col[c] = r
                return True
        for c in range(k):
            if mat[r][c] > 0 and c not in seen:
                seen.add(c)
                if match_col[c] == -1 or augment(match_col[c], seen):
                    match_col[c] = r
                    return True
        return False

    for r in range(k):
        if not augment(r, set()):
            return None
    perm = [0] * k
    for c, r in enumerate(match_col):
        perm[r] = c
    return perm


def birkhoff(mat: Sequence[Sequence]) -> list[tuple[Fraction, tuple[int, ...]]]:
    """Write a bistochastic matrix as a convex combination of permutations.

    Each term is ``(weight, perm)`` with ``perm[row] = column``. Every round
    zeroes at least one entry, so at most ``k*k - k + 1`` terms come out.

    >>> half = Fraction(1, 2)
    >>> birkhoff([[half, half], [half, half]])
    [(Fraction(1, 2), (0, 1)), (Fraction(1, 2), (1, 0))]
    """
    res = _check_bistochastic(mat)
    k = len(res)
    terms = []
    while any(x > 0 for r in res for x in r):
        perm = _perfect_matching(res)
        if perm is None:  # pragma: no cover - impossible for bistochastic residuals
            raise NotBistochastic("residual has no perfect matching")
        w = min(res[r][perm[r]] for r in range(k))
        for r in range(k):
            res[r][perm[r]] -= w
        terms.append((w, tuple(perm)))
    return terms


def recompose(terms, k: int) -> list[list[Fraction]]:
    out = [[ZERO] * k for _ in range(k)]
    for w, perm in terms:
        for r, c in enumerate(perm):
            out[r][c] += w
    return out


def ps_matrix(bids: Instance) -> tuple[list[list[Fraction]], int, EatingSchedule]:
    """Bistochastic matrix whose row ``i*c + k`` is what agent ``i`` eats in ``(k, k+1]``.

    Items are padded with zero-valued dummies (ranked after every real item)
    up to ``n*c`` with ``c = ceil(m/n)``.
    """
    n, m = bids.n, bids.m
    c = ceil(m / n)
    size = n * c
    prefs = [preference_order(r) + list(range(m, size)) for r in bids.values]
    sched = eat(prefs, size)
    mat = [[ZERO] * size for _ in range(size)]
    for i in range(n):
        for k in range(c):
            for g, amount in sched.window(i, Fraction(k), Fraction(k + 1)).items():
                mat[i * c + k][g] = amount
    return mat, c, sched


def ps_lottery(bids: Instance) -> Lottery:
    """Lottery over integral allocations whose expectation is the PS outcome.

    Each permutation in the Birkhoff decomposition hands agent ``i`` one item
    per unit time window; dummy items are dropped afterwards.
    """
    n, m = bids.n, bids.m
    if m == 0:
        return Lottery.point(IntegralAllocation(((),) * n))
    mat, c, _ = ps_matrix(bids)
    pairs = []
    for w, perm in birkhoff(mat):
        bundles = tuple(
            tuple(g for g in (perm[i * c + k] for k in range(c)) if g < m) for i in range(n)
        )
        pairs.append((w, IntegralAllocation(bundles)))
    return Lottery.merged(pairs)


def sample(lot: Lottery, seed: int) -> IntegralAllocation:
    """Draw one allocation with exactly the stated probabilities.

    A uniform integer below the common denominator is drawn, so no float
    rounding enters the probabilities.
    """
    rng = random.Random(seed)
    den = 1
    for p, _ in lot.support:
        den = lcm(den, p.denominator)
    x = rng.randrange(den)
    acc = 0
    for p, a in lot.support:
        acc += p.numerator * (den // p.denominator)
        if x < acc:
            return a
    raise AssertionError("probabilities do not sum to one")  # pragma: no cover
