"""Random generators, hypothesis strategies and brute-force oracles for the tests.

The oracles here deliberately avoid the library's enumeration helpers so a bug
there cannot hide behind a matching bug in the test.
"""

import itertools
import random
from fractions import Fraction

from hypothesis import strategies as st

from fairnom import Instance, IntegralAllocation

F = Fraction


def rand_value(rng: random.Random, max_den: int = 10, zero_bias: float = 0.25) -> Fraction:
    if rng.random() < zero_bias:
        return F(0)
    den = rng.randint(1, max_den)
    return F(rng.randint(1, 3 * den), den)


def random_instance(rng, n, m, max_den=10, zero_bias=0.25) -> Instance:
    return Instance.from_rows([[rand_value(rng, max_den, zero_bias) for _ in range(m)] for _ in range(n)], m)


def random_partial(rng, n, m) -> IntegralAllocation:
    return IntegralAllocation.from_owners([rng.randrange(n + 1) for _ in range(m)], n)


def random_complete(rng, n, m) -> IntegralAllocation:
    return IntegralAllocation.from_owners([rng.randrange(n) for _ in range(m)], n)


rationals = st.builds(
    lambda p, q: F(p, q), st.integers(min_value=0, max_value=12), st.integers(min_value=1, max_value=6)
)


@st.composite
def instances(draw, max_n=3, max_m=4, min_n=1, min_m=0):
    n = draw(st.integers(min_n, max_n))
    m = draw(st.integers(min_m, max_m))
    rows = draw(st.lists(st.lists(rationals, min_size=m, max_size=m), min_size=n, max_size=n))
    return Instance.from_rows(rows, m)


@st.composite
def instance_and_allocation(draw, max_n=3, max_m=4, complete=False):
    inst = draw(instances(max_n=max_n, max_m=max_m))
    hi = inst.n - 1 if complete else inst.n
    owners = draw(st.lists(st.integers(0, hi), min_size=inst.m, max_size=inst.m))
    return inst, IntegralAllocation.from_owners(owners, inst.n)


# -- oracles ---------------------------------------------------------------------


def all_complete(n, m):
    for owners in itertools.product(range(n), repeat=m):
        bundles = [[] for _ in range(n)]
        for g, o in enumerate(owners):
            bundles[o].append(g)
        yield IntegralAllocation(tuple(tuple(b) for b in bundles))


def utils(inst, alloc):
    return [sum((inst.values[i][g] for g in alloc[i]), F(0)) for i in range(inst.n)]


def two_stage_argmax(inst, second):
    """Allocations maximizing the positive count, then ``second`` of the positive utilities."""
    allocs = list(all_complete(inst.n, inst.m))
    count = max(sum(1 for u in utils(inst, a) if u > 0) for a in allocs)
    stage1 = [a for a in allocs if sum(1 for u in utils(inst, a) if u > 0) == count]
    best = max(second([u for u in utils(inst, a) if u > 0]) for a in stage1)
    return {a for a in stage1 if second([u for u in utils(inst, a) if u > 0]) == best}


def pareto_dominated(inst, alloc):
    u = utils(inst, alloc)
    for b in all_complete(inst.n, inst.m):
        w = utils(inst, b)
        if all(x >= y for x, y in zip(w, u)) and any(x > y for x, y in zip(w, u)):
            return True
    return False


def random_bistochastic(rng, k, terms=None, max_den=12):
    """A random convex combination of permutation matrices with rational weights."""
    terms = terms or rng.randint(1, 2 * k)
    raw = [F(rng.randint(1, max_den)) for _ in range(terms)]
    total = sum(raw)
    mat = [[F(0)] * k for _ in range(k)]
    for w in raw:
        perm = list(range(k))
        rng.shuffle(perm)
        for r, c in enumerate(perm):
            mat[r][c] += w / total
    return mat
