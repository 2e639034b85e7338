"""Fairness and structural predicates on allocations.

Witnesses are 0-based ``(envious, envied)`` pairs; when several exist the
lexicographically smallest one is reported.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .core import (
    FractionalAllocation,
    Instance,
    IntegralAllocation,
    InvalidAllocationError,
    frac_value,
    row_value,
)

Allocation = Union[IntegralAllocation, FractionalAllocation]


@dataclass(frozen=True)
class EnvyReport:
    ok: bool
    witness: tuple[int, int | None] | None = None

    def __post_init__(self):
        if self.ok != (self.witness is None):
            raise ValueError("ok must hold exactly when there is no witness")

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        w = None
        if self.witness is not None:
            w = [x + 1 if x is not None else None for x in self.witness]
        return {"ok": self.ok, "witness": w}


OK = EnvyReport(True)


def _shares(inst: Instance, alloc: Allocation) -> FractionalAllocation:
    if isinstance(alloc, IntegralAllocation):
        alloc.validate(inst)
        return alloc.as_matrix(inst.m)
    if alloc.n != inst.n or alloc.m != inst.m:
        raise InvalidAllocationError("allocation dimensions do not match the instance")
    return alloc


def is_ef(inst: Instance, alloc: Allocation) -> EnvyReport:
    """Envy-freeness for integral or fractional allocations."""
    x = _shares(inst, alloc)
    for i in range(inst.n):
        row = inst.values[i]
        own = frac_value(row, x[i])
        for j in range(inst.n):
            if j != i and frac_value(row, x[j]) > own:
                return EnvyReport(False, (i, j))
    return OK


def is_prop(inst: Instance, alloc: Allocation) -> EnvyReport:
    """Proportionality; the witness is ``(agent, None)``."""
    x = _shares(inst, alloc)
    for i in range(inst.n):
        row = inst.values[i]
        own = frac_value(row, x[i])
        if own * inst.n < sum(row, Fraction(0)):
            return EnvyReport(False, (i, None))
    return OK


def ef1_holds(row: Sequence[Fraction], own: Sequence[int], other: Sequence[int]) -> bool:
    """Does an agent with values ``row`` holding ``own`` not envy ``other`` up to one item?"""
    if not other:
        return True
    mine = row_value(row, own)
    theirs = row_value(row, other)
    return mine >= theirs - max(row[g] for g in other)


def is_ef1_for_agent(inst: Instance, agent: int, alloc: IntegralAllocation) -> EnvyReport:
    alloc.validate(inst)
    row = inst.values[agent]
    for j in range(inst.n):
        if j != agent and not ef1_holds(row, alloc[agent], alloc[j]):
            return EnvyReport(False, (agent, j))
    return OK


def is_ef1(inst: Instance, alloc: IntegralAllocation) -> EnvyReport:
    alloc.validate(inst)
    for i in range(inst.n):
        rep = is_ef1_for_agent(inst, i, alloc)
        if not rep:
            return rep
    return OK


def is_clean(inst: Instance, alloc: IntegralAllocation) -> bool:
    """Every held item has positive value to its holder (additive case)."""
    alloc.validate(inst)
    return all(inst.values[i][g] > 0 for i, b in enumerate(alloc.bundles) for g in b)


def is_non_wasteful(inst: Instance, alloc: IntegralAllocation) -> bool:
    alloc.validate(inst)
    taken = alloc.allocated()
    return all(
        all(row[g] == 0 for row in inst.values) for g in range(inst.m) if g not in taken
    )


def is_complete(alloc: IntegralAllocation, m: int) -> bool:
    return alloc.allocated() == frozenset(range(m))


def clean(inst: Instance, alloc: IntegralAllocation) -> IntegralAllocation:
    """Drop items of zero value to their holder, scanning in ascending item order."""
    return IntegralAllocation(
        tuple(tuple(g for g in b if inst.values[i][g] > 0) for i, b in enumerate(alloc.bundles))
    )
