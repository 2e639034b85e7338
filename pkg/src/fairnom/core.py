"""Exact domain types: instances, integral and fractional allocations, lotteries.

Every number in the library is a :class:`fractions.Fraction`. Decimal inputs
such as ``"3.9"`` are converted exactly (to ``39/10``), never through a float.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

DEFAULT_ENUM_CAP = 2_000_000
ENUM_CAP_ENV = "FAIRNOM_ENUM_CAP"


class FairnomError(Exception):
    """Base class for errors raised by this package."""


class NormalizationError(FairnomError):
    pass


class ScaleError(FairnomError):
    """An exhaustive enumeration would exceed the configured cap."""


class InvalidAllocationError(FairnomError):
    pass


def enum_cap(cap: int | None = None) -> int:
    if cap is not None:
        return cap
    return int(os.environ.get(ENUM_CAP_ENV, DEFAULT_ENUM_CAP))


def check_scale(count: int, cap: int | None = None, what: str = "allocations") -> None:
    limit = enum_cap(cap)
    if count > limit:
        raise ScaleError(f"{count} {what} exceed the enumeration cap {limit}")


def to_fraction(x) -> Fraction:
    """Convert an int, Fraction or string (``"p/q"`` or decimal) exactly.

    >>> to_fraction("3.9")
    Fraction(39, 10)
    >>> to_fraction("2/6")
    Fraction(1, 3)
    >>> to_fraction(0.5)
    Traceback (most recent call last):
    ...
    TypeError: floats are not accepted (got 0.5); pass a string such as '0.5'
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, float):
        raise TypeError(f"floats are not accepted (got {x!r}); pass a string such as {str(x)!r}")
    if isinstance(x, (int, Fraction, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def fmt(x: Fraction) -> str:
    """Render a rational as ``"p/q"`` (or ``"p"`` when integral)."""
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_row(text: str) -> tuple[Fraction, ...]:
    """Parse a comma separated row such as ``"3.9,3,2,0.9"``."""
    text = text.strip()
    if not text:
        return ()
    return tuple(to_fraction(tok) for tok in text.split(","))


@dataclass(frozen=True)
class Instance:
    """An ``n x m`` matrix of nonnegative exact values (true or reported)."""

    values: tuple[tuple[Fraction, ...], ...]
    items: int | None = None

    def __post_init__(self):
        rows = tuple(tuple(to_fraction(v) for v in row) for row in self.values)
        if not rows:
            raise ValueError("an instance needs at least one agent")
        m = len(rows[0]) if self.items is None else self.items
        for i, row in enumerate(rows):
            if len(row) != m:
                raise ValueError(f"row {i} has {len(row)} entries, expected {m}")
            if any(v < 0 for v in row):
                raise ValueError(f"row {i} has a negative value")
        object.__setattr__(self, "values", rows)
        object.__setattr__(self, "items", m)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable], items: int | None = None) -> Instance:
        return cls(tuple(tuple(row) for row in rows), items)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def m(self) -> int:
        return self.items

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.values[i]

    def with_row(self, i: int, row: Sequence) -> Instance:
        rows = list(self.values)
        rows[i] = tuple(row)
        return Instance(tuple(rows), self.m)

    def total(self, i: int) -> Fraction:
        return sum(self.values[i], Fraction(0))

    def to_json(self) -> dict:
        return {
            "agents": self.n,
            "items": self.m,
            "values": [[fmt(v) for v in row] for row in self.values],
        }

    @classmethod
    def from_json(cls, data: dict) -> Instance:
        values = data["values"]
        inst = cls.from_rows(values, data.get("items"))
        if "agents" in data and data["agents"] != inst.n:
            raise ValueError(f"'agents' is {data['agents']} but {inst.n} rows were given")
        return inst


def load_json(path: str) -> dict:
    """Read JSON, keeping decimal literals exact."""
    with open(path) as fh:
        return json.load(fh, parse_float=Fraction)


def _bundle(items: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(int(g) for g in items))


@dataclass(frozen=True)
class IntegralAllocation:
    """Ordered disjoint bundles; unallocated items are allowed."""

    bundles: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        bundles = tuple(_bundle(b) for b in self.bundles)
        seen: set[int] = set()
        for b in bundles:
            for g in b:
                if g < 0:
                    raise InvalidAllocationError(f"negative item index {g}")
                if g in seen:
                    raise InvalidAllocationError(f"item {g} appears in two bundles")
                seen.add(g)
        object.__setattr__(self, "bundles", bundles)

    @classmethod
    def from_owners(cls, owners: Sequence[int], n: int) -> IntegralAllocation:
        """Build from an owner vector; an owner outside ``range(n)`` means unallocated."""
        bundles = [[] for _ in range(n)]
        for g, o in enumerate(owners):
            if 0 <= o < n:
                bundles[o].append(g)
        return cls(tuple(tuple(b) for b in bundles))

    @property
    def n(self) -> int:
        return len(self.bundles)

    def __getitem__(self, i: int) -> tuple[int, ...]:
        return self.bundles[i]

    def allocated(self) -> frozenset[int]:
        return frozenset(g for b in self.bundles for g in b)

    def owners(self, m: int) -> tuple[int, ...]:
        """Owner of each item, with ``n`` standing for unallocated."""
        out = [self.n] * m
        for i, b in enumerate(self.bundles):
            for g in b:
                out[g] = i
        return tuple(out)

    def sort_key(self, m: int) -> tuple[int, ...]:
        """Encoding used for lexicographic tie-breaking between allocations."""
        return self.owners(m)

    def validate(self, inst: Instance) -> None:
        if self.n != inst.n:
            raise InvalidAllocationError(f"allocation has {self.n} bundles, instance has {inst.n} agents")
        for b in self.bundles:
            for g in b:
                if g >= inst.m:
                    raise InvalidAllocationError(f"item {g} out of range for m={inst.m}")

    def as_matrix(self, m: int) -> FractionalAllocation:
        rows = [[Fraction(0)] * m for _ in range(self.n)]
        for i, b in enumerate(self.bundles):
            for g in b:
                rows[i][g] = Fraction(1)
        return FractionalAllocation(tuple(tuple(r) for r in rows))

    def to_json(self) -> list[list[int]]:
        """1-based bundles, as used on the command line."""
        return [[g + 1 for g in b] for b in self.bundles]

    @classmethod
    def from_json(cls, data) -> IntegralAllocation:
        if isinstance(data, dict):
            data = data["bundles"]
        return cls(tuple(tuple(int(g) - 1 for g in b) for b in data))


@dataclass(frozen=True)
class FractionalAllocation:
    """``shares[i][j]`` is the fraction of item ``j`` held by agent ``i``."""

    shares: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        shares = tuple(tuple(to_fraction(x) for x in row) for row in self.shares)
        if shares:
            m = len(shares[0])
            if any(len(r) != m for r in shares):
                raise InvalidAllocationError("ragged share matrix")
            for r in shares:
                if any(x < 0 or x > 1 for x in r):
                    raise InvalidAllocationError("shares must lie in [0, 1]")
            for j in range(m):
                if sum(r[j] for r in shares) > 1:
                    raise InvalidAllocationError(f"item {j} is over-allocated")
        object.__setattr__(self, "shares", shares)

    @property
    def n(self) -> int:
        return len(self.shares)

    @property
    def m(self) -> int:
        return len(self.shares[0]) if self.shares else 0

    def __getitem__(self, i: int) -> tuple[Fraction, ...]:
        return self.shares[i]

    def to_json(self) -> list[list[str]]:
        return [[fmt(x) for x in row] for row in self.shares]


@dataclass(frozen=True)
class Lottery:
    """A finite distribution over integral allocations."""

    support: tuple[tuple[Fraction, IntegralAllocation], ...]

    def __post_init__(self):
        support = tuple((to_fraction(p), a) for p, a in self.support)
        if not support:
            raise ValueError("a lottery needs a non-empty support")
        if any(p <= 0 for p, _ in support):
            raise ValueError("support probabilities must be positive")
        if sum(p for p, _ in support) != 1:
            raise ValueError("probabilities must sum to exactly 1")
        object.__setattr__(self, "support", support)

    @classmethod
    def point(cls, alloc: IntegralAllocation) -> Lottery:
        return cls(((Fraction(1), alloc),))

    @classmethod
    def uniform(cls, allocs: Sequence[IntegralAllocation]) -> Lottery:
        p = Fraction(1, len(allocs))
        return cls(tuple((p, a) for a in allocs))

    @classmethod
    def merged(cls, pairs: Iterable[tuple[Fraction, IntegralAllocation]]) -> Lottery:
        """Combine repeated allocations, keeping first-appearance order."""
        acc: dict[IntegralAllocation, Fraction] = {}
        for p, a in pairs:
            acc[a] = acc.get(a, Fraction(0)) + p
        return cls(tuple((p, a) for a, p in acc.items()))

    def to_json(self) -> dict:
        return {"support": [{"prob": fmt(p), "alloc": a.to_json()} for p, a in self.support]}


def utility(inst: Instance, agent: int, bundle: Iterable[int]) -> Fraction:
    """Additive value of ``bundle`` to ``agent``.

    >>> inst = Instance.from_rows([["3.9", 3, 2, "0.9"]])
    >>> utility(inst, 0, [2])
    Fraction(2, 1)
    """
    if not 0 <= agent < inst.n:
        raise IndexError(f"agent {agent} out of range")
    row = inst.values[agent]
    total = Fraction(0)
    for g in bundle:
        if not 0 <= g < inst.m:
            raise IndexError(f"item {g} out of range")
        total += row[g]
    return total


def row_value(row: Sequence[Fraction], bundle: Iterable[int]) -> Fraction:
    return sum((row[g] for g in bundle), Fraction(0))


def frac_value(row: Sequence[Fraction], shares: Sequence[Fraction]) -> Fraction:
    return sum((v * x for v, x in zip(row, shares)), Fraction(0))


def expected_allocation(lot: Lottery, m: int | None = None) -> FractionalAllocation:
    """Probability-weighted sum of the support allocations."""
    n = lot.support[0][1].n
    if m is None:
        m = 1 + max((g for _, a in lot.support for g in a.allocated()), default=-1)
    acc = [[Fraction(0)] * m for _ in range(n)]
    for p, a in lot.support:
        for i, b in enumerate(a.bundles):
            for g in b:
                acc[i][g] += p
    return FractionalAllocation(tuple(tuple(r) for r in acc))


def normalize(inst: Instance) -> Instance:
    """Scale every row to sum to one.

    >>> normalize(Instance.from_rows([[2, 2]])).values
    ((Fraction(1, 2), Fraction(1, 2)),)
    """
    rows = []
    for i, row in enumerate(inst.values):
        s = sum(row, Fraction(0))
        if s == 0:
            raise NormalizationError(f"agent {i} values every item at zero")
        rows.append(tuple(v / s for v in row))
    return Instance(tuple(rows), inst.m)


def is_normalized(inst: Instance) -> bool:
    return all(sum(row, Fraction(0)) == 1 for row in inst.values)
