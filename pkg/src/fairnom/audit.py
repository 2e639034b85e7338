"""Exact obvious-manipulability audits over finite report spaces.

A mechanism is audited for one agent at a time. The opponents' reports range
over a declared :class:`ReportSpace`; the worst and best utility the agent
gets from truthful reporting are compared with those from each misreport.
A witness found this way is a concrete profile and therefore holds for the
full type space. A clean verdict only speaks for the declared space.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .core import (
    Instance,
    IntegralAllocation,
    Lottery,
    check_scale,
    expected_allocation,
    fmt,
    frac_value,
    to_fraction,
)
from .mechanisms import preference_order

Row = tuple[Fraction, ...]
Profile = tuple[Row, ...]  # opponents' reports in agent order, skipping the audited agent
Outcome = tuple[Fraction, ...]  # the audited agent's (expected) share of each item

FAMILIES = ("same-order", "opposite-order", "unit", "zero")


def _row(r: Iterable) -> Row:
    return tuple(to_fraction(x) for x in r)


def family_rows(family: str, reference: Sequence[Fraction]) -> list[Row]:
    """Rows of a structural family, built relative to the audited agent's true values.

    >>> [tuple(map(str, r)) for r in family_rows("opposite-order", _row([5, 1, 3]))]
    [('1', '3', '2')]
    """
    m = len(reference)
    if family == "same-order":
        return [_row(reference)]
    if family == "opposite-order":
        order = preference_order(reference)
        row = [Fraction(0)] * m
        for rank, g in enumerate(order):
            row[g] = Fraction(rank + 1)
        return [tuple(row)]
    if family == "unit":
        return [tuple(Fraction(int(g == h)) for h in range(m)) for g in range(m)]
    if family == "zero":
        return [(Fraction(0),) * m]
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


@dataclass(frozen=True)
class ReportSpace:
    """Admissible opponent reports.

    Every opponent independently reports any of ``rows`` or any row of the
    named ``families``; ``profiles`` adds explicit joint reports on top.
    """

    rows: tuple[Row, ...] = ()
    families: tuple[str, ...] = FAMILIES
    profiles: tuple[Profile, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(_row(r) for r in self.rows))
        object.__setattr__(self, "families", tuple(self.families))
        object.__setattr__(self, "profiles", tuple(tuple(_row(r) for r in p) for p in self.profiles))
        for f in self.families:
            if f not in FAMILIES:
                raise ValueError(f"unknown family {f!r}; expected one of {FAMILIES}")
        if not self.rows and not self.families and not self.profiles:
            raise ValueError("a report space must not be empty")
        dims = {len(r) for r in self.rows} | {len(r) for p in self.profiles for r in p}
        if len(dims) > 1:
            raise ValueError(f"rows of different lengths {sorted(dims)}")

    def row_list(self, references: Iterable[Sequence[Fraction]]) -> list[Row]:
        """Deduplicated rows, explicit rows first, families expanded for each reference."""
        out = dict.fromkeys(self.rows)
        for ref in references:
            for f in self.families:
                out.update(dict.fromkeys(family_rows(f, ref)))
        return list(out)

    def opponent_profiles(
        self, n: int, references: Iterable[Sequence[Fraction]], cap: int | None = None
    ) -> list[Profile]:
        rows = self.row_list(references)
        check_scale(len(rows) ** (n - 1) + len(self.profiles), cap, "opponent profiles")
        out = dict.fromkeys(itertools.product(rows, repeat=n - 1))
        for p in self.profiles:
            if len(p) != n - 1:
                raise ValueError(f"explicit profile has {len(p)} rows, expected {n - 1}")
            out.setdefault(p)
        return list(out)

    def to_json(self) -> dict:
        return {
            "rows": [[fmt(x) for x in r] for r in self.rows],
            "families": list(self.families),
            "profiles": [[[fmt(x) for x in r] for r in p] for p in self.profiles],
        }

    @classmethod
    def from_json(cls, data: dict) -> ReportSpace:
        return cls(
            tuple(_row(r) for r in data.get("rows", ())),
            tuple(data.get("families", FAMILIES)),
            tuple(tuple(_row(r) for r in p) for p in data.get("profiles", ())),
        )


@dataclass(frozen=True)
class AuditReport:
    agent: int
    truth: Row
    misreport: Row
    honest_worst: Fraction
    honest_best: Fraction
    misreport_worst: Fraction
    misreport_best: Fraction
    # opponent profiles attaining each extreme (first in enumeration order)
    profiles: dict = field(default_factory=dict, compare=False)

    @property
    def worst_witness(self) -> bool:
        return self.misreport_worst > self.honest_worst

    @property
    def best_witness(self) -> bool:
        return self.misreport_best > self.honest_best

    @property
    def verdict(self) -> str:
        if self.worst_witness:
            return "om-witness-worst"
        if self.best_witness:
            return "om-witness-best"
        return "grid-nom"

    @property
    def is_witness(self) -> bool:
        return self.worst_witness or self.best_witness

    def to_json(self) -> dict:
        def prof(p):
            return [[fmt(x) for x in r] for r in p]

        return {
            "agent": self.agent + 1,
            "truth": [fmt(x) for x in self.truth],
            "misreport": [fmt(x) for x in self.misreport],
            "honest_worst": fmt(self.honest_worst),
            "honest_best": fmt(self.honest_best),
            "misreport_worst": fmt(self.misreport_worst),
            "misreport_best": fmt(self.misreport_best),
            "worst_witness": self.worst_witness,
            "best_witness": self.best_witness,
            "verdict": self.verdict,
            "profiles": {k: prof(p) for k, p in self.profiles.items()},
        }


OutcomeFn = Callable[[Instance, int], Outcome]


def deterministic_outcome(mech: Callable[[Instance], IntegralAllocation]) -> OutcomeFn:
    def outcome(inst: Instance, i: int) -> Outcome:
        own = set(mech(inst)[i])
        return tuple(Fraction(int(g in own)) for g in range(inst.m))

    return outcome


def randomized_outcome(mech: Callable[[Instance], Lottery]) -> OutcomeFn:
    def outcome(inst: Instance, i: int) -> Outcome:
        return expected_allocation(mech(inst), inst.m)[i]

    return outcome


def _assemble(i: int, report: Row, profile: Profile) -> Instance:
    rows = list(profile)
    rows.insert(i, report)
    return Instance.from_rows(rows, len(report))


def outcomes(
    outcome: OutcomeFn,
    i: int,
    report: Row,
    profiles: Sequence[Profile],
    threads: int = 1,
) -> dict[Outcome, Profile]:
    """Distinct outcomes for agent ``i`` reporting ``report``, each with the first profile producing it."""

    def run(p: Profile) -> Outcome:
        return outcome(_assemble(i, report, p), i)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, profiles))
    else:
        results = [run(p) for p in profiles]
    seen: dict[Outcome, Profile] = {}
    for p, o in zip(profiles, results):
        seen.setdefault(o, p)
    return seen


def _extremes(truth: Row, outs: dict[Outcome, Profile]):
    # iterate in first-seen order so ties keep the earliest profile
    vals = [(frac_value(truth, o), p) for o, p in outs.items()]
    lo = min(vals, key=lambda t: t[0])
    hi = max(vals, key=lambda t: t[0])
    return lo, hi


def compare(i: int, truth: Row, misreport: Row, honest: dict, other: dict) -> AuditReport:
    (hw, hwp), (hb, hbp) = _extremes(truth, honest)
    (mw, mwp), (mb, mbp) = _extremes(truth, other)
    profiles = {"honest_worst": hwp, "honest_best": hbp, "misreport_worst": mwp, "misreport_best": mbp}
    return AuditReport(i, truth, misreport, hw, hb, mw, mb, profiles)


def _audit(
    outcome: OutcomeFn,
    i: int,
    truth: Sequence,
    misreports: Sequence[Sequence],
    space: ReportSpace,
    n: int,
    cap: int | None,
    threads: int,
) -> list[AuditReport]:
    truth = _row(truth)
    if not 0 <= i < n:
        raise IndexError(f"agent {i} out of range for {n} agents")
    profiles = space.opponent_profiles(n, [truth], cap)
    honest = outcomes(outcome, i, truth, profiles, threads)
    reports = []
    for b in misreports:
        b = _row(b)
        if len(b) != len(truth):
            raise ValueError("misreport length differs from the truth")
        other = honest if b == truth else outcomes(outcome, i, b, profiles, threads)
        reports.append(compare(i, truth, b, honest, other))
    return reports


def audit_deterministic(
    mech: Callable[[Instance], IntegralAllocation],
    i: int,
    truth: Sequence,
    misreports: Sequence[Sequence],
    space: ReportSpace,
    n: int,
    cap: int | None = None,
    threads: int = 1,
) -> list[AuditReport]:
    """Worst and best utility of agent ``i`` (under ``truth``) for truthful and each misreport."""
    return _audit(deterministic_outcome(mech), i, truth, misreports, space, n, cap, threads)


def audit_randomized(
    mech: Callable[[Instance], Lottery],
    i: int,
    truth: Sequence,
    misreports: Sequence[Sequence],
    space: ReportSpace,
    n: int,
    cap: int | None = None,
    threads: int = 1,
) -> list[AuditReport]:
    """Like :func:`audit_deterministic`, with expected utility of the lottery."""
    return _audit(randomized_outcome(mech), i, truth, misreports, space, n, cap, threads)


def audit_grid(
    outcome: OutcomeFn,
    i: int,
    grid: Sequence[Sequence],
    space: ReportSpace,
    n: int,
    cap: int | None = None,
    threads: int = 1,
) -> list[AuditReport]:
    """Audit every (truth, misreport) pair drawn from ``grid``.

    Families are expanded for every grid row, so all pairs share one
    opponent space. Each report is run once against that space.
    """
    grid = list(dict.fromkeys(_row(r) for r in grid))
    profiles = space.opponent_profiles(n, grid, cap)
    check_scale(len(grid) * len(profiles), cap, "mechanism runs")
    outs = {b: outcomes(outcome, i, b, profiles, threads) for b in grid}
    return [compare(i, v, b, outs[v], outs[b]) for v in grid for b in grid if b != v]


def witnesses(reports: Iterable[AuditReport]) -> list[AuditReport]:
    return [r for r in reports if r.is_witness]
