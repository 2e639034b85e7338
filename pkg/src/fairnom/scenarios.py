"""Pinned instances and report spaces reproducing the manipulability results.

Each scenario runs an audit (or a feasibility check) and compares the exact
numbers with the expected ones. Scenario names are stable identifiers used by
the command line.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import partial

from .audit import (
    AuditReport,
    ReportSpace,
    audit_grid,
    audit_randomized,
    deterministic_outcome,
    randomized_outcome,
    witnesses,
)
from .bobw import FeasibilityReport, bobw_feasible
from .core import Instance, fmt, parse_row
from .lottery import ps_lottery
from .mechanisms import (
    TieBreak,
    deterministic,
    max_egalitarian,
    max_nash,
    max_positive_count,
    max_utilitarian,
    round_robin,
    round_robin_worst_best,
    uniform_randomized,
    utilitarian_lottery,
)

EPS = Fraction(1, 100)
ONE_THIRD = Fraction(1, 3)


@dataclass(frozen=True)
class ScenarioResult:
    name: str
    summary: str
    outcome: str  # "om-witness", "grid-nom", "infeasible"
    checks: tuple[tuple[str, bool], ...]
    reports: tuple[AuditReport | FeasibilityReport, ...]

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks)

    def to_json(self) -> dict:
        return {
            "scenario": self.name,
            "summary": self.summary,
            "outcome": self.outcome,
            "passed": self.passed,
            "checks": [{"check": c, "ok": ok} for c, ok in self.checks],
            "reports": [r.to_json() for r in self.reports],
        }


def normalized(row) -> tuple[Fraction, ...]:
    s = sum(row, Fraction(0))
    return tuple(Fraction(x) / s for x in row)


def normalized_grid(levels, m: int) -> list[tuple[Fraction, ...]]:
    """Distinct normalized nonzero rows with entries drawn from ``levels``."""
    levels = [Fraction(x) for x in levels]
    rows = (r for r in itertools.product(levels, repeat=m) if any(r))
    return sorted(set(normalized(r) for r in rows))


def orderings(values) -> list[tuple[Fraction, ...]]:
    """All distinct rearrangements of ``values``."""
    return sorted(set(itertools.permutations(Fraction(x) for x in values)))


def _units(m: int):
    return [tuple(Fraction(int(g == h)) for h in range(m)) for g in range(m)]


# -- round robin and PS-Lottery ---------------------------------------------


def _round_robin() -> ScenarioResult:
    n, truth = 2, parse_row("4,3,2,1")
    perms = orderings(truth)
    space = ReportSpace(tuple(perms))
    outcome = deterministic_outcome(round_robin)
    reports, checks = [], []
    for i in range(n):
        reps = [r for r in audit_grid(outcome, i, perms + _units(4), space, n) if r.truth == truth]
        worst, best = round_robin_worst_best(truth, i + 1, n)
        checks.append((f"agent {i + 1} honest worst = {fmt(worst)}", reps[0].honest_worst == worst))
        checks.append((f"agent {i + 1} honest best = {fmt(best)}", reps[0].honest_best == best))
        checks.append((f"agent {i + 1} no misreport witness", not witnesses(reps)))
        reports.extend(witnesses(reps) or reps[:1])
    return ScenarioResult("thm3.1", "Round-Robin over all report orderings", "grid-nom", tuple(checks), tuple(reports))


def _ps_best(truth, n: int) -> Fraction:
    vals = sorted(truth, reverse=True)
    m = len(vals)
    q, frac = divmod(Fraction(m, n), 1)
    q = int(q)
    return sum(vals[:q], Fraction(0)) + (frac * vals[q] if q < m else 0)


def _ps_lottery_nom() -> ScenarioResult:
    n, truth = 2, parse_row("3,2,1")
    perms = orderings(truth)
    space = ReportSpace(tuple(perms))
    reps = [r for r in audit_grid(randomized_outcome(ps_lottery), 0, perms + _units(3), space, n) if r.truth == truth]
    best = _ps_best(truth, n)
    checks = (
        (f"honest best = {fmt(best)}", reps[0].honest_best == best),
        (f"honest worst >= {fmt(sum(truth) / n)}", reps[0].honest_worst >= sum(truth) / n),
        ("no misreport witness", not witnesses(reps)),
    )
    return ScenarioResult("thm3.4", "PS-Lottery, two agents, three items", "grid-nom", checks, tuple(witnesses(reps) or reps[:1]))


def _ps_proportional() -> ScenarioResult:
    n = 3
    truths = [parse_row("3,2,1"), parse_row("1,1,1"), parse_row("5,0,1")]
    space = ReportSpace(tuple(r for t in truths for r in orderings(t)))
    reports, checks = [], []
    for t in truths:
        rep = audit_randomized(ps_lottery, 0, t, [t], space, n)[0]
        share = sum(t) / n
        checks.append((f"truth {','.join(map(fmt, t))}: honest worst >= {fmt(share)}", rep.honest_worst >= share))
        reports.append(rep)
    return ScenarioResult("lemma3.3", "ex-ante proportional lotteries keep the worst case", "grid-nom", tuple(checks), tuple(reports))


# -- welfare maximizers --------------------------------------------------------

TWO_AGENT_TRUTH = (2 * ONE_THIRD + EPS, ONE_THIRD - EPS)
FAVOURITE_ONLY = (Fraction(1), Fraction(0))


def _two_agent_audit(outcome, space: ReportSpace) -> AuditReport:
    return audit_grid(outcome, 0, [TWO_AGENT_TRUTH, FAVOURITE_ONLY], space, 2)[0]


def _utilitarian_two() -> ScenarioResult:
    # normalization rejects all-zero reports, so that family is left out
    space = ReportSpace(tuple(normalized_grid(range(4), 2)), ("same-order", "opposite-order", "unit"))
    lot = _two_agent_audit(randomized_outcome(utilitarian_lottery), space)
    det = _two_agent_audit(deterministic_outcome(max_utilitarian), space)
    checks = (
        ("honest worst <= 1/3 - eps", lot.honest_worst <= ONE_THIRD - EPS and det.honest_worst <= ONE_THIRD - EPS),
        ("lottery misreport worst >= 1/3 + eps/2", lot.misreport_worst >= ONE_THIRD + EPS / 2),
        ("deterministic misreport worst >= 2/3 + eps", det.misreport_worst >= 2 * ONE_THIRD + EPS),
        ("both paths are worst-case witnesses", lot.worst_witness and det.worst_witness),
    )
    return ScenarioResult("thm4.1", "utilitarian, two agents", "om-witness", checks, (lot, det))


def _theorem42_grid() -> ScenarioResult:
    n = 3
    grid = normalized_grid((0, 1, 2), 3)
    space = ReportSpace(tuple(grid), families=())
    outcome = deterministic_outcome(partial(max_utilitarian, tie=TieBreak.THEOREM42))
    reports, checks = [], []
    for i in range(n):
        reps = audit_grid(outcome, i, grid, space, n)
        checks.append((f"agent {i + 1}: no witness among {len(reps)} pairs", not witnesses(reps)))
        reports.extend(witnesses(reps))
    return ScenarioResult("thm4.2-nom", "utilitarian with the first/last tie rule, three agents", "grid-nom", tuple(checks), tuple(reports))


EGAL_TRUTH = parse_row("0.3,0.3,0.3,0.1")
EGAL_MISREPORT = normalized((1, 1, 1, 0))


def egalitarian_space() -> ReportSpace:
    rows = normalized_grid((0, 1, 2), 4) + [parse_row("0.05,0.05,0.9,0")]
    return ReportSpace(tuple(rows))


def _egalitarian() -> ScenarioResult:
    rep = audit_grid(deterministic_outcome(deterministic(max_egalitarian)), 0, [EGAL_TRUTH, EGAL_MISREPORT], egalitarian_space(), 3)[0]
    checks = (
        ("honest worst = 1/10", rep.honest_worst == Fraction(1, 10)),
        ("misreport worst = 3/10", rep.misreport_worst == Fraction(3, 10)),
        ("worst-case witness", rep.worst_witness),
    )
    return ScenarioResult("thm4.3", "egalitarian, three agents, four items", "om-witness", checks, (rep,))


NASH_TRUTH = parse_row("3.9,3,2,0.9")
NASH_MISREPORT = parse_row("2,2,1,1")


def nash_space() -> ReportSpace:
    rows = sorted(
        tuple(Fraction(x) for x in r)
        for r in itertools.product(range(3), repeat=4)
        if 1 <= sum(1 for x in r if x) <= 2
    )
    return ReportSpace(tuple(rows) + (parse_row("0,1,0,0"), parse_row("2,0,0,1")))


def _nash() -> ScenarioResult:
    rep = audit_grid(deterministic_outcome(deterministic(max_nash)), 0, [NASH_TRUTH, NASH_MISREPORT], nash_space(), 3)[0]
    checks = (
        ("honest worst = 2", rep.honest_worst == 2),
        ("misreport worst > 2", rep.misreport_worst > 2),
    )
    return ScenarioResult("thm4.4", "Nash welfare, three agents, four items", "om-witness", checks, (rep,))


def _positive_count() -> ScenarioResult:
    space = ReportSpace(tuple(normalized_grid(range(4), 2)))
    lot = _two_agent_audit(randomized_outcome(uniform_randomized(max_positive_count)), space)
    det = _two_agent_audit(deterministic_outcome(deterministic(max_positive_count)), space)
    checks = (
        ("honest worst <= 1/3 - eps", lot.honest_worst <= ONE_THIRD - EPS and det.honest_worst <= ONE_THIRD - EPS),
        ("lottery misreport worst >= 1/3 + eps/2", lot.misreport_worst >= ONE_THIRD + EPS / 2),
        ("both paths are worst-case witnesses", lot.worst_witness and det.worst_witness),
    )
    return ScenarioResult("thm6.1", "maximum number of positive agents, two agents", "om-witness", checks, (lot, det))


# -- best of both worlds ---------------------------------------------------------

BOBW_PREDICATES = ("po-max-count", "leximin", "mnw")


def search_bobw_witness(levels=range(4), predicates=BOBW_PREDICATES, exante: str = "prop") -> Instance | None:
    """First 2x2 instance (rows in lexicographic order) infeasible for every predicate."""
    rows = [r for r in itertools.product([Fraction(x) for x in levels], repeat=2) if any(r)]
    for r1, r2 in itertools.product(rows, repeat=2):
        inst = Instance.from_rows([r1, r2])
        if all(not bobw_feasible(inst, p, exante).feasible for p in predicates):
            return inst
    return None


# found by search_bobw_witness() and pinned here
BOBW_WITNESS = Instance.from_rows([[0, 1], [1, 2]])


def _bobw() -> ScenarioResult:
    reports = tuple(bobw_feasible(BOBW_WITNESS, p, "prop") for p in BOBW_PREDICATES)
    checks = tuple(
        (f"{p}: infeasible with a valid certificate", (not r.feasible) and r.certificate_ok())
        for p, r in zip(BOBW_PREDICATES, reports)
    )
    return ScenarioResult("thm6.2", "ex-ante PROP with ex-post efficiency, two agents", "infeasible", checks, reports)


SCENARIOS = {
    "thm3.1": _round_robin,
    "lemma3.3": _ps_proportional,
    "thm3.4": _ps_lottery_nom,
    "thm4.1": _utilitarian_two,
    "thm4.2-nom": _theorem42_grid,
    "thm4.3": _egalitarian,
    "thm4.4": _nash,
    "thm6.1": _positive_count,
    "thm6.2": _bobw,
}


def scenario(name: str) -> ScenarioResult:
    try:
        run = SCENARIOS[name]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; expected one of {sorted(SCENARIOS)}") from None
    return run()
