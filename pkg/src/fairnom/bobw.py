"""Existence of lotteries that are fair ex ante and efficient ex post.

The ex-post predicate fixes a finite set of integral allocations; a lottery
over that set is ex-ante fair when its expected allocation satisfies PROP
(or EF). Both conditions are linear in the probabilities, so existence is an
exact LP feasibility question. Infeasibility comes with a Farkas certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import Instance, IntegralAllocation, Lottery, row_value
from .lp import (
    EQ,
    GE,
    Constraint,
    FarkasCertificate,
    LinearProgram,
    Status,
    farkas_certificate,
    solve,
    verify_certificate,
)
from .mechanisms import leximin, max_nash, po_max_egalitarian, po_max_positive_count

EXPOST = {
    "po-max-count": po_max_positive_count,
    "leximin": leximin,
    "mnw": max_nash,
    "po-egal": po_max_egalitarian,
}
EXANTE = ("prop", "ef")


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    support: tuple[IntegralAllocation, ...]  # allocations meeting the ex-post predicate
    program: LinearProgram
    lottery: Lottery | None = None
    certificate: FarkasCertificate | None = None

    def certificate_ok(self) -> bool:
        return self.certificate is not None and verify_certificate(self.program, self.certificate)

    def to_json(self) -> dict:
        return {
            "feasible": self.feasible,
            "expost_allocations": [a.to_json() for a in self.support],
            "lottery": None if self.lottery is None else self.lottery.to_json(),
            "certificate": None if self.certificate is None else self.certificate.to_json(),
        }


def fairness_program(inst: Instance, allocs: list[IntegralAllocation], exante: str) -> LinearProgram:
    """Variables are the probabilities of ``allocs``; the objective is zero."""
    if exante not in EXANTE:
        raise ValueError(f"unknown ex-ante notion {exante!r}; expected one of {EXANTE}")
    k, n = len(allocs), inst.n
    cons = [Constraint((Fraction(1),) * k, EQ, Fraction(1))]
    for i in range(n):
        row = inst.values[i]
        own = tuple(row_value(row, a[i]) for a in allocs)
        if exante == "prop":
            cons.append(Constraint(own, GE, sum(row, Fraction(0)) / n))
        else:
            for j in range(n):
                if j != i:
                    diff = tuple(o - row_value(row, a[j]) for o, a in zip(own, allocs))
                    cons.append(Constraint(diff, GE, Fraction(0)))
    return LinearProgram((Fraction(0),) * k, tuple(cons))


def bobw_feasible(inst: Instance, expost: str, exante: str, cap: int | None = None) -> FeasibilityReport:
    """Is there a lottery over ``expost``-allocations that is ``exante``-fair in expectation?

    >>> rep = bobw_feasible(Instance.from_rows([[1, 2]]), "mnw", "prop")
    >>> rep.feasible, rep.lottery.support[0][1].bundles
    (True, ((0, 1),))
    """
    if expost not in EXPOST:
        raise ValueError(f"unknown ex-post predicate {expost!r}; expected one of {tuple(EXPOST)}")
    allocs = EXPOST[expost](inst, cap)
    lp = fairness_program(inst, allocs, exante)
    res = solve(lp)
    if res.status is Status.OPTIMAL:
        pairs = [(p, a) for p, a in zip(res.solution, allocs) if p > 0]
        return FeasibilityReport(True, tuple(allocs), lp, lottery=Lottery.merged(pairs))
    cert = farkas_certificate(lp)
    return FeasibilityReport(False, tuple(allocs), lp, certificate=cert)
