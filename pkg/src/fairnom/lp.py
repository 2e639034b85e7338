"""Exact rational linear programming.

A dense two-phase simplex over :class:`fractions.Fraction` with Bland's
anti-cycling rule, so there are no tolerances anywhere. Infeasible programs
can additionally be given a Farkas certificate that is checked by plain
substitution, independently of the simplex code path.

The module also hosts the two Pareto-efficiency checks: ``is_fpo`` (an LP)
and ``is_po`` (exhaustive enumeration of integral allocations).
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Sequence, Union

from .core import (
    FractionalAllocation,
    Instance,
    IntegralAllocation,
    check_scale,
    frac_value,
    row_value,
)

ZERO = Fraction(0)
ONE = Fraction(1)

LE, EQ, GE = "<=", "==", ">="
_RELATIONS = {LE, EQ, GE}


class MalformedLPError(ValueError):
    pass


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[Fraction, ...]
    rel: str
    rhs: Fraction

    def __post_init__(self):
        if self.rel not in _RELATIONS:
            raise MalformedLPError(f"unknown relation {self.rel!r}")
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))
        object.__setattr__(self, "rhs", Fraction(self.rhs))

    def holds(self, x: Sequence[Fraction]) -> bool:
        lhs = sum((a * v for a, v in zip(self.coeffs, x)), ZERO)
        if self.rel == LE:
            return lhs <= self.rhs
        if self.rel == GE:
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass(frozen=True)
class LinearProgram:
    """Optimize ``objective . x`` subject to linear constraints and bounds.

    ``lower`` defaults to 0 for every variable and ``upper`` to unbounded;
    ``None`` in either position means no bound on that side.
    """

    objective: tuple[Fraction, ...]
    constraints: tuple[Constraint, ...] = ()
    lower: tuple[Fraction | None, ...] | None = None
    upper: tuple[Fraction | None, ...] | None = None
    maximize: bool = True

    def __post_init__(self):
        k = len(self.objective)
        object.__setattr__(self, "objective", tuple(Fraction(c) for c in self.objective))
        cons = tuple(c if isinstance(c, Constraint) else Constraint(*c) for c in self.constraints)
        for c in cons:
            if len(c.coeffs) != k:
                raise MalformedLPError(f"constraint has {len(c.coeffs)} coefficients, expected {k}")
        object.__setattr__(self, "constraints", cons)
        lower = self.lower if self.lower is not None else (ZERO,) * k
        upper = self.upper if self.upper is not None else (None,) * k
        if len(lower) != k or len(upper) != k:
            raise MalformedLPError("bound vectors must match the number of variables")
        lower = tuple(None if b is None else Fraction(b) for b in lower)
        upper = tuple(None if b is None else Fraction(b) for b in upper)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def all_rows(self) -> list[Constraint]:
        """Constraints followed by the bounds written as rows."""
        k = self.num_vars
        rows = list(self.constraints)
        for j in range(k):
            e = tuple(ONE if t == j else ZERO for t in range(k))
            if self.lower[j] is not None:
                rows.append(Constraint(e, GE, self.lower[j]))
            if self.upper[j] is not None:
                rows.append(Constraint(e, LE, self.upper[j]))
        return rows

    def is_feasible_point(self, x: Sequence[Fraction]) -> bool:
        return len(x) == self.num_vars and all(r.holds(x) for r in self.all_rows())

    def value(self, x: Sequence[Fraction]) -> Fraction:
        return sum((c * v for c, v in zip(self.objective, x)), ZERO)


@dataclass(frozen=True)
class LPResult:
    status: Status
    optimum: Fraction | None = None
    solution: tuple[Fraction, ...] | None = None
    pivots: int = field(default=0, compare=False)

    def __post_init__(self):
        if (self.solution is not None) != (self.status is Status.OPTIMAL):
            raise ValueError("a solution is present exactly when the status is optimal")


class _Tableau:
    """Canonical-form tableau for ``max c.z, A z = b, z >= 0`` with ``b >= 0``."""

    def __init__(self, rows, rhs, basis):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.pivots = 0

    def pivot(self, r: int, j: int) -> None:
        row = self.rows[r]
        piv = row[j]
        if piv != 1:
            inv = 1 / piv
            self.rows[r] = row = [a * inv for a in row]
            self.rhs[r] *= inv
        for s, other in enumerate(self.rows):
            if s == r:
                continue
            f = other[j]
            if f:
                self.rows[s] = [a - f * b if b else a for a, b in zip(other, row)]
                self.rhs[s] -= f * self.rhs[r]
        self.basis[r] = j
        self.pivots += 1

    def optimize(self, cost, allowed) -> str:
        """Run primal simplex with Bland's rule; returns 'optimal' or 'unbounded'."""
        while True:
            # reduced[j] = c_B . column_j - c_j ; negative means improving for max
            cb = [cost[b] for b in self.basis]
            entering = None
            for j in allowed:
                red = -cost[j]
                for c, row in zip(cb, self.rows):
                    if c and row[j]:
                        red += c * row[j]
                if red < 0:
                    entering = j
                    break
            if entering is None:
                return "optimal"
            best = None
            for r, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    ratio = self.rhs[r] / a
                    key = (ratio, self.basis[r])
                    if best is None or key < best[0]:
                        best = (key, r)
            if best is None:
                return "unbounded"
            self.pivot(best[1], entering)


def _to_standard(lp: LinearProgram):
    """Rewrite with nonnegative variables; x_j = const_j + sum(coef * y_k)."""
    maps = []  # per original variable: (const, [(k, coef), ...])
    extra_rows = []
    ny = 0
    for j in range(lp.num_vars):
        lo, up = lp.lower[j], lp.upper[j]
        if lo is not None:
            maps.append((lo, [(ny, ONE)]))
            if up is not None:
                extra_rows.append((ny, up - lo))
            ny += 1
        elif up is not None:
            maps.append((up, [(ny, -ONE)]))
            ny += 1
        else:
            maps.append((ZERO, [(ny, ONE), (ny + 1, -ONE)]))
            ny += 2
    rows = []
    for c in lp.constraints:
        coeffs = [ZERO] * ny
        rhs = c.rhs
        for j, a in enumerate(c.coeffs):
            if a:
                const, terms = maps[j]
                rhs -= a * const
                for k, f in terms:
                    coeffs[k] += a * f
        rows.append((coeffs, c.rel, rhs))
    for k, cap in extra_rows:
        coeffs = [ZERO] * ny
        coeffs[k] = ONE
        rows.append((coeffs, LE, cap))
    cost = [ZERO] * ny
    sign = ONE if lp.maximize else -ONE
    for j, cj in enumerate(lp.objective):
        if cj:
            for k, f in maps[j][1]:
                cost[k] += sign * cj * f
    return maps, rows, cost, ny


def solve(lp: LinearProgram) -> LPResult:
    """Solve exactly. The returned solution satisfies every row with exact arithmetic.

    >>> solve(LinearProgram((1,), ((((1,), "<=", 3)),))).optimum
    Fraction(3, 1)
    >>> solve(LinearProgram((1,), (((1,), ">=", 1), ((1,), "<=", 0)))).status
    <Status.INFEASIBLE: 'infeasible'>
    """
    maps, rows, cost, ny = _to_standard(lp)

    # make every right-hand side nonnegative
    flipped = []
    for coeffs, rel, rhs in rows:
        if rhs < 0:
            coeffs = [-a for a in coeffs]
            rhs = -rhs
            rel = {LE: GE, GE: LE, EQ: EQ}[rel]
        flipped.append((coeffs, rel, rhs))

    # columns: y (ny) | slack/surplus | artificial
    n_slack = sum(1 for _, rel, _ in flipped if rel != EQ)
    n_art = sum(1 for _, rel, _ in flipped if rel != LE)
    width = ny + n_slack + n_art
    t_rows, t_rhs, basis, artificial = [], [], [], []
    s_col, a_col = ny, ny + n_slack
    for coeffs, rel, rhs in flipped:
        full = list(coeffs) + [ZERO] * (width - ny)
        if rel == LE:
            full[s_col] = ONE
            basis.append(s_col)
            s_col += 1
        else:
            if rel == GE:
                full[s_col] = -ONE
                s_col += 1
            full[a_col] = ONE
            basis.append(a_col)
            artificial.append(a_col)
            a_col += 1
        t_rows.append(full)
        t_rhs.append(rhs)
    tab = _Tableau(t_rows, t_rhs, basis)
    art = set(artificial)

    if art:
        phase1 = [ZERO] * width
        for a in art:
            phase1[a] = -ONE
        tab.optimize(phase1, range(width))
        infeas = sum((tab.rhs[r] for r, b in enumerate(tab.basis) if b in art), ZERO)
        if infeas > 0:
            return LPResult(Status.INFEASIBLE, pivots=tab.pivots)
        # drive remaining (zero-level) artificials out of the basis
        r = 0
        while r < len(tab.rows):
            if tab.basis[r] in art:
                col = next((j for j in range(width) if j not in art and tab.rows[r][j] != 0), None)
                if col is None:
                    del tab.rows[r], tab.rhs[r], tab.basis[r]
                    continue
                tab.pivot(r, col)
            r += 1

    full_cost = cost + [ZERO] * (width - ny)
    allowed = [j for j in range(width) if j not in art]
    if tab.optimize(full_cost, allowed) == "unbounded":
        return LPResult(Status.UNBOUNDED, pivots=tab.pivots)

    y = [ZERO] * width
    for r, b in enumerate(tab.basis):
        y[b] = tab.rhs[r]
    x = []
    for const, terms in maps:
        x.append(const + sum((f * y[k] for k, f in terms), ZERO))
    x = tuple(x)
    return LPResult(Status.OPTIMAL, lp.value(x), x, tab.pivots)


@dataclass(frozen=True)
class FarkasCertificate:
    """Multipliers, one per row of ``lp.all_rows()``, proving infeasibility."""

    multipliers: tuple[Fraction, ...]

    def to_json(self) -> list[str]:
        from .core import fmt

        return [fmt(x) for x in self.multipliers]


def verify_certificate(lp: LinearProgram, cert: FarkasCertificate) -> bool:
    """Check ``sum(l_r a_r) = 0`` and ``sum(l_r b_r) > 0`` with sign-correct ``l``.

    If both hold the system has no solution: any feasible ``x`` would give
    ``0 = sum(l_r a_r.x) >= sum(l_r b_r) > 0``.
    """
    rows = lp.all_rows()
    lam = cert.multipliers
    if len(lam) != len(rows):
        return False
    for l, r in zip(lam, rows):
        if r.rel == GE and l < 0:
            return False
        if r.rel == LE and l > 0:
            return False
    for j in range(lp.num_vars):
        if sum((l * r.coeffs[j] for l, r in zip(lam, rows)), ZERO) != 0:
            return False
    return sum((l * r.rhs for l, r in zip(lam, rows)), ZERO) > 0


def farkas_certificate(lp: LinearProgram) -> FarkasCertificate | None:
    """Find an infeasibility certificate, or ``None`` if the LP is feasible."""
    rows = lp.all_rows()
    k = len(rows)
    lower = tuple(ZERO if r.rel == GE else None for r in rows)
    upper = tuple(ZERO if r.rel == LE else None for r in rows)
    cons = []
    for j in range(lp.num_vars):
        cons.append(Constraint(tuple(r.coeffs[j] for r in rows), EQ, ZERO))
    rhs = tuple(r.rhs for r in rows)
    cons.append(Constraint(rhs, LE, ONE))
    res = solve(LinearProgram(rhs, tuple(cons), lower, upper, maximize=True))
    if res.status is not Status.OPTIMAL or res.optimum <= 0:
        return None
    cert = FarkasCertificate(res.solution)
    assert verify_certificate(lp, cert)
    return cert


# -- Pareto efficiency -----------------------------------------------------

Allocation = Union[IntegralAllocation, FractionalAllocation]


def _current_utilities(inst: Instance, alloc: Allocation) -> list[Fraction]:
    if isinstance(alloc, IntegralAllocation):
        alloc.validate(inst)
        return [row_value(inst.values[i], alloc[i]) for i in range(inst.n)]
    return [frac_value(inst.values[i], alloc[i]) for i in range(inst.n)]


def fpo_program(inst: Instance, alloc: Allocation, alpha: Fraction = ONE):
    """LP over X' maximizing ``sum_i alpha v_i(X'_i)`` with ``alpha v_i(X'_i) >= v_i(X_i)``.

    Variables for zero-valued (agent, item) pairs are omitted: they enter no
    constraint except item capacity, where leaving them at zero is harmless.
    """
    alpha = Fraction(alpha)
    cur = _current_utilities(inst, alloc)
    var = [(i, j) for i in range(inst.n) for j in range(inst.m) if inst.values[i][j] > 0]
    k = len(var)
    cons = []
    for j in range(inst.m):
        coeffs = tuple(ONE if g == j else ZERO for _, g in var)
        if any(coeffs):
            cons.append(Constraint(coeffs, LE, ONE))
    for i in range(inst.n):
        coeffs = tuple(alpha * inst.values[a][g] if a == i else ZERO for a, g in var)
        cons.append(Constraint(coeffs, GE, cur[i]))
    objective = tuple(alpha * inst.values[a][g] for a, g in var)
    return LinearProgram(objective, tuple(cons), (ZERO,) * k, None, True), sum(cur, ZERO)


def is_fpo(inst: Instance, alloc: Allocation, alpha=ONE) -> bool:
    """Fractional (alpha-)Pareto efficiency.

    True iff no fractional allocation meets ``alpha * v_i(X'_i) >= v_i(X_i)``
    for every agent with one inequality strict; detected by maximizing the
    total slack of those inequalities.
    """
    lp, baseline = fpo_program(inst, alloc, alpha)
    res = solve(lp)
    if res.status is Status.INFEASIBLE:
        return True
    if res.status is Status.UNBOUNDED:  # pragma: no cover - capacities bound every variable
        return False
    return res.optimum <= baseline


def complete_allocations(n: int, m: int, cap: int | None = None):
    """All ``n ** m`` complete allocations, as owner vectors in lexicographic order."""
    check_scale(n**m, cap)
    return itertools.product(range(n), repeat=m)


def scaled_rows(inst: Instance) -> list[list[int]]:
    """Integer matrix equal to the values times one common denominator."""
    d = 1
    for row in inst.values:
        for v in row:
            d = lcm(d, v.denominator)
    return [[int(v * d) for v in row] for row in inst.values]


def is_po(inst: Instance, alloc: IntegralAllocation, alpha=ONE, cap: int | None = None) -> bool:
    """Integral (alpha-)Pareto efficiency by exhaustive enumeration."""
    alpha = Fraction(alpha)
    alloc.validate(inst)
    vals = scaled_rows(inst)
    cur = [sum(vals[i][g] for g in alloc[i]) for i in range(inst.n)]
    an, ad = alpha.numerator, alpha.denominator
    for owners in complete_allocations(inst.n, inst.m, cap):
        u = [0] * inst.n
        for g, o in enumerate(owners):
            u[o] += vals[o][g]
        # alpha * u_i >= cur_i  <=>  an * u_i >= ad * cur_i
        if all(an * u[i] >= ad * cur[i] for i in range(inst.n)) and any(
            an * u[i] > ad * cur[i] for i in range(inst.n)
        ):
            return False
    return True
