"""
Round-Robin and Probabilistic Serial
====================================

Two ways to split goods fairly, computed exactly with fractions.
"""

from fractions import Fraction

from fairnom import Instance, expected_allocation, is_ef, is_ef1, probabilistic_serial, ps_lottery, round_robin
from fairnom.core import fmt

inst = Instance.from_rows([[4, 3, 2, 1], [4, 1, 3, 2], [1, 2, 3, 4]])

# Round-Robin: agents pick their favourite remaining item in turn
rr = round_robin(inst)
print("round robin:", rr.bundles, "EF1:", bool(is_ef1(inst, rr)))

# Probabilistic Serial: everyone eats their favourite item at unit speed
frac, schedule = probabilistic_serial(inst)
for i, shares in enumerate(frac.shares):
    print(f"agent {i}:", [fmt(x) for x in shares])
print("PS is envy-free:", bool(is_ef(inst, frac)))

# the same shares as a lottery over EF1 integral allocations
lot = ps_lottery(inst)
for p, alloc in lot.support:
    print(f"  {fmt(p):>5}  {alloc.bundles}")
assert expected_allocation(lot, inst.m) == frac
assert sum(p for p, _ in lot.support) == Fraction(1)
