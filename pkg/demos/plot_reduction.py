"""
Wrapping an EF1 algorithm
=========================

``mechanism_one`` turns any clean, non-wasteful EF1 algorithm into one that
resists obvious manipulation. Every allocation an agent can end up with is
reachable by some choice of opponent reports.
"""

from fairnom import ef1_set, exhaustive_inner, mechanism_one, realize_allocation
from fairnom.reduction import assemble, check_lemma54

v = [2, 1, 1]
members = ef1_set(0, v, 2)
print(len(members), "possible outcomes for agent 0")

for alloc in members:
    others = realize_allocation(0, v, alloc)
    got = mechanism_one(assemble(0, v, others), exhaustive_inner)
    assert got == alloc
    print(alloc.bundles, "<- opponent reports", [[str(x) for x in r] for r in others])

# reporting anything else cannot raise the guaranteed value
res = check_lemma54(0, v, [3, 0, 0], 2)
print("truthful worst:", res.worst_truthful, " worst after lying:", res.worst_other)
