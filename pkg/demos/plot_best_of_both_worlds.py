"""
Fair in expectation, efficient in every outcome
===============================================

Is there a lottery over efficient allocations whose expectation is
proportional? The answer is an exact LP, with a certificate when it is no.
"""

from fairnom import Instance, bobw_feasible

inst = Instance.from_rows([[0, 1], [1, 2]])
for rule in ("po-max-count", "leximin", "mnw"):
    rep = bobw_feasible(inst, rule, "prop")
    print(f"{rule:>13}: feasible={rep.feasible}  certificate verified={rep.certificate_ok()}")
    print("               multipliers:", rep.certificate.to_json())

# with opposed tastes a single allocation already works
rep = bobw_feasible(Instance.from_rows([[2, 1], [1, 2]]), "mnw", "ef")
print("opposed tastes:", rep.feasible, rep.lottery.support[0][1].bundles)
