"""
Obvious manipulations of welfare maximizers
===========================================

An agent compares the worst outcome it can get by telling the truth with the
worst outcome after lying. For the Nash-welfare maximizer, lying helps.
"""

from fairnom import ReportSpace, audit_deterministic, deterministic, max_nash, round_robin
from fairnom.core import parse_row
from fairnom.scenarios import nash_space, orderings

truth = parse_row("3.9,3,2,0.9")
lie = parse_row("2,2,1,1")

# opponents report any row from a small grid of values
rep = audit_deterministic(deterministic(max_nash), 0, truth, [lie], nash_space(), n=3)[0]
print("honest worst:", rep.honest_worst, " lying worst:", rep.misreport_worst)
print("verdict:", rep.verdict)
print("opponents in the honest worst case:", rep.to_json()["profiles"]["honest_worst"])

# Round-Robin has no such lie: compare against every reordering of the values
values = parse_row("4,3,2,1")
space = ReportSpace(tuple(orderings(values)))
reps = audit_deterministic(round_robin, 1, values, orderings(values), space, n=2)
print("Round-Robin witnesses:", sum(r.is_witness for r in reps), "of", len(reps))
