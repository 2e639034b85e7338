"""Exact fair division of indivisible goods and obvious-manipulability audits."""

from .audit import AuditReport, ReportSpace, audit_deterministic, audit_grid, audit_randomized
from .bobw import FeasibilityReport, bobw_feasible
from .checkers import (
    EnvyReport,
    clean,
    is_clean,
    is_complete,
    is_ef,
    is_ef1,
    is_ef1_for_agent,
    is_non_wasteful,
    is_prop,
)
from .core import (
    FairnomError,
    FractionalAllocation,
    Instance,
    IntegralAllocation,
    InvalidAllocationError,
    Lottery,
    NormalizationError,
    ScaleError,
    expected_allocation,
    normalize,
    utility,
)
from .lottery import birkhoff, probabilistic_serial, ps_lottery, sample
from .lp import LinearProgram, farkas_certificate, is_fpo, is_po, solve
from .mechanisms import (
    TieBreak,
    deterministic,
    leximin,
    max_egalitarian,
    max_nash,
    max_positive_count,
    max_utilitarian,
    round_robin,
    round_robin_worst_best,
    uniform_randomized,
    utilitarian_lottery,
)
from .reduction import check_lemma54, ef1_set, exhaustive_inner, mechanism_one, realize_allocation
from .scenarios import scenario

__version__ = "0.1.0"
