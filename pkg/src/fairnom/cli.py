"""Command line: ``fairnom <subcommand> ...``; JSON on standard output.

Exit codes: 0 success or a true verdict, 1 a false verdict (witness found,
property violated, infeasible), 2 an error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from fractions import Fraction
from functools import partial
from typing import Sequence

from . import audit as audit_mod
from .bobw import EXANTE, EXPOST, bobw_feasible
from .checkers import is_clean, is_complete, is_ef, is_ef1, is_non_wasteful, is_prop
from .core import (
    ENUM_CAP_ENV,
    FairnomError,
    Instance,
    IntegralAllocation,
    fmt,
    load_json,
    parse_row,
    to_fraction,
)
from .lottery import birkhoff, probabilistic_serial, ps_lottery, sample
from .lp import is_fpo, is_po
from .mechanisms import (
    SET_RULES,
    TieBreak,
    deterministic,
    max_utilitarian,
    round_robin,
    uniform_randomized,
    utilitarian_lottery,
)
from .reduction import assemble, check_lemma54, ef1_set, exhaustive_inner, mechanism_one, realize_allocation
from .scenarios import SCENARIOS, scenario

DETERMINISTIC = ("round-robin", "utilitarian", "util", "egal", "nash", "leximin", "max-count", "reduction")
RANDOMIZED = ("utilitarian-lottery", "ps-lottery", "uniform-egal", "uniform-nash", "uniform-leximin", "uniform-max-count")
MECHANISMS = DETERMINISTIC + RANDOMIZED + ("ps",)
PROPERTIES = ("ef", "prop", "ef1", "clean", "non-wasteful", "complete", "fpo", "po")


class UsageError(FairnomError):
    pass


def _deterministic(name: str, tie: str, order=None):
    if name == "round-robin":
        return partial(round_robin, order=order)
    if name in ("utilitarian", "util"):
        return partial(max_utilitarian, tie=TieBreak(tie))
    if name == "reduction":
        return partial(mechanism_one, inner=exhaustive_inner)
    return deterministic(SET_RULES[name])


def _randomized(name: str):
    if name == "utilitarian-lottery":
        return utilitarian_lottery
    if name == "ps-lottery":
        return ps_lottery
    return uniform_randomized(SET_RULES[name.removeprefix("uniform-")])


def _instance(path: str) -> Instance:
    return Instance.from_json(load_json(path))


def _allocation(args, inst_data: dict) -> IntegralAllocation:
    if args.allocation:
        return IntegralAllocation.from_json(load_json(args.allocation))
    if "allocation" in inst_data:
        return IntegralAllocation.from_json(inst_data["allocation"])
    raise UsageError("no allocation given: pass --allocation or an 'allocation' key in the instance")


# -- subcommands ---------------------------------------------------------------


def cmd_solve(args) -> tuple[dict, int]:
    inst = _instance(args.instance)
    name = args.mechanism
    if name == "ps":
        frac, sched = probabilistic_serial(inst)
        return {"mechanism": name, "fractional": frac.to_json(), "schedule": sched.to_json()}, 0
    if name in DETERMINISTIC:
        order = None
        if args.order:
            order = [int(a) - 1 for a in args.order.split(",")]
            if name != "round-robin":
                raise UsageError("--order only applies to round-robin")
        alloc = _deterministic(name, args.tie, order)(inst)
        return {"mechanism": name, "allocation": alloc.to_json()}, 0
    lot = _randomized(name)(inst)
    out = {"mechanism": name}
    if args.seed is None or args.full_lottery:
        out["lottery"] = lot.to_json()
    if args.seed is not None:
        out["seed"] = args.seed
        out["sample"] = sample(lot, args.seed).to_json()
    return out, 0


def cmd_check(args) -> tuple[dict, int]:
    data = load_json(args.instance)
    inst = Instance.from_json(data)
    alloc = _allocation(args, data)
    alloc.validate(inst)
    prop = args.property
    witness = None
    if prop in ("ef", "prop", "ef1"):
        rep = {"ef": is_ef, "prop": is_prop, "ef1": is_ef1}[prop](inst, alloc)
        ok, witness = rep.ok, rep.to_json()["witness"]
    elif prop == "clean":
        ok = is_clean(inst, alloc)
    elif prop == "non-wasteful":
        ok = is_non_wasteful(inst, alloc)
    elif prop == "complete":
        ok = is_complete(alloc, inst.m)
    elif prop == "fpo":
        ok = is_fpo(inst, alloc, to_fraction(args.alpha))
    else:
        ok = is_po(inst, alloc, to_fraction(args.alpha), args.cap)
    return {"property": prop, "holds": ok, "witness": witness}, 0 if ok else 1


def _space(args) -> tuple[audit_mod.ReportSpace, int | None]:
    if not args.space:
        return audit_mod.ReportSpace(), None
    data = load_json(args.space)
    return audit_mod.ReportSpace.from_json(data), data.get("agents")


def cmd_audit(args) -> tuple[dict, int]:
    space, agents = _space(args)
    n = args.agents or agents
    if not n:
        raise UsageError("number of agents unknown: pass --agents or an 'agents' key in the space")
    truth = parse_row(args.truth)
    misreports = [parse_row(b) for b in args.misreport] or [truth]
    i = args.agent - 1
    if args.mechanism in DETERMINISTIC:
        reps = audit_mod.audit_deterministic(
            _deterministic(args.mechanism, args.tie), i, truth, misreports, space, n, args.cap, args.threads
        )
    elif args.mechanism in RANDOMIZED:
        reps = audit_mod.audit_randomized(
            _randomized(args.mechanism), i, truth, misreports, space, n, args.cap, args.threads
        )
    else:
        raise UsageError(f"mechanism {args.mechanism!r} cannot be audited")
    witness = any(r.is_witness for r in reps)
    return {"mechanism": args.mechanism, "reports": [r.to_json() for r in reps]}, 1 if witness else 0


def cmd_reproduce(args) -> tuple[dict, int]:
    names = sorted(SCENARIOS) if args.all else [args.scenario]
    results = [scenario(nm) for nm in names]
    if args.all:
        code = 0 if all(r.passed for r in results) else 2
        return {"scenarios": [r.to_json() for r in results]}, code
    r = results[0]
    if not r.passed:
        return r.to_json(), 2
    return r.to_json(), 0 if r.outcome == "grid-nom" else 1


def cmd_decompose(args) -> tuple[dict, int]:
    data = load_json(args.matrix)
    mat = data["matrix"] if isinstance(data, dict) else data
    mat = [[to_fraction(x) for x in row] for row in mat]
    terms = birkhoff(mat)
    return {
        "terms": [{"weight": fmt(w), "permutation": [c + 1 for c in perm]} for w, perm in terms],
    }, 0


def _grid_rows(data: dict) -> list[tuple[Fraction, ...]]:
    if "rows" in data:
        return [tuple(to_fraction(x) for x in r) for r in data["rows"]]
    levels = [to_fraction(x) for x in data["levels"]]
    return list(itertools.product(levels, repeat=int(data["items"])))


def cmd_verify(args) -> tuple[dict, int]:
    data = load_json(args.grid)
    n = int(data["agents"])
    rows = _grid_rows(data)
    agents = range(n) if args.agent is None else [args.agent - 1]
    if args.lemma == "5.4":
        checked, violations, swaps, swap_failures = 0, [], 0, 0
        for i in agents:
            for v in rows:
                for v2 in rows:
                    res = check_lemma54(i, v, v2, n, args.cap)
                    checked += 1
                    if not res.holds:
                        violations.append(
                            {"agent": i + 1, "v": [fmt(x) for x in v], "v2": [fmt(x) for x in v2]}
                        )
                    if res.swap is not None:
                        swaps += 1
                        swap_failures += not res.swap_ok
        out = {
            "lemma": "5.4",
            "pairs": checked,
            "violations": violations,
            "swap_constructions": swaps,
            "swap_failures": swap_failures,
        }
        return out, 1 if violations else 0
    checked, failures = 0, []
    for i in agents:
        for v in rows:
            for a in ef1_set(i, v, n, cap=args.cap):
                others = realize_allocation(i, v, a)
                got = mechanism_one(assemble(i, v, others), exhaustive_inner)
                checked += 1
                if got != a:
                    failures.append({"agent": i + 1, "v": [fmt(x) for x in v], "target": a.to_json()})
    return {"lemma": "5.3", "allocations": checked, "failures": failures}, 1 if failures else 0


def cmd_bobw(args) -> tuple[dict, int]:
    inst = _instance(args.instance)
    rep = bobw_feasible(inst, args.expost, args.exante, args.cap)
    out = rep.to_json()
    out["certificate_verified"] = rep.certificate_ok() if not rep.feasible else None
    return out, 0 if rep.feasible else 1


# -- parser ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="indented, human-readable output")
    common.add_argument("--threads", type=int, default=1, help="worker cap for audits")
    common.add_argument("--seed", type=int, default=None, help="seed for sampling")
    common.add_argument(
        "--cap", type=int, default=None, help=f"enumeration cap (default from ${ENUM_CAP_ENV})"
    )

    p = argparse.ArgumentParser(prog="fairnom", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="run a mechanism on an instance")
    s.add_argument("--mechanism", required=True, choices=MECHANISMS)
    s.add_argument("--instance", required=True)
    s.add_argument("--tie", default="smallest-index", choices=["smallest-index", "theorem42"])
    s.add_argument("--inner", default="exhaustive", choices=["exhaustive"])
    s.add_argument("--order", help="round-robin picking order, e.g. 2,1,3")
    s.add_argument("--full-lottery", action="store_true", help="print the lottery alongside a --seed sample")
    s.set_defaults(run=cmd_solve)

    s = sub.add_parser("check", parents=[common], help="test a property of an allocation")
    s.add_argument("--property", required=True, choices=PROPERTIES)
    s.add_argument("--instance", required=True)
    s.add_argument("--allocation", "--alloc", dest="allocation")
    s.add_argument("--alpha", default="1")
    s.set_defaults(run=cmd_check)

    s = sub.add_parser("audit", parents=[common], help="audit a mechanism for obvious manipulations")
    s.add_argument("--mechanism", required=True, choices=DETERMINISTIC + RANDOMIZED)
    s.add_argument("--truth", required=True)
    s.add_argument("--misreport", action="append", default=[])
    s.add_argument("--space")
    s.add_argument("--agents", type=int)
    s.add_argument("--agent", type=int, default=1)
    s.add_argument("--tie", default="smallest-index", choices=["smallest-index", "theorem42"])
    s.set_defaults(run=cmd_audit)

    s = sub.add_parser("reproduce", parents=[common], help="run pinned scenarios")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--scenario", choices=sorted(SCENARIOS))
    g.add_argument("--all", action="store_true")
    s.set_defaults(run=cmd_reproduce)

    s = sub.add_parser("decompose", parents=[common], help="Birkhoff decomposition of a bistochastic matrix")
    s.add_argument("--matrix", required=True)
    s.set_defaults(run=cmd_decompose)

    s = sub.add_parser("verify", parents=[common], help="exhaustive checks of the reduction")
    s.add_argument("--lemma", required=True, choices=["5.3", "5.4"])
    s.add_argument("--grid", required=True)
    s.add_argument("--agent", type=int)
    s.set_defaults(run=cmd_verify)

    s = sub.add_parser("bobw", parents=[common], help="ex-ante fair, ex-post efficient lottery existence")
    s.add_argument("--instance", required=True)
    s.add_argument("--expost", required=True, choices=sorted(EXPOST))
    s.add_argument("--exante", required=True, choices=EXANTE)
    s.set_defaults(run=cmd_bobw)
    return p


def _pretty(out: dict) -> str:
    if "scenarios" in out:
        lines = []
        for sc in out["scenarios"]:
            mark = "PASS" if sc["passed"] else "FAIL"
            lines.append(f"{mark}  {sc['scenario']:<11} {sc['outcome']:<11} {sc['summary']}")
        return "\n".join(lines)
    return json.dumps(out, indent=2)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        out, code = args.run(args)
    except (FairnomError, ValueError, TypeError, KeyError, IndexError, OSError, json.JSONDecodeError) as exc:
        print(f"fairnom: error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write((_pretty(out) if args.pretty else json.dumps(out)) + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
