"""Command-line front end.

Exit codes: 0 success, 1 no equilibrium where one was required (or a check
came out negative), 2 invalid input or usage, 3 profile budget refusal.
"""

from __future__ import annotations

import argparse
import sys
from typing import Any, Sequence

from . import io
from .construct import construct
from .equilibria import (
    DynamicsPolicy,
    fastest_start,
    is_alpha_nash,
    run_dynamics,
)
from .fixtures import (
    FIXTURES,
    ExactCoverInstance,
    ThreeDMInstance,
    build_fixture,
    reduce_3dm_to_cmax,
    reduce_3dm_to_ne_existence,
    reduce_3dm_to_sumct,
    reduce_3xc_to_approx,
    reduce_4xc_to_congestion,
)
from .metrics import NoNE, Objective, applicable_bounds, check_bound, inefficiency
from .model import BudgetExceededError, CongestionInstance, GameError, as_rational

EXIT_OK, EXIT_NO_NE, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2, 3
REDUCTIONS = ("3dm-ne", "3dm-cmax", "3dm-sumct", "4xc", "3xc")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # usage problems exit 2, like validation errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _read(path: str | None) -> str:
    if path in (None, "-"):
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _instance(args):
    return io.parse_instance(_read(args.instance))


def _objectives(args, instance) -> list[Objective]:
    if args.objective:
        return [Objective.parse(o) for o in args.objective]
    if isinstance(instance, CongestionInstance):
        return [Objective.SUM_WEIGHTED]
    return [Objective.MAKESPAN, Objective.SUM_COMPLETION]


def _start(instance, source: str):
    if source == "all-on-fastest":
        return fastest_start(instance)
    if source == "construct":
        return construct(instance)[1]
    return io.parse_profile(instance, _read(source))


# ---------------------------------------------------------------------------
# subcommands


def cmd_analyze(args) -> int:
    instance = _instance(args)
    reports = [
        inefficiency(instance, obj, args.budget, method=args.method, keep=args.ne_cap)
        for obj in _objectives(args, instance)
    ]
    traces = []
    for name in args.dynamics or ():
        policy = DynamicsPolicy.parse(name)
        traces.append((policy.describe(), run_dynamics(instance, fastest_start(instance), policy)))
    verdicts = []
    if args.bounds:
        verdicts = [check_bound(instance, b, profile_budget=args.budget) for b in applicable_bounds(instance)]
    doc = io.build_report(instance, reports, args.ne_cap, traces, verdicts)
    _emit(io.report_table(doc) if args.table else io.dumps(doc), args.out)
    return EXIT_NO_NE if any(isinstance(r, NoNE) for r in reports) else EXIT_OK


def cmd_construct(args) -> int:
    instance = _instance(args)
    tag, profile = construct(instance, args.cls)
    doc = {"class": tag.value, **io.profile_to_document(instance, profile)}
    _emit(io.dumps(doc), args.out)
    return EXIT_OK


def cmd_brd(args) -> int:
    instance = _instance(args)
    policy = DynamicsPolicy.parse(args.policy)
    trace = run_dynamics(instance, _start(instance, args.start), policy, args.limit)
    _emit(io.dumps(io.trace_to_doc(instance, trace, policy.describe())), args.out)
    return EXIT_OK if trace.converged else EXIT_NO_NE


def cmd_verify(args) -> int:
    instance = _instance(args)
    profile = io.parse_profile(instance, _read(args.profile))
    alpha = as_rational(args.alpha, "--alpha")
    check = is_alpha_nash(instance, profile, alpha)
    _emit(io.dumps(io.nash_check_to_doc(instance, check, alpha)), args.out)
    return EXIT_OK if check else EXIT_NO_NE


def _params(pairs: Sequence[str]) -> dict[str, str]:
    out = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise GameError(f"--param expects key=value, got {pair!r}")
        out[key.strip()] = value.strip()
    return out


def cmd_fixture(args) -> int:
    if args.list or not args.name:
        _emit("".join(f"{name}\n" for name in FIXTURES), args.out)
        return EXIT_OK
    instance = build_fixture(args.name, **_params(args.param or ()))
    _emit(io.serialize_instance(instance), args.out)
    return EXIT_OK


def _triples(text: str) -> tuple[tuple[int, ...], ...]:
    try:
        return tuple(tuple(int(v) for v in part.split(",")) for part in text.replace(";", " ").split())
    except ValueError:
        raise GameError(f"triples look like '1,1,1 2,2,2', got {text!r}") from None


def _sets(text: str) -> list[list[str]]:
    return [[v.strip() for v in part.split(",") if v.strip()] for part in text.split(";") if part.strip()]


def cmd_reduce(args) -> int:
    if args.problem.startswith("3dm"):
        if args.triples is None:
            raise GameError("3DM reductions need --triples")
        triples = _triples(args.triples)
        n = args.n or max(max(t) for t in triples)
        dm = ThreeDMInstance(n, triples)
        if args.problem == "3dm-ne":
            instance = reduce_3dm_to_ne_existence(dm, args.eps, allow_large=args.allow_large)
        elif args.problem == "3dm-cmax":
            instance = reduce_3dm_to_cmax(dm, args.eps, allow_large=args.allow_large)
        else:
            instance = reduce_3dm_to_sumct(dm, args.r, allow_large=args.allow_large)
    else:
        if args.sets is None:
            raise GameError("exact-cover reductions need --sets")
        sets = _sets(args.sets)
        universe = _sets(args.universe)[0] if args.universe else sorted({e for s in sets for e in s}, key=_natural)
        xc = ExactCoverInstance(tuple(universe), tuple(frozenset(s) for s in sets))
        instance = reduce_4xc_to_congestion(xc) if args.problem == "4xc" else reduce_3xc_to_approx(xc)
    _emit(io.serialize_instance(instance), args.out)
    return EXIT_OK


def _natural(text: str) -> tuple[Any, ...]:
    return (0, int(text), "") if text.isdigit() else (1, 0, text)


def cmd_bounds(args) -> int:
    instance = _instance(args)
    names = args.bound or applicable_bounds(instance)
    verdicts = [check_bound(instance, b, args.objective, args.budget) for b in names]
    doc = {"instance_digest": io.instance_digest(instance), "bounds": [io.bound_to_doc(v) for v in verdicts]}
    _emit(io.dumps(doc), args.out)
    return EXIT_OK if all(verdicts) else EXIT_NO_NE


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="prioritygames", description="Scheduling and congestion games with priority lists.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, instance=True):
        if instance:
            p.add_argument("--instance", help="instance JSON file; '-' or omitted reads stdin")
        p.add_argument("--out", help="write here instead of stdout")
        return p

    def budget(p):
        p.add_argument("--budget", type=int, help="profile budget (default from PRIORITYGAMES_BUDGET or 10^6)")

    p = common(sub.add_parser("analyze", help="equilibria, optimum, PoA and PoS"))
    p.add_argument("--objective", action="append", help="makespan, sum or weighted; repeatable")
    budget(p)
    p.add_argument("--method", default="auto", choices=("auto", "enumerate", "search"))
    p.add_argument("--table", action="store_true", help="aligned tab-separated summary instead of JSON")
    p.add_argument("--ne-cap", type=int, default=20, help="list at most this many equilibria")
    p.add_argument("--dynamics", action="append", help="also run dynamics with this policy; repeatable")
    p.add_argument("--bounds", action="store_true", help="also check every applicable class bound")
    p.set_defaults(func=cmd_analyze)

    p = common(sub.add_parser("construct", help="equilibrium from a class construction"))
    p.add_argument("--class", dest="cls", default="auto", help="auto, g1, g2, g3, g4 or matroid")
    p.set_defaults(func=cmd_construct)

    p = common(sub.add_parser("brd", help="best-response dynamics trace"))
    p.add_argument("--start", default="all-on-fastest", help="profile JSON file, 'construct' or 'all-on-fastest'")
    p.add_argument("--policy", default="round-robin", help="round-robin, lowest-id or priority:<id>, optionally +better")
    p.add_argument("--limit", type=int, help="step limit")
    p.set_defaults(func=cmd_brd)

    p = common(sub.add_parser("verify", help="equilibrium check of a profile"))
    p.add_argument("--profile", required=True, help="profile JSON file")
    p.add_argument("--alpha", default="1", help="approximation factor p/q, at least 1")
    p.set_defaults(func=cmd_verify)

    p = common(sub.add_parser("fixture", help="emit a named instance"), instance=False)
    p.add_argument("name", nargs="?", help="fixture id, optionally with parameters: pos_g3(m=4)")
    p.add_argument("--param", action="append", help="key=value; repeatable")
    p.add_argument("--list", action="store_true", help="list fixture names")
    p.set_defaults(func=cmd_fixture)

    p = common(sub.add_parser("reduce", help="emit a hardness-reduction instance"), instance=False)
    p.add_argument("problem", choices=REDUCTIONS)
    p.add_argument("--triples", help="3DM triples, e.g. '1,1,1 2,2,2 1,2,2'")
    p.add_argument("--n", type=int, help="3DM side size (default: largest index)")
    p.add_argument("--eps", default="1/100", help="epsilon for the 3DM reductions")
    p.add_argument("--r", default="2", help="gap ratio for 3dm-sumct")
    p.add_argument("--sets", help="exact-cover subsets, e.g. '1,2,3,4;5,6,7,8'")
    p.add_argument("--universe", help="exact-cover universe, e.g. '1,2,3,4,5,6,7,8'")
    p.add_argument("--allow-large", action="store_true", help="lift the desk-scale size guard")
    p.set_defaults(func=cmd_reduce)

    p = common(sub.add_parser("bounds", help="compare PoA with the class bounds"))
    p.add_argument("--bound", action="append", help="bound name; repeatable (default: all applicable)")
    p.add_argument("--objective", help="objective for bounds that accept several")
    budget(p)
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}; raise --budget to enumerate anyway", file=sys.stderr)
        return EXIT_BUDGET
    except (GameError, OSError) as exc:
        path = getattr(exc, "path", "")
        print(f"error: {exc}" + (f" (at {path})" if path and path not in str(exc) else ""), file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
