"""Social objectives, optimum, price of anarchy/stability and bound checks."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .equilibria import (
    _stable_choices,
    check_budget,
    default_budget,
    iter_nash,
    optimize_nash,
)
from .model import (
    CongestionInstance,
    DomainError,
    GameInstance,
    Instance,
    Profile,
    UnsupportedError,
    _resolve,
    as_rational,
)


class Objective(str, enum.Enum):
    MAKESPAN = "makespan"
    SUM_COMPLETION = "sum"
    SUM_WEIGHTED = "weighted"

    @classmethod
    def parse(cls, value: Objective | str) -> Objective:
        if isinstance(value, Objective):
            return value
        aliases = {
            "makespan": cls.MAKESPAN,
            "cmax": cls.MAKESPAN,
            "sum": cls.SUM_COMPLETION,
            "sumct": cls.SUM_COMPLETION,
            "sum-completion": cls.SUM_COMPLETION,
            "weighted": cls.SUM_WEIGHTED,
            "sum-weighted": cls.SUM_WEIGHTED,
        }
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise DomainError(f"unknown objective {value!r}") from None

    def require_compatible(self, instance: Instance) -> None:
        if (self is Objective.SUM_WEIGHTED) != isinstance(instance, CongestionInstance):
            raise DomainError(f"objective {self.value!r} does not apply to {instance.kind} instances")


def _value(game, obj: Objective, choice: Sequence) -> Fraction:
    res = [game.res_of(s) for s in choice]
    occ = game.occupancy(res)
    costs = [game.cost_on(i, res[i], occ) for i in range(game.n)]
    return max(costs) if obj is Objective.MAKESPAN else sum(costs, Fraction(0))


def objective_value(instance: Instance, profile: Profile, objective: Objective | str) -> Fraction:
    obj = Objective.parse(objective)
    obj.require_compatible(instance)
    game, _ = _resolve(instance, profile)
    return _value(game, obj, profile.choices)


# ---------------------------------------------------------------------------
# social optimum


def _makespan_optimum(instance: GameInstance) -> tuple[Profile, Fraction]:
    """Exact minimum makespan by branch and bound over machine loads.

    The last job on a machine finishes at delay times total load, whatever
    the priorities, so only loads matter.
    """
    game = instance._game
    n, R = game.n, game.R
    delay = [m.delay for m in instance.machines]
    w = game.weight
    order = sorted(range(n), key=lambda i: -max(w[i]))

    # list-scheduling start gives a finite incumbent
    load = [Fraction(0)] * R
    assign = [0] * n
    for i in order:
        r = min(range(R), key=lambda r: (delay[r] * (load[r] + w[i][r]), r))
        assign[i] = r
        load[r] += w[i][r]
    best = [max(delay[r] * load[r] for r in range(R)), list(assign)]

    column = [tuple(w[i][r] for i in range(n)) for r in range(R)]
    load = [Fraction(0)] * R
    cur = [0] * n

    def walk(pos: int) -> None:
        if pos == n:
            span = max(delay[r] * load[r] for r in range(R))
            if span < best[0]:
                best[0], best[1] = span, list(cur)
            return
        i = order[pos]
        seen = set()
        for r in sorted(range(R), key=lambda r: delay[r] * (load[r] + w[i][r])):
            key = (delay[r], load[r], column[r])
            if key in seen:
                continue
            seen.add(key)
            if delay[r] * (load[r] + w[i][r]) >= best[0]:
                continue
            load[r] += w[i][r]
            cur[i] = r
            walk(pos + 1)
            load[r] -= w[i][r]

    walk(0)
    choice = tuple(game.resources[r] for r in best[1])
    return Profile(game.players, choice), best[0]


def social_optimum(
    instance: Instance,
    objective: Objective | str,
    profile_budget: int | None = None,
    method: str = "auto",
) -> tuple[Profile, Fraction]:
    """A profile minimizing the objective, and its value.

    ``method="enumerate"`` scans every profile (first minimizer in canonical
    order wins) and refuses beyond the budget.  Makespan on scheduling
    instances also has an exact branch and bound (``"search"``); ``"auto"``
    uses it only when the scan would exceed the budget.
    """
    obj = Objective.parse(objective)
    obj.require_compatible(instance)
    if method not in ("auto", "enumerate", "search"):
        raise DomainError(f"unknown method {method!r}")
    can_search = obj is Objective.MAKESPAN and isinstance(instance, GameInstance)
    if method == "search" or (method == "auto" and can_search and _over_budget(instance, profile_budget)):
        if not can_search:
            raise UnsupportedError("only makespan on scheduling instances has a search-based optimum")
        return _makespan_optimum(instance)
    check_budget(instance, profile_budget)
    game = instance._game
    best = None
    for choice in itertools.product(*game.strategies):
        v = _value(game, obj, choice)
        if best is None or v < best[0]:
            best = (v, choice)
    return Profile(game.players, best[1]), best[0]


def _over_budget(instance: Instance, budget: int | None) -> bool:
    budget = default_budget() if budget is None else budget
    return instance._game.count_strategies() > budget


# ---------------------------------------------------------------------------
# inefficiency


@dataclass(frozen=True)
class InefficiencyReport:
    objective: Objective
    ne_count: int | None
    opt_value: Fraction
    worst_ne_value: Fraction
    best_ne_value: Fraction
    poa: Fraction
    pos: Fraction
    opt_profile: Profile
    worst_witness: Profile
    best_witness: Profile
    equilibria: tuple[Profile, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class NoNE:
    """The instance has no pure equilibrium."""

    objective: Objective
    profiles_checked: int | None

    def __bool__(self) -> bool:
        return False


def inefficiency(
    instance: Instance,
    objective: Objective | str,
    profile_budget: int | None = None,
    method: str = "auto",
    keep: int = 0,
) -> InefficiencyReport | NoNE:
    """Price of anarchy and stability.

    ``"enumerate"`` scans all profiles once, collecting equilibria and the
    optimum together.  ``"search"`` finds the best and worst equilibria by
    pruned branch and bound and counts them by pruned enumeration; it needs
    the optimum to be computable too (see :func:`social_optimum`).
    ``keep`` caps how many equilibria are returned in the report.
    """
    obj = Objective.parse(objective)
    obj.require_compatible(instance)
    if method == "auto":
        searchable = obj is Objective.MAKESPAN and isinstance(instance, GameInstance)
        method = "search" if searchable and _over_budget(instance, profile_budget) else "enumerate"
    if method == "search":
        return _inefficiency_search(instance, obj, profile_budget, keep)
    if method != "enumerate":
        raise DomainError(f"unknown method {method!r}")
    count = check_budget(instance, profile_budget)
    game = instance._game
    opt = worst = best = None
    found: list[tuple] = []
    ne_count = 0
    for choice in itertools.product(*game.strategies):
        v = _value(game, obj, choice)
        if opt is None or v < opt[0]:
            opt = (v, choice)
        if _stable_choices(game, choice):
            ne_count += 1
            if len(found) < keep:
                found.append(choice)
            if best is None or v < best[0]:
                best = (v, choice)
            if worst is None or v > worst[0]:
                worst = (v, choice)
    if not ne_count:
        return NoNE(obj, count)
    mk = lambda c: Profile(game.players, c)  # noqa: E731
    return InefficiencyReport(
        obj,
        ne_count,
        opt[0],
        worst[0],
        best[0],
        worst[0] / opt[0],
        best[0] / opt[0],
        mk(opt[1]),
        mk(worst[1]),
        mk(best[1]),
        tuple(mk(c) for c in found),
    )


def _inefficiency_search(instance: Instance, obj: Objective, budget: int | None, keep: int):
    low = optimize_nash(instance, obj.value, "min")
    if low is None:
        return NoNE(obj, None)
    high = optimize_nash(instance, obj.value, "max")
    opt_profile, opt = social_optimum(instance, obj, budget)
    ne_count = 0
    found = []
    for p in iter_nash(instance):
        ne_count += 1
        if len(found) < keep:
            found.append(p)
    return InefficiencyReport(
        obj,
        ne_count,
        opt,
        high[0],
        low[0],
        high[0] / opt,
        low[0] / opt,
        opt_profile,
        high[1],
        low[1],
        tuple(found),
    )


# ---------------------------------------------------------------------------
# class bounds


def golden_side(c: Fraction) -> int:
    """Sign of ``c - golden ratio`` decided exactly via ``c^2`` against ``c + 1``."""
    lhs, rhs = c * c, c + 1
    return (lhs > rhs) - (lhs < rhs)


def two_machine_bound(c: Any) -> Fraction:
    """Makespan PoA bound for two machines with delay ratio ``c >= 1``.

    ``1 + c/(c+1)`` up to the golden ratio and ``1 + 1/c`` beyond it; the two
    branches meet there, so the bound is the smaller of the two.
    """
    c = as_rational(c)
    if c < 1:
        raise DomainError("delay ratio must be at least 1")
    return 1 + c / (c + 1) if golden_side(c) <= 0 else 1 + 1 / c


BOUNDS = ("g1", "g2", "g3-makespan", "g3-sum", "linear-congestion")


@dataclass(frozen=True)
class BoundVerdict:
    bound: str
    holds: bool
    poa: Fraction | None
    limit: Fraction
    exact: bool  # True when the bound is an equality (PoA must equal limit)

    def __bool__(self) -> bool:
        return self.holds


def bound_limit(
    instance: Instance, bound: str, objective: Objective | str | None = None
) -> tuple[Objective, Fraction, bool]:
    """Objective, limit and equality flag of a class bound; checks applicability.

    Only ``g1`` holds for both scheduling objectives; the others fix theirs.
    """
    from .construct import ClassTag, classify

    tags = classify(instance)

    def need(tag: ClassTag) -> None:
        if tag not in tags:
            raise DomainError(f"bound {bound!r} needs an instance in {tag.value}")

    if bound == "g1":
        need(ClassTag.G1)
        obj = Objective.MAKESPAN if objective is None else Objective.parse(objective)
        obj.require_compatible(instance)
        return obj, Fraction(1), True
    if bound == "g2":
        need(ClassTag.G2)
        fast, slow = sorted(m.delay for m in instance.machines)
        return Objective.MAKESPAN, two_machine_bound(slow / fast), False
    if bound == "g3-makespan":
        need(ClassTag.G3)
        return Objective.MAKESPAN, 2 - Fraction(1, instance.m), False
    if bound == "g3-sum":
        need(ClassTag.G3)
        return Objective.SUM_COMPLETION, Fraction(instance.n - 1, instance.m) + 1, False
    if bound == "linear-congestion":
        if not isinstance(instance, CongestionInstance):
            raise DomainError("bound 'linear-congestion' needs a congestion instance")
        if not all(r.cost.is_affine for r in instance.resources):
            raise DomainError("bound 'linear-congestion' needs affine costs")
        return Objective.SUM_WEIGHTED, Fraction(4), False
    raise DomainError(f"unknown bound {bound!r}; expected one of {', '.join(BOUNDS)}")


def check_bound(
    instance: Instance,
    bound: str,
    objective: Objective | str | None = None,
    profile_budget: int | None = None,
) -> BoundVerdict:
    """Compare the computed PoA with a class bound.

    Instances without an equilibrium satisfy every upper bound vacuously.
    """
    obj, limit, exact = bound_limit(instance, bound, objective)
    if objective is not None and Objective.parse(objective) is not obj:
        raise DomainError(f"bound {bound!r} is stated for objective {obj.value!r}")
    report = inefficiency(instance, obj, profile_budget)
    if isinstance(report, NoNE):
        return BoundVerdict(bound, not exact, None, limit, exact)
    holds = report.poa == limit if exact else report.poa <= limit
    if exact:
        holds = holds and report.pos == limit
    return BoundVerdict(bound, holds, report.poa, limit, exact)


def applicable_bounds(instance: Instance) -> list[str]:
    out = []
    for b in BOUNDS:
        try:
            bound_limit(instance, b)
        except DomainError:
            continue
        out.append(b)
    return out


# ---------------------------------------------------------------------------
# smoothness and polynomial costs


def smoothness_sides(instance: CongestionInstance, s: Profile, t: Profile) -> tuple[Fraction, Fraction]:
    """``(sum_i cost_i(t_i, s_-i), 2 cost(t) + cost(s)/2)``."""
    if not isinstance(instance, CongestionInstance):
        raise UnsupportedError("smoothness is checked on congestion instances")
    if not all(r.cost.is_affine for r in instance.resources):
        raise UnsupportedError("the (2, 1/2) constants hold for affine costs only")
    game, res_s = _resolve(instance, s)
    _, res_t = _resolve(instance, t)
    occ_s = game.occupancy(res_s)
    mixed = Fraction(0)
    for i in range(game.n):
        others = [[k for k in row if k != i] for row in occ_s]
        mixed += game.cost_on(i, res_t[i], others)
    cost_s = _value(game, Objective.SUM_WEIGHTED, s.choices)
    cost_t = _value(game, Objective.SUM_WEIGHTED, t.choices)
    return mixed, 2 * cost_t + cost_s / 2


def smoothness_check(instance: CongestionInstance, s: Profile, t: Profile) -> bool:
    lhs, rhs = smoothness_sides(instance, s, t)
    return lhs <= rhs


def _root_poly(d: int, x: Fraction) -> Fraction:
    return x ** (d + 1) - (d + 1) * (x + 1) ** d


def poly_root_interval(d: int, width: Fraction = Fraction(1, 10**12)) -> tuple[Fraction, Fraction]:
    """Rational bracket of the positive root of ``x^(d+1) = (d+1)(x+1)^d``."""
    if not isinstance(d, int) or d < 1:
        raise DomainError(f"degree must be an integer >= 1, got {d!r}")
    lo, hi = Fraction(1), Fraction(2)
    while _root_poly(d, hi) <= 0:
        lo, hi = hi, hi * 2
    while hi - lo > width:
        mid = (lo + hi) / 2
        if _root_poly(d, mid) < 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def poly_poa_bound(d: int, width: Fraction = Fraction(1, 10**12)) -> tuple[Fraction, Fraction]:
    """Interval ``[lo, hi]`` containing ``phi^(d+1)`` for degree-``d`` costs."""
    lo, hi = poly_root_interval(d, width)
    return lo ** (d + 1), hi ** (d + 1)


def multinomial_inequality(weights: Sequence[Any], d: int) -> bool:
    """``(sum w)^(d+1) <= (d+1) * sum_k w_k (w_1 + ... + w_k)^d``."""
    ws = [as_rational(w) for w in weights]
    if any(w < 0 for w in ws):
        raise DomainError("weights must be nonnegative")
    total = sum(ws, Fraction(0))
    acc = Fraction(0)
    rhs = Fraction(0)
    for w in ws:
        acc += w
        rhs += w * acc**d
    return total ** (d + 1) <= (d + 1) * rhs
