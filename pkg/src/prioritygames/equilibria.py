"""Best responses, equilibrium checks, equilibrium search and dynamics."""

from __future__ import annotations

import enum
import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Iterator, Mapping, Sequence

from .model import (
    BudgetExceededError,
    CongestionInstance,
    DomainError,
    GameError,
    GameInstance,
    Instance,
    InvalidReferenceError,
    Profile,
    UnsupportedError,
    _Game,
    _resolve,
    as_rational,
)

DEFAULT_BUDGET = 10**6
BUDGET_ENV = "PRIORITYGAMES_BUDGET"


def default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw:
        try:
            return int(raw)
        except ValueError:
            raise DomainError(f"{BUDGET_ENV}={raw!r} is not an integer") from None
    return DEFAULT_BUDGET


# ---------------------------------------------------------------------------
# best responses


def _greedy_basis(game: _Game, i: int, occ) -> tuple[frozenset, Fraction]:
    """Min-cost basis of player ``i``'s matroid against the others in ``occ``."""
    mat = game.matroids[i]
    unit = {}
    for e in mat.ground:
        r = game.rindex[e]
        unit[e] = game.cost_on(i, (r,), occ)
    chosen: list[str] = []
    for e in sorted(mat.ground, key=lambda e: (unit[e], game.rindex[e])):
        if mat.is_independent(chosen + [e]):
            chosen.append(e)
            if len(chosen) == mat.rank:
                break
    return frozenset(chosen), sum((unit[e] for e in chosen), Fraction(0))


def _best(game: _Game, i: int, current: Any, res, occ) -> tuple[Any, Fraction, Fraction]:
    """Return ``(strategy, cost, current cost)`` of a best response of ``i``."""
    cur_cost = game.cost_on(i, res[i], occ)
    if game.matroids[i] is not None:
        strat, cost = _greedy_basis(game, i, occ)
        if cost >= cur_cost:
            return current, cur_cost, cur_cost
        return strat, cost, cur_cost
    best_s, best_c = current, cur_cost
    for strat, sres in zip(game.strategies[i], game.strategy_resources[i]):
        c = game.cost_on(i, sres, occ)
        if c < best_c:
            best_s, best_c = strat, c
    return best_s, best_c, cur_cost


def _first_better(game: _Game, i: int, current: Any, res, occ) -> tuple[Any, Fraction, Fraction]:
    cur_cost = game.cost_on(i, res[i], occ)
    for strat, sres in zip(game.strategies[i], game.strategy_resources[i]):
        c = game.cost_on(i, sres, occ)
        if c < cur_cost:
            return strat, c, cur_cost
    return current, cur_cost, cur_cost


def _index(game: _Game, player: str) -> int:
    try:
        return game.pindex[player]
    except KeyError:
        raise InvalidReferenceError(f"unknown player {player!r}") from None


def best_response(instance: Instance, profile: Profile, player: str) -> tuple[Any, Fraction]:
    """A cost-minimizing strategy of ``player`` against ``profile``.

    Ties keep the current strategy, then fall back to the lowest strategy
    index.  Matroid players get the greedy minimum-cost basis, which is a
    best response because costs are additive over resources.
    """
    game, res = _resolve(instance, profile)
    i = _index(game, player)
    if game.matroids[i] is None and not game.strategies[i]:
        raise GameError(f"player {player!r} has no strategies")
    occ = game.occupancy(res)
    strat, cost, _ = _best(game, i, profile.choices[i], res, occ)
    return strat, cost


@dataclass(frozen=True)
class Deviation:
    player: str
    strategy: Any
    current_cost: Fraction
    deviation_cost: Fraction


@dataclass(frozen=True)
class NashCheck:
    """Verdict of an equilibrium test; truthy iff the profile is stable."""

    stable: bool
    witness: Deviation | None = None

    def __bool__(self) -> bool:
        return self.stable


def is_nash(instance: Instance, profile: Profile) -> NashCheck:
    """True iff no player has a strictly improving unilateral deviation.

    On failure the witness is the first player (declaration order) that can
    improve, together with its best response.
    """
    game, res = _resolve(instance, profile)
    occ = game.occupancy(res)
    for i in range(game.n):
        strat, cost, cur = _best(game, i, profile.choices[i], res, occ)
        if cost < cur:
            return NashCheck(False, Deviation(game.players[i], strat, cur, cost))
    return NashCheck(True)


def is_alpha_nash(instance: Instance, profile: Profile, alpha: Any) -> NashCheck:
    """True iff every deviation costs at least ``current / alpha``.

    A move that cuts a player's cost by a factor strictly greater than
    ``alpha`` breaks stability; a cut by exactly ``alpha`` does not.
    """
    a = as_rational(alpha)
    if a < 1:
        raise DomainError(f"alpha must be >= 1, got {a}")
    game, res = _resolve(instance, profile)
    occ = game.occupancy(res)
    for i in range(game.n):
        strat, cost, cur = _best(game, i, profile.choices[i], res, occ)
        if cost * a < cur:
            return NashCheck(False, Deviation(game.players[i], strat, cur, cost))
    return NashCheck(True)


# ---------------------------------------------------------------------------
# exhaustive enumeration


def iter_profiles(instance: Instance) -> Iterator[Profile]:
    """All profiles, lexicographic in (player order, strategy index)."""
    game = instance._game
    for choice in itertools.product(*game.strategies):
        yield Profile(game.players, tuple(choice))


def check_budget(instance: Instance, budget: int | None) -> int:
    budget = default_budget() if budget is None else budget
    count = instance._game.count_strategies()
    if count > budget:
        raise BudgetExceededError(count, budget)
    return count


def _stable_choices(game: _Game, choice: tuple, alpha: Fraction = Fraction(1)) -> bool:
    res = [game.res_of(s) for s in choice]
    occ = game.occupancy(res)
    for i in range(game.n):
        strat, cost, cur = _best(game, i, choice[i], res, occ)
        if cost * alpha < cur:
            return False
    return True


def enumerate_nash(instance: Instance, profile_budget: int | None = None) -> list[Profile]:
    """Every pure equilibrium, found by scanning the whole profile space.

    Refuses with :class:`BudgetExceededError` (carrying the profile count)
    when the space is larger than ``profile_budget``.
    """
    check_budget(instance, profile_budget)
    game = instance._game
    out = []
    for choice in itertools.product(*game.strategies):
        if _stable_choices(game, choice):
            out.append(Profile(game.players, tuple(choice)))
    return out


def enumerate_alpha_nash(instance: Instance, alpha: Any, profile_budget: int | None = None) -> list[Profile]:
    a = as_rational(alpha)
    if a < 1:
        raise DomainError(f"alpha must be >= 1, got {a}")
    check_budget(instance, profile_budget)
    game = instance._game
    return [
        Profile(game.players, tuple(choice))
        for choice in itertools.product(*game.strategies)
        if _stable_choices(game, choice, a)
    ]


# ---------------------------------------------------------------------------
# pruned exact search
#
# Each player carries a domain of still-possible strategy indices.  For a
# resource r, "certain" players use r in every strategy of their domain and
# "possible" players in at least one.  With certain predecessors only, a
# player's cost on a strategy is a lower bound over all completions; with
# possible predecessors it is an upper bound.  A strategy whose lower bound
# exceeds the upper bound of some alternative is never played in an
# equilibrium consistent with the domains, so it is dropped.  Propagating to
# a fixpoint and branching on the smallest domain explores only what cannot
# be ruled out.


class _Search:
    """Domain propagation and branching over integer-scaled costs.

    Every weight and cost coefficient is multiplied by one common positive
    factor (``scale``), so comparisons are exact and run on machine ints.
    """

    def __init__(self, game: _Game, objective: str | None = None):
        self.game = game
        self.objective = objective
        self.S = game.strategy_resources
        self.Sset = [[frozenset(s) for s in strats] for strats in self.S]
        self.order = [sorted(range(game.n), key=lambda k: game.rank[r][k]) for r in range(game.R)]
        L = math.lcm(*(w.denominator for row in game.weight for w in row), *(m.denominator for m in game.mult))
        A = math.lcm(*(c.denominator for cs in game.coefficients for c in cs))
        dmax = max(len(cs) for cs in game.coefficients) - 1
        self.W = [[int(w * L) for w in row] for row in game.weight]
        self.M = [int(m * L) for m in game.mult]
        self.P = [tuple(int(c * A) * L ** (dmax - k) for k, c in enumerate(cs)) for cs in game.coefficients]
        self.scale = Fraction(A * L ** (dmax + 1))
        self.nodes = 0

    def _c(self, r: int, load: int) -> int:
        acc = 0
        for c in reversed(self.P[r]):
            acc = acc * load + c
        return acc

    def _ahead(self, members: list[set[int]]) -> list[list[int]]:
        """``ahead[r][i]``: weight of members of r strictly before i on r."""
        W = self.W
        out = []
        for r, order in enumerate(self.order):
            row = [0] * self.game.n
            acc = 0
            mem = members[r]
            for k in order:
                row[k] = acc
                if k in mem:
                    acc += W[k][r]
            out.append(row)
        return out

    def _cost(self, i: int, res: tuple[int, ...], ahead) -> int:
        wi = self.W[i]
        return self.M[i] * sum(self._c(r, wi[r] + ahead[r][i]) for r in res)

    def _table(self, ahead) -> list[list[int]]:
        """``tab[i][r]``: unscaled-by-multiplicity cost of i on r behind ``ahead``."""
        W, P = self.W, self.P
        tab = []
        for i in range(self.game.n):
            wi = W[i]
            row = []
            for r in range(self.game.R):
                x = wi[r] + ahead[r][i]
                cs = P[r]
                if len(cs) == 2:
                    row.append(cs[0] + cs[1] * x)
                else:
                    acc = 0
                    for c in reversed(cs):
                        acc = acc * x + c
                    row.append(acc)
            tab.append(row)
        return tab

    def _members(self, dom: list[tuple[int, ...]]) -> tuple[list[set[int]], list[set[int]]]:
        R = self.game.R
        certain: list[set[int]] = [set() for _ in range(R)]
        possible: list[set[int]] = [set() for _ in range(R)]
        for k, d in enumerate(dom):
            sets = [self.Sset[k][a] for a in d]
            for r in frozenset.intersection(*sets):
                certain[r].add(k)
            for r in frozenset.union(*sets):
                possible[r].add(k)
        return certain, possible

    def propagate(self, dom: list[tuple[int, ...]], bound: Fraction | None, strict: bool):
        """Shrink domains to a fixpoint; ``None`` when some domain empties."""
        g = self.game
        dom = list(dom)
        cap = None if bound is None else bound * self.scale

        def over(value) -> bool:
            return value > cap or (strict and value == cap)

        span = cap is not None and self.objective == "makespan"
        total_obj = cap is not None and self.objective in ("sum", "weighted")
        S, M = self.S, self.M
        while True:
            certain, possible = self._members(dom)
            lo_tab = self._table(self._ahead(certain))
            hi_tab = self._table(self._ahead(possible))
            if span and g.scheduling:
                full = [sum(self.W[k][r] for k in certain[r]) for r in range(g.R)]
            changed = False
            lbs: list[list[int]] = []
            for i in range(g.n):
                lo_i, hi_i, m = lo_tab[i], hi_tab[i], M[i]
                best_ub = m * min(sum(hi_i[r] for r in res) for res in S[i])
                keep = []
                lb_row = []
                for a in dom[i]:
                    res = S[i][a]
                    lb = m * sum(lo_i[r] for r in res)
                    if lb > best_ub:
                        continue
                    if span:
                        if over(lb):
                            continue
                        if g.scheduling and i not in certain[res[0]]:
                            r = res[0]
                            if over(m * self._c(r, full[r] + self.W[i][r])):
                                continue
                    keep.append(a)
                    lb_row.append(lb)
                if not keep:
                    return None
                if len(keep) != len(dom[i]):
                    changed = True
                    dom[i] = tuple(keep)
                lbs.append(lb_row)
            if span and g.scheduling:
                for r in range(g.R):
                    if certain[r]:
                        last = max(certain[r], key=lambda k: g.rank[r][k])
                        if over(self.M[last] * self._c(r, full[r])):
                            return None
            if total_obj:
                mins = [min(row) for row in lbs]
                total = sum(mins)
                if over(total):
                    return None
                for i in range(g.n):
                    rest = total - mins[i]
                    keep = tuple(a for a, lb in zip(dom[i], lbs[i]) if not over(rest + lb))
                    if not keep:
                        return None
                    if len(keep) != len(dom[i]):
                        changed = True
                        dom[i] = keep
            if not changed:
                return dom

    def upper_objective(self, dom) -> Fraction:
        _, possible = self._members(dom)
        hi = self._ahead(possible)
        ubs = [max(self._cost(i, self.S[i][a], hi) for a in dom[i]) for i in range(self.game.n)]
        top = max(ubs) if self.objective == "makespan" else sum(ubs)
        return top / self.scale

    def choose(self, dom, scope=None) -> int:
        """Undecided player with the fewest undecided rivals ahead of it."""
        g = self.game
        pool = range(g.n) if scope is None else scope
        open_ = [k for k in range(g.n) if len(dom[k]) > 1]
        best, key = -1, None
        for i in pool:
            d = dom[i]
            if len(d) < 2:
                continue
            res = frozenset.union(*(self.Sset[i][a] for a in d))
            ahead = 0
            for r in res:
                ri = g.rank[r][i]
                for k in open_:
                    if g.rank[r][k] < ri and any(r in self.Sset[k][b] for b in dom[k]):
                        ahead += 1
            k = (ahead, len(d), i)
            if key is None or k < key:
                best, key = i, k
        return best

    def _bounds(self, dom):
        certain, possible = self._members(dom)
        return self._ahead(certain), self._ahead(possible), possible

    def _settled(self, dom, players, lo, hi) -> bool:
        """No listed player can lower its cost, judged on lower bounds."""
        g = self.game
        for j in players:
            own = self._cost(j, self.S[j][dom[j][0]], hi)
            for a, res in enumerate(self.S[j]):
                if a != dom[j][0] and self._cost(j, res, lo) < own:
                    return False
        return True

    def solve(self, dom, scope=None, pending=(), node_limit=None):
        """Some equilibrium completion of ``dom`` (as domains), or ``None``.

        Undecided players that share no possible resource form independent
        parts, each settled on its own.  A decided player whose stability is
        still open ties together every undecided player that could change
        the verdict, and is checked with that part.
        """
        g = self.game
        dom = self.propagate(dom, None, False)
        if dom is None:
            return None
        self.nodes += 1
        if node_limit is not None and self.nodes > node_limit:
            raise GameError(f"search exceeded {node_limit} nodes")
        scope = list(range(g.n)) if scope is None else scope
        lo, hi, possible = self._bounds(dom)
        und = [i for i in scope if len(dom[i]) > 1]
        if not und:
            return dom if self._settled(dom, [*scope, *pending], lo, hi) else None

        parent = {i: i for i in und}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(a, b):
            parent[find(a)] = find(b)

        in_scope = set(und)
        for i in und:
            for r in frozenset.union(*(self.Sset[i][a] for a in dom[i])):
                for k in possible[r]:
                    if k in in_scope and k != i:
                        union(i, k)
        attached: dict[int, list[int]] = {}
        for j in [*pending, *(i for i in scope if len(dom[i]) == 1)]:
            own_res = self.S[j][dom[j][0]]
            own = self._cost(j, own_res, hi)
            links: set[int] = set()
            for a, res in enumerate(self.S[j]):
                if a == dom[j][0] or self._cost(j, res, lo) >= own:
                    continue
                touched = {k for r in (*own_res, *res) for k in possible[r] if len(dom[k]) > 1}
                if not touched:
                    return None
                links |= touched & in_scope
            if links:
                first = next(iter(links))
                for k in links:
                    union(first, k)
                attached.setdefault(first, []).append(j)
        parts: dict[int, list[int]] = {}
        for i in und:
            parts.setdefault(find(i), []).append(i)
        checks: dict[int, list[int]] = {}
        for k, js in attached.items():
            checks.setdefault(find(k), []).extend(js)

        if len(parts) == 1:
            carried = [*pending, *(i for i in scope if len(dom[i]) == 1)]
            i = self.choose(dom, und)
            for a in dom[i]:
                sub = list(dom)
                sub[i] = (a,)
                out = self.solve(sub, und, carried, node_limit)
                if out is not None:
                    return out
            return None
        for root, members in sorted(parts.items(), key=lambda kv: len(kv[1])):
            out = self.solve(dom, members, checks.get(root, []), node_limit)
            if out is None:
                return None
            dom = [out[k] if k in members else dom[k] for k in range(g.n)]
        return dom

    def leaves(
        self,
        dom,
        bound: Fraction | None = None,
        strict: bool = False,
        node_limit: int | None = None,
    ) -> Iterator[tuple]:
        dom = self.propagate(dom, bound, strict)
        if dom is None:
            return
        self.nodes += 1
        if node_limit is not None and self.nodes > node_limit:
            raise GameError(f"search exceeded {node_limit} nodes")
        i = self.choose(dom)
        if i < 0:
            choice = tuple(self.game.strategies[k][d[0]] for k, d in enumerate(dom))
            if _stable_choices(self.game, choice):
                yield choice
            return
        for a in dom[i]:
            sub = list(dom)
            sub[i] = (a,)
            yield from self.leaves(sub, bound, strict, node_limit)


def _objective_value(game: _Game, objective: str, choice: tuple) -> Fraction:
    res = [game.res_of(s) for s in choice]
    occ = game.occupancy(res)
    costs = [game.cost_on(i, res[i], occ) for i in range(game.n)]
    return max(costs) if objective == "makespan" else sum(costs, Fraction(0))


def _full_domains(game: _Game, allowed: Mapping[str, Iterable[Any]] | None = None) -> list[tuple[int, ...]]:
    """Strategy indices per player, cut down to ``allowed`` where given."""
    dom = [tuple(range(len(s))) for s in game.strategies]
    for pid, strats in (allowed or {}).items():
        i = _index(game, pid)
        wanted = {frozenset(x) if isinstance(x, (set, frozenset, list, tuple)) else x for x in strats}
        unknown = wanted - set(game.strategies[i])
        if unknown:
            raise InvalidReferenceError(f"{sorted(map(str, unknown))} are not strategies of {pid!r}")
        dom[i] = tuple(k for k in dom[i] if game.strategies[i][k] in wanted)
    return dom


def _search_kind(instance: Instance, objective: str | None) -> str | None:
    if objective is None:
        return None
    from .metrics import Objective

    obj = Objective.parse(objective)
    obj.require_compatible(instance)
    return {Objective.MAKESPAN: "makespan", Objective.SUM_COMPLETION: "sum", Objective.SUM_WEIGHTED: "weighted"}[obj]


def iter_nash(
    instance: Instance, node_limit: int | None = None, allowed: Mapping[str, Iterable[Any]] | None = None
) -> Iterator[Profile]:
    """Every pure equilibrium via pruned search (search order, not sorted)."""
    game = instance._game
    search = _Search(game)
    for choice in search.leaves(_full_domains(game, allowed), node_limit=node_limit):
        yield Profile(game.players, choice)


def search_nash(instance: Instance, node_limit: int | None = None) -> list[Profile]:
    """Same set as :func:`enumerate_nash`, same order, without scanning every profile."""
    game = instance._game
    index = [{s: k for k, s in enumerate(strats)} for strats in game.strategies]
    found = list(iter_nash(instance, node_limit))
    found.sort(key=lambda p: tuple(index[i][s] for i, s in enumerate(p.choices)))
    return found


def find_nash(
    instance: Instance,
    objective: str | None = None,
    below: Any = None,
    strict: bool = True,
    node_limit: int | None = None,
    allowed: Mapping[str, Iterable[Any]] | None = None,
) -> Profile | None:
    """Some equilibrium, optionally with objective ``< below`` (``<=`` if not strict).

    ``allowed`` confines listed players to some of their strategies, which
    is sound whenever every equilibrium is known to respect it.
    """
    game = instance._game
    kind = _search_kind(instance, objective)
    bound = None if below is None else as_rational(below)
    if bound is not None and kind is None:
        raise DomainError("an objective bound needs an objective")
    search = _Search(game, kind)
    dom = _full_domains(game, allowed)
    if bound is None:
        solved = search.solve(dom, node_limit=node_limit)
        if solved is None:
            return None
        choice = tuple(game.strategies[k][d[0]] for k, d in enumerate(solved))
        if _stable_choices(game, choice):
            return Profile(game.players, choice)
    for choice in search.leaves(dom, bound, strict, node_limit):
        return Profile(game.players, choice)
    return None


def optimize_nash(
    instance: Instance,
    objective: str,
    sense: str = "min",
    node_limit: int | None = None,
    allowed: Mapping[str, Iterable[Any]] | None = None,
) -> tuple[Fraction, Profile] | None:
    """Best (``sense="min"``) or worst (``"max"``) equilibrium by branch and bound.

    Returns ``None`` when the game has no pure equilibrium.
    """
    game = instance._game
    kind = _search_kind(instance, objective)
    if sense not in ("min", "max"):
        raise DomainError(f"sense must be 'min' or 'max', got {sense!r}")
    search = _Search(game, kind)
    best: tuple[Fraction, tuple] | None = None

    if sense == "min":
        dom = _full_domains(game, allowed)
        while True:
            bound = None if best is None else best[0]
            hit = next(search.leaves(dom, bound, True, node_limit), None)
            if hit is None:
                break
            best = (_objective_value(game, kind, hit), hit)
    else:
        def walk(dom) -> None:
            nonlocal best
            dom = search.propagate(dom, None, False)
            if dom is None:
                return
            if best is not None and search.upper_objective(dom) <= best[0]:
                return
            search.nodes += 1
            if node_limit is not None and search.nodes > node_limit:
                raise GameError(f"search exceeded {node_limit} nodes")
            i = search.choose(dom)
            if i < 0:
                choice = tuple(game.strategies[k][d[0]] for k, d in enumerate(dom))
                if _stable_choices(game, choice):
                    val = _objective_value(game, kind, choice)
                    if best is None or val > best[0]:
                        best = (val, choice)
                return
            for a in dom[i]:
                sub = list(dom)
                sub[i] = (a,)
                walk(sub)

        walk(_full_domains(game, allowed))
    if best is None:
        return None
    return best[0], Profile(game.players, best[1])


# ---------------------------------------------------------------------------
# best-response dynamics


@dataclass(frozen=True)
class DynamicsPolicy:
    """Which player moves next and how.

    ``selection`` is ``"round-robin"`` (scan from the player after the last
    mover), ``"lowest-id"`` (scan from the first player every step) or
    ``"priority"`` (scan in the priority order of resource ``priority_of``).
    ``response="better"`` moves to the first strictly better strategy instead
    of a best one; it is experimental.
    """

    selection: str = "round-robin"
    priority_of: str | None = None
    response: str = "best"

    def __post_init__(self) -> None:
        if self.selection not in ("round-robin", "lowest-id", "priority"):
            raise DomainError(f"unknown selection rule {self.selection!r}")
        if self.selection == "priority" and self.priority_of is None:
            raise DomainError("priority selection needs a machine/resource id")
        if self.response not in ("best", "better"):
            raise DomainError(f"unknown response rule {self.response!r}")

    @classmethod
    def parse(cls, text: str) -> DynamicsPolicy:
        """``round-robin``, ``lowest-id``, ``priority:M1``, optionally ``+better``."""
        body, _, resp = text.partition("+")
        sel, _, target = body.partition(":")
        return cls(sel, target or None, resp or "best")

    def describe(self) -> str:
        text = self.selection + (f":{self.priority_of}" if self.priority_of else "")
        return text + ("+better" if self.response == "better" else "")


@dataclass(frozen=True)
class Move:
    player: str
    old: Any
    new: Any
    old_cost: Fraction
    new_cost: Fraction


class Status(str, enum.Enum):
    CONVERGED = "converged"
    CYCLE = "cycle"
    STEP_LIMIT = "step-limit"


@dataclass(frozen=True)
class DynamicsTrace:
    """Moves applied from ``initial`` and how the run ended.

    ``cycle_start`` is the index (into the visited-profile sequence, 0 being
    the initial profile) of the profile that was revisited.
    """

    initial: Profile
    moves: tuple[Move, ...]
    status: Status
    final: Profile
    cycle_start: int | None = None

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def fastest_start(instance: Instance) -> Profile:
    """Everyone on the strategy that would be cheapest with nobody else around
    (the fastest machine in a scheduling game); lowest index on ties."""
    game = instance._game
    empty = [[] for _ in range(game.R)]
    choices = []
    for i, strats in enumerate(game.strategies):
        costs = [game.cost_on(i, game.res_of(s), empty) for s in strats]
        choices.append(strats[costs.index(min(costs))])
    return Profile(game.players, tuple(choices))


def default_step_limit(instance: Instance) -> int:
    count = instance._game.count_strategies()
    return min(10 * count, 10**6)


def run_dynamics(
    instance: Instance,
    initial: Profile,
    policy: DynamicsPolicy | None = None,
    step_limit: int | None = None,
) -> DynamicsTrace:
    """Apply improving moves until nobody improves, a profile repeats, or the limit hits."""
    policy = policy or DynamicsPolicy()
    game, res = _resolve(instance, initial)
    limit = default_step_limit(instance) if step_limit is None else step_limit
    n = game.n
    if policy.selection == "priority":
        if policy.priority_of not in game.rindex:
            raise InvalidReferenceError(f"unknown machine/resource {policy.priority_of!r}")
        r = game.rindex[policy.priority_of]
        scan = sorted(range(n), key=lambda k: game.rank[r][k])
    else:
        scan = list(range(n))
    respond = _best if policy.response == "best" else _first_better

    choices = list(initial.choices)
    seen = {tuple(choices): 0}
    moves: list[Move] = []
    pointer = 0
    while True:
        occ = game.occupancy(res)
        mover = None
        for t in range(n):
            pos = (pointer + t) % n if policy.selection == "round-robin" else t
            i = scan[pos]
            strat, cost, cur = respond(game, i, choices[i], res, occ)
            if cost < cur:
                mover = (pos, i, strat, cost, cur)
                break
        if mover is None:
            return DynamicsTrace(initial, tuple(moves), Status.CONVERGED, Profile(game.players, tuple(choices)))
        if len(moves) >= limit:
            return DynamicsTrace(initial, tuple(moves), Status.STEP_LIMIT, Profile(game.players, tuple(choices)))
        pos, i, strat, cost, cur = mover
        moves.append(Move(game.players[i], choices[i], strat, cur, cost))
        choices[i] = strat
        res[i] = game.res_of(strat)
        pointer = (pos + 1) % n
        key = tuple(choices)
        if key in seen:
            return DynamicsTrace(
                initial, tuple(moves), Status.CYCLE, Profile(game.players, key), cycle_start=seen[key]
            )
        seen[key] = len(moves)


# ---------------------------------------------------------------------------
# matroid games: lazy better responses and the potential order


def _require_unit_matroid(instance: Instance) -> None:
    if not isinstance(instance, CongestionInstance) or not instance.is_matroid_game:
        raise UnsupportedError("lazy better responses need a matroid congestion game")
    if not instance.has_unit_weights:
        raise UnsupportedError("lazy better responses need unit weights")


def lazy_better_response_step(instance: CongestionInstance, profile: Profile) -> tuple[str, frozenset] | None:
    """A single-element swap that strictly lowers some player's cost.

    Picks the first player (declaration order) that has one, and among its
    swaps the one with the lowest resulting cost, ties by entering then
    leaving resource order.  ``None`` means no lazy move exists.
    """
    _require_unit_matroid(instance)
    game, res = _resolve(instance, profile)
    occ = game.occupancy(res)
    for i in range(game.n):
        mat = game.matroids[i]
        current = profile.choices[i]
        cur_cost = game.cost_on(i, res[i], occ)
        best = None
        for e_in in sorted(set(mat.ground) - current, key=game.rindex.__getitem__):
            for e_out in sorted(current, key=game.rindex.__getitem__):
                cand = (current - {e_out}) | {e_in}
                if not mat.is_independent(cand):
                    continue
                c = game.cost_on(i, game.res_of(cand), occ)
                if c < cur_cost and (best is None or c < best[0]):
                    best = (c, cand)
        if best is not None:
            return game.players[i], frozenset(best[1])
    return None


def run_lazy_dynamics(
    instance: CongestionInstance, initial: Profile, step_limit: int | None = None
) -> DynamicsTrace:
    """Iterate :func:`lazy_better_response_step` to a fixpoint."""
    _require_unit_matroid(instance)
    game = instance._game
    limit = default_step_limit(instance) if step_limit is None else step_limit
    profile = initial
    moves: list[Move] = []
    seen = {profile.choices: 0}
    while True:
        step = lazy_better_response_step(instance, profile)
        if step is None:
            return DynamicsTrace(initial, tuple(moves), Status.CONVERGED, profile)
        if len(moves) >= limit:
            return DynamicsTrace(initial, tuple(moves), Status.STEP_LIMIT, profile)
        pid, strat = step
        i = game.pindex[pid]
        _, res = _resolve(instance, profile)
        occ = game.occupancy(res)
        old_cost = game.cost_on(i, res[i], occ)
        new_cost = game.cost_on(i, game.res_of(strat), occ)
        moves.append(Move(pid, profile.choices[i], strat, old_cost, new_cost))
        profile = profile.replace(pid, strat)
        if profile.choices in seen:
            return DynamicsTrace(initial, tuple(moves), Status.CYCLE, profile, seen[profile.choices])
        seen[profile.choices] = len(moves)


@dataclass(frozen=True)
class PotentialSignature:
    """Multiset of ``(cost, rank)`` pairs, one per (player, used resource).

    ``cost`` is the resource's cost at the player's position in the queue and
    ``rank`` the player's position on the resource's full priority list.
    """

    elements: tuple[tuple[Fraction, int], ...]

    def below(self, u: Fraction) -> tuple[int, int]:
        """``(count, rank sum)`` of the elements with cost at most ``u``."""
        count = total = 0
        for c, r in self.elements:
            if c <= u:
                count += 1
                total += r
        return count, total

    @property
    def thresholds(self) -> tuple[Fraction, ...]:
        return tuple(sorted({c for c, _ in self.elements}))


def potential_signature(instance: Instance, profile: Profile) -> PotentialSignature:
    game, res = _resolve(instance, profile)
    if any(w != 1 for row in game.weight for w in row):
        raise UnsupportedError("the potential order is defined for unit weights")
    occ = game.occupancy(res)
    elements = []
    for i, used in enumerate(res):
        for r in used:
            rk = game.rank[r]
            position = sum(1 for k in occ[r] if rk[k] <= rk[i])
            elements.append((game.cost[r](Fraction(position)), rk[i]))
    return PotentialSignature(tuple(sorted(elements)))


class Ordering(str, enum.Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"


def potential_compare(instance: Instance, s: Profile, t: Profile) -> Ordering:
    """``LESS`` iff ``s`` precedes ``t`` in the potential order.

    At the smallest cost level where the two signatures disagree, the profile
    with more elements at or below that level is smaller; with equal counts,
    the one with the smaller rank sum is.
    """
    a = potential_signature(instance, s)
    b = potential_signature(instance, t)
    for u in sorted(set(a.thresholds) | set(b.thresholds)):
        ca, ra = a.below(u)
        cb, rb = b.below(u)
        if (ca, ra) == (cb, rb):
            continue
        if ca != cb:
            return Ordering.LESS if ca > cb else Ordering.GREATER
        return Ordering.LESS if ra < rb else Ordering.GREATER
    return Ordering.EQUAL
