"""Game instances, profiles and the two cost semantics.

Two kinds of instance live here:

* :class:`GameInstance` -- jobs choose a single machine; a job's cost is its
  completion time, ``delay * (weight of the co-located jobs that precede it,
  itself included)``.
* :class:`CongestionInstance` -- players choose subsets of resources; a
  player's cost is ``weight * sum(cost_e(load of predecessors on e))``.

Both are compiled into a shared integer-indexed view (:class:`_Game`) that the
equilibrium, construction and metric code runs on.  All numbers are
:class:`fractions.Fraction`; nothing in this package touches floats.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence, Union

Rational = Fraction


class GameError(Exception):
    """Base class for every error raised by this package."""


class InvalidReferenceError(GameError, KeyError):
    """Unknown player, machine or resource id."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "invalid reference"


class DomainError(GameError, ValueError):
    """A numeric argument outside the operation's domain."""


class UnsupportedError(GameError):
    """The operation does not apply to this kind or class of instance."""


class ValidationError(GameError, ValueError):
    """An instance or document violates a structural invariant.

    ``path`` names the offending location, e.g. ``machines[1].priority``.
    """

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class BudgetExceededError(GameError):
    """Exhaustive scan refused because the profile space is too large."""

    def __init__(self, count: int, budget: int):
        super().__init__(f"profile space has {count} profiles, budget is {budget}")
        self.count = count
        self.budget = budget


def as_rational(value: Any, path: str = "") -> Fraction:
    """Coerce ints, Fractions and strings like ``"37/4"`` or ``"9.25"``.

    Floats are rejected: they would silently round exact inputs.
    """
    if isinstance(value, bool):
        raise ValidationError("booleans are not numbers", path)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational: {value!r}", path) from exc
    raise ValidationError(f"expected int or rational string, got {type(value).__name__}", path)


@dataclass(frozen=True)
class PriorityList:
    """A total order over player ids; earlier means processed first."""

    order: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "order", tuple(self.order))
        if len(set(self.order)) != len(self.order):
            raise ValidationError("priority list repeats an id")

    @cached_property
    def rank(self) -> dict[str, int]:
        return {pid: pos for pos, pid in enumerate(self.order, start=1)}

    def rank_of(self, pid: str) -> int:
        try:
            return self.rank[pid]
        except KeyError:
            raise InvalidReferenceError(f"{pid!r} is not on the priority list") from None

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self) -> Iterator[str]:
        return iter(self.order)


@dataclass(frozen=True)
class CostPolynomial:
    """Polynomial with nonnegative coefficients; ``coefficients[k]`` multiplies x**k."""

    coefficients: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        coeffs = [as_rational(c) for c in self.coefficients]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        if not coeffs:
            coeffs = [Fraction(0)]
        if any(c < 0 for c in coeffs):
            raise ValidationError("cost polynomial coefficients must be nonnegative")
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @classmethod
    def linear(cls, slope: Any) -> CostPolynomial:
        return cls((Fraction(0), as_rational(slope)))

    @classmethod
    def monomial(cls, degree: int, coefficient: Any = 1) -> CostPolynomial:
        return cls(tuple([Fraction(0)] * degree + [as_rational(coefficient)]))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_affine(self) -> bool:
        return self.degree <= 1

    def __call__(self, load: Fraction) -> Fraction:
        return eval_cost_polynomial(self, load)


def eval_cost_polynomial(poly: CostPolynomial, load: Any) -> Fraction:
    """Horner evaluation; loads are never negative."""
    x = as_rational(load)
    if x < 0:
        raise DomainError(f"negative load {x}")
    acc = Fraction(0)
    for c in reversed(poly.coefficients):
        acc = acc * x + c
    return acc


# ---------------------------------------------------------------------------
# scheduling form


@dataclass(frozen=True)
class Job:
    id: str
    weight: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "weight", as_rational(self.weight, f"jobs[{self.id}].weight"))


@dataclass(frozen=True)
class Machine:
    id: str
    delay: Fraction
    priority: PriorityList

    def __post_init__(self) -> None:
        object.__setattr__(self, "delay", as_rational(self.delay, f"machines[{self.id}].delay"))
        if not isinstance(self.priority, PriorityList):
            object.__setattr__(self, "priority", PriorityList(tuple(self.priority)))


@dataclass(frozen=True)
class GameInstance:
    """Scheduling game with machine-dependent priority lists.

    ``unrelated_weights`` maps ``(job id, machine id)`` to the job's weight on
    that machine; when given it must cover every pair.
    """

    jobs: tuple[Job, ...]
    machines: tuple[Machine, ...]
    unrelated_weights: Mapping[tuple[str, str], Fraction] | None = None

    kind = "scheduling"

    def __post_init__(self) -> None:
        object.__setattr__(self, "jobs", tuple(self.jobs))
        object.__setattr__(self, "machines", tuple(self.machines))
        if not self.jobs:
            raise ValidationError("at least one job is required", "jobs")
        if not self.machines:
            raise ValidationError("at least one machine is required", "machines")
        job_ids = [j.id for j in self.jobs]
        if len(set(job_ids)) != len(job_ids):
            raise ValidationError("duplicate job id", "jobs")
        machine_ids = [m.id for m in self.machines]
        if len(set(machine_ids)) != len(machine_ids):
            raise ValidationError("duplicate machine id", "machines")
        for pos, job in enumerate(self.jobs):
            if job.weight <= 0:
                raise ValidationError("weight must be positive", f"jobs[{pos}].weight")
        ids = set(job_ids)
        for pos, mach in enumerate(self.machines):
            if mach.delay <= 0:
                raise ValidationError("delay must be positive", f"machines[{pos}].delay")
            if set(mach.priority.order) != ids or len(mach.priority) != len(ids):
                missing = sorted(ids - set(mach.priority.order))
                extra = sorted(set(mach.priority.order) - ids)
                raise ValidationError(
                    f"priority list of machine {mach.id!r} is not a permutation of the jobs"
                    f" (missing {missing}, unknown {extra})",
                    f"machines[{pos}].priority",
                )
        if self.unrelated_weights is not None:
            table = {}
            for (jid, mid), w in dict(self.unrelated_weights).items():
                table[(jid, mid)] = as_rational(w, f"unrelated_weights[{jid}][{mid}]")
            expected = {(j, m) for j in job_ids for m in machine_ids}
            if set(table) != expected:
                raise ValidationError(
                    "unrelated weights must cover every (job, machine) pair", "unrelated_weights"
                )
            if any(w <= 0 for w in table.values()):
                raise ValidationError("unrelated weights must be positive", "unrelated_weights")
            object.__setattr__(self, "unrelated_weights", table)

    @property
    def player_ids(self) -> tuple[str, ...]:
        return tuple(j.id for j in self.jobs)

    @property
    def n(self) -> int:
        return len(self.jobs)

    @property
    def m(self) -> int:
        return len(self.machines)

    def job(self, jid: str) -> Job:
        for j in self.jobs:
            if j.id == jid:
                return j
        raise InvalidReferenceError(f"unknown job {jid!r}")

    def machine(self, mid: str) -> Machine:
        for mach in self.machines:
            if mach.id == mid:
                return mach
        raise InvalidReferenceError(f"unknown machine {mid!r}")

    def weight_on(self, jid: str, mid: str) -> Fraction:
        if self.unrelated_weights is not None:
            try:
                return self.unrelated_weights[(jid, mid)]
            except KeyError:
                raise InvalidReferenceError(f"unknown pair ({jid!r}, {mid!r})") from None
        return self.job(jid).weight

    def strategies(self, pid: str) -> tuple[str, ...]:
        self.job(pid)
        return tuple(m.id for m in self.machines)

    def profile(self, assignment: Mapping[str, Any]) -> Profile:
        return Profile.from_mapping(self, assignment)

    def profile_count(self) -> int:
        return self.m ** self.n

    @cached_property
    def _game(self) -> _Game:
        return _Game.from_scheduling(self)


# ---------------------------------------------------------------------------
# matroid strategy descriptors


def _is_basis(matroid: Any, subset: frozenset) -> bool:
    return len(subset) == matroid.rank and subset <= frozenset(matroid.ground) and matroid.is_independent(subset)


@dataclass(frozen=True)
class UniformMatroid:
    """Every ``k``-subset of ``ground`` is a basis.

    ``ground=None`` means "all resources of the instance" and is resolved when
    the owning :class:`CongestionInstance` is built.
    """

    k: int
    ground: tuple[str, ...] | None = None

    kind = "uniform"

    def __post_init__(self) -> None:
        if self.ground is not None:
            object.__setattr__(self, "ground", tuple(self.ground))
            if self.k < 1 or self.k > len(self.ground):
                raise ValidationError(f"uniform rank {self.k} outside 1..{len(self.ground)}")

    @property
    def rank(self) -> int:
        return self.k

    def is_independent(self, subset: Iterable[str]) -> bool:
        s = set(subset)
        return len(s) <= self.k and s <= set(self.ground or ())

    def bases(self) -> Iterator[frozenset]:
        for combo in itertools.combinations(self.ground or (), self.k):
            yield frozenset(combo)

    def with_ground(self, ground: tuple[str, ...]) -> UniformMatroid:
        return UniformMatroid(self.k, ground) if self.ground is None else self


@dataclass(frozen=True)
class PartitionMatroid:
    """Independent iff at most ``quotas[b]`` elements come from block ``b``."""

    blocks: tuple[tuple[str, ...], ...]
    quotas: tuple[int, ...]

    kind = "partition"

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", tuple(tuple(b) for b in self.blocks))
        object.__setattr__(self, "quotas", tuple(self.quotas))
        if len(self.blocks) != len(self.quotas):
            raise ValidationError("partition matroid needs one quota per block")
        seen: set[str] = set()
        for block, quota in zip(self.blocks, self.quotas):
            if seen & set(block):
                raise ValidationError("partition blocks overlap")
            seen |= set(block)
            if quota < 0 or quota > len(block):
                raise ValidationError(f"quota {quota} outside 0..{len(block)}")
        if self.rank < 1:
            raise ValidationError("partition matroid has rank 0")

    @property
    def ground(self) -> tuple[str, ...]:
        return tuple(e for block in self.blocks for e in block)

    @property
    def rank(self) -> int:
        return sum(self.quotas)

    def is_independent(self, subset: Iterable[str]) -> bool:
        s = set(subset)
        if not s <= set(self.ground):
            return False
        return all(len(s & set(b)) <= q for b, q in zip(self.blocks, self.quotas))

    def bases(self) -> Iterator[frozenset]:
        per_block = [itertools.combinations(b, q) for b, q in zip(self.blocks, self.quotas)]
        for parts in itertools.product(*[list(p) for p in per_block]):
            yield frozenset(e for part in parts for e in part)

    def with_ground(self, ground: tuple[str, ...]) -> PartitionMatroid:
        return self


@dataclass(frozen=True)
class BasesMatroid:
    """Matroid given by its list of bases; the exchange axiom is checked."""

    basis_list: tuple[frozenset, ...]

    kind = "bases"

    def __post_init__(self) -> None:
        bases = tuple(dict.fromkeys(frozenset(b) for b in self.basis_list))
        if not bases:
            raise ValidationError("a matroid needs at least one basis")
        sizes = {len(b) for b in bases}
        if len(sizes) != 1 or 0 in sizes:
            raise ValidationError("bases must be non-empty and of equal size")
        bset = set(bases)
        for a in bases:
            for b in bases:
                for x in a - b:
                    if not any((a - {x}) | {y} in bset for y in b - a):
                        raise ValidationError("listed sets violate the basis exchange axiom")
        object.__setattr__(self, "basis_list", bases)

    @property
    def ground(self) -> tuple[str, ...]:
        return tuple(sorted(set().union(*self.basis_list)))

    @property
    def rank(self) -> int:
        return len(self.basis_list[0])

    def is_independent(self, subset: Iterable[str]) -> bool:
        s = frozenset(subset)
        return any(s <= b for b in self.basis_list)

    def bases(self) -> Iterator[frozenset]:
        return iter(self.basis_list)

    def with_ground(self, ground: tuple[str, ...]) -> BasesMatroid:
        return self


Matroid = Union[UniformMatroid, PartitionMatroid, BasesMatroid]
MATROID_TYPES = (UniformMatroid, PartitionMatroid, BasesMatroid)


# ---------------------------------------------------------------------------
# congestion form


@dataclass(frozen=True)
class Resource:
    id: str
    cost: CostPolynomial
    priority: PriorityList

    def __post_init__(self) -> None:
        if not isinstance(self.cost, CostPolynomial):
            object.__setattr__(self, "cost", CostPolynomial(tuple(self.cost)))
        if not isinstance(self.priority, PriorityList):
            object.__setattr__(self, "priority", PriorityList(tuple(self.priority)))


@dataclass(frozen=True)
class Player:
    """A player with explicit strategies (tuple of resource sets) or a matroid."""

    id: str
    weight: Fraction
    strategies: Any

    def __post_init__(self) -> None:
        object.__setattr__(self, "weight", as_rational(self.weight, f"players[{self.id}].weight"))
        if not isinstance(self.strategies, MATROID_TYPES):
            strategies = tuple(dict.fromkeys(frozenset(s) for s in self.strategies))
            object.__setattr__(self, "strategies", strategies)

    @property
    def matroid(self) -> Matroid | None:
        return self.strategies if isinstance(self.strategies, MATROID_TYPES) else None


@dataclass(frozen=True)
class CongestionInstance:
    """Congestion game with resource-dependent priority lists."""

    players: tuple[Player, ...]
    resources: tuple[Resource, ...]

    kind = "congestion"

    def __post_init__(self) -> None:
        object.__setattr__(self, "players", tuple(self.players))
        object.__setattr__(self, "resources", tuple(self.resources))
        if not self.players:
            raise ValidationError("at least one player is required", "players")
        if not self.resources:
            raise ValidationError("at least one resource is required", "resources")
        pids = [p.id for p in self.players]
        if len(set(pids)) != len(pids):
            raise ValidationError("duplicate player id", "players")
        rids = [r.id for r in self.resources]
        if len(set(rids)) != len(rids):
            raise ValidationError("duplicate resource id", "resources")
        ids, rset = set(pids), set(rids)
        for pos, res in enumerate(self.resources):
            if set(res.priority.order) != ids or len(res.priority) != len(ids):
                raise ValidationError(
                    f"priority list of resource {res.id!r} is not a permutation of the players",
                    f"resources[{pos}].priority",
                )
        fixed = []
        for pos, player in enumerate(self.players):
            path = f"players[{pos}]"
            if player.weight <= 0:
                raise ValidationError("weight must be positive", f"{path}.weight")
            mat = player.matroid
            if mat is not None:
                mat = mat.with_ground(tuple(rids))
                if not set(mat.ground) <= rset:
                    raise ValidationError("matroid ground set names unknown resources", f"{path}.strategies")
                player = Player(player.id, player.weight, mat)
            else:
                if not player.strategies:
                    raise ValidationError("strategy set is empty", f"{path}.strategies")
                for k, strat in enumerate(player.strategies):
                    if not strat:
                        raise ValidationError("strategies must be non-empty", f"{path}.strategies[{k}]")
                    if not strat <= rset:
                        raise ValidationError(
                            f"unknown resources {sorted(strat - rset)}", f"{path}.strategies[{k}]"
                        )
            fixed.append(player)
        object.__setattr__(self, "players", tuple(fixed))

    @property
    def player_ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.players)

    @property
    def n(self) -> int:
        return len(self.players)

    @property
    def m(self) -> int:
        return len(self.resources)

    def player(self, pid: str) -> Player:
        for p in self.players:
            if p.id == pid:
                return p
        raise InvalidReferenceError(f"unknown player {pid!r}")

    def resource(self, rid: str) -> Resource:
        for r in self.resources:
            if r.id == rid:
                return r
        raise InvalidReferenceError(f"unknown resource {rid!r}")

    def strategies(self, pid: str) -> tuple[frozenset, ...]:
        """All strategies of ``pid``; matroid bases are enumerated on demand."""
        return self._game.strategies[self._game.pindex[pid]]

    def is_strategy(self, pid: str, strategy: Iterable[str]) -> bool:
        player = self.player(pid)
        s = frozenset(strategy)
        mat = player.matroid
        if mat is not None:
            return _is_basis(mat, s)
        return s in player.strategies

    def profile(self, assignment: Mapping[str, Any]) -> Profile:
        return Profile.from_mapping(self, assignment)

    def profile_count(self) -> int:
        count = 1
        for p in self.players:
            if p.matroid is None:
                count *= len(p.strategies)
            else:
                count *= len(self.strategies(p.id))
        return count

    @property
    def is_matroid_game(self) -> bool:
        return all(p.matroid is not None for p in self.players)

    @property
    def has_unit_weights(self) -> bool:
        return all(p.weight == 1 for p in self.players)

    @cached_property
    def _game(self) -> _Game:
        return _Game.from_congestion(self)


Instance = Union[GameInstance, CongestionInstance]


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class Profile:
    """One strategy per player, aligned with ``players``.

    Strategies are machine ids for scheduling games and frozensets of resource
    ids for congestion games.
    """

    players: tuple[str, ...]
    choices: tuple

    @classmethod
    def from_mapping(cls, instance: Instance, assignment: Mapping[str, Any]) -> Profile:
        pids = instance.player_ids
        unknown = set(assignment) - set(pids)
        if unknown:
            raise InvalidReferenceError(f"unknown players {sorted(unknown)}")
        missing = [p for p in pids if p not in assignment]
        if missing:
            raise ValidationError(f"profile leaves players unassigned: {missing}", "profile")
        choices = []
        for pid in pids:
            raw = assignment[pid]
            if isinstance(instance, GameInstance):
                if raw not in {m.id for m in instance.machines}:
                    raise InvalidReferenceError(f"player {pid!r} assigned to unknown machine {raw!r}")
                choices.append(raw)
            else:
                strat = frozenset([raw] if isinstance(raw, str) else raw)
                if not instance.is_strategy(pid, strat):
                    raise ValidationError(
                        f"{sorted(strat)} is not a strategy of player {pid!r}", f"profile.{pid}"
                    )
                choices.append(strat)
        return cls(pids, tuple(choices))

    def __getitem__(self, pid: str) -> Any:
        try:
            return self.choices[self.players.index(pid)]
        except ValueError:
            raise InvalidReferenceError(f"unknown player {pid!r}") from None

    def as_dict(self) -> dict[str, Any]:
        return dict(zip(self.players, self.choices))

    def replace(self, pid: str, strategy: Any) -> Profile:
        idx = self.players.index(pid)
        choices = list(self.choices)
        choices[idx] = frozenset(strategy) if isinstance(strategy, (set, frozenset, list, tuple)) else strategy
        return Profile(self.players, tuple(choices))

    def __repr__(self) -> str:
        def show(s: Any) -> str:
            return "{" + ",".join(sorted(s)) + "}" if isinstance(s, frozenset) else str(s)

        body = ", ".join(f"{p}->{show(s)}" for p, s in zip(self.players, self.choices))
        return f"Profile({body})"


# ---------------------------------------------------------------------------
# compiled view shared by every algorithm


class _Game:
    """Integer-indexed view of an instance.

    Players and resources are numbered in declaration order.  A machine is a
    resource; a scheduling strategy is the one-element tuple of its index.
    ``weight[i][r]`` is what player ``i`` adds to the load of ``r`` and
    ``mult[i]`` multiplies player ``i``'s summed resource costs.
    """

    def __init__(
        self,
        instance: Instance,
        players: tuple[str, ...],
        resources: tuple[str, ...],
        rank: list[list[int]],
        weight: list[list[Fraction]],
        mult: list[Fraction],
        cost: list[Callable[[Fraction], Fraction]],
        matroids: list[Matroid | None],
        explicit: list[tuple[frozenset, ...] | None],
    ):
        self.instance = instance
        self.players = players
        self.resources = resources
        self.n = len(players)
        self.R = len(resources)
        self.pindex = {p: i for i, p in enumerate(players)}
        self.rindex = {r: k for k, r in enumerate(resources)}
        self.rank = rank
        self.weight = weight
        self.mult = mult
        self.cost = cost
        self.matroids = matroids
        self._explicit = explicit
        self.scheduling = isinstance(instance, GameInstance)
        self.coefficients: list[tuple[Fraction, ...]] = []

    @classmethod
    def from_scheduling(cls, inst: GameInstance) -> _Game:
        players = inst.player_ids
        resources = tuple(m.id for m in inst.machines)
        rank = [[m.priority.rank[p] for p in players] for m in inst.machines]
        weight = [[inst.weight_on(p, r) for r in resources] for p in players]
        mult = [Fraction(1)] * len(players)
        cost = [_linear(m.delay) for m in inst.machines]
        explicit = [tuple(resources) for _ in players]
        game = cls(inst, players, resources, rank, weight, mult, cost, [None] * len(players), explicit)
        game.coefficients = [(Fraction(0), m.delay) for m in inst.machines]
        return game

    @classmethod
    def from_congestion(cls, inst: CongestionInstance) -> _Game:
        players = inst.player_ids
        resources = tuple(r.id for r in inst.resources)
        rank = [[r.priority.rank[p] for p in players] for r in inst.resources]
        weight = [[p.weight] * len(resources) for p in inst.players]
        mult = [p.weight for p in inst.players]
        cost = [_horner(r.cost.coefficients) for r in inst.resources]
        matroids = [p.matroid for p in inst.players]
        explicit = [None if p.matroid is not None else p.strategies for p in inst.players]
        game = cls(inst, players, resources, rank, weight, mult, cost, matroids, explicit)
        game.coefficients = [tuple(r.cost.coefficients) for r in inst.resources]
        return game

    @cached_property
    def strategies(self) -> tuple[tuple, ...]:
        out = []
        for i in range(self.n):
            mat = self.matroids[i]
            if mat is None:
                out.append(tuple(self._explicit[i]))
            else:
                order = self.rindex
                bases = sorted(mat.bases(), key=lambda b: sorted(order[e] for e in b))
                out.append(tuple(bases))
        return tuple(out)

    @cached_property
    def strategy_resources(self) -> tuple[tuple[tuple[int, ...], ...], ...]:
        return tuple(tuple(self.res_of(s) for s in strats) for strats in self.strategies)

    def res_of(self, strategy: Any) -> tuple[int, ...]:
        if self.scheduling:
            return (self.rindex[strategy],)
        return tuple(sorted(self.rindex[e] for e in strategy))

    def occupancy(self, res_choices: Sequence[tuple[int, ...]]) -> list[list[int]]:
        occ: list[list[int]] = [[] for _ in range(self.R)]
        for i, res in enumerate(res_choices):
            for r in res:
                occ[r].append(i)
        return occ

    def cost_on(self, i: int, res: Iterable[int], occ: Sequence[Sequence[int]]) -> Fraction:
        """Cost of player ``i`` using ``res`` against the others in ``occ``."""
        total = Fraction(0)
        wi = self.weight[i]
        for r in res:
            rk = self.rank[r]
            mine = rk[i]
            w = self.weight
            load = wi[r]
            for k in occ[r]:
                if k != i and rk[k] < mine:
                    load += w[k][r]
            total += self.cost[r](load)
        return total * self.mult[i]

    def count_strategies(self) -> int:
        count = 1
        for strats in self.strategies:
            count *= len(strats)
        return count


def _linear(delay: Fraction) -> Callable[[Fraction], Fraction]:
    return lambda load: delay * load


def _horner(coefficients: tuple[Fraction, ...]) -> Callable[[Fraction], Fraction]:
    def cost(load: Fraction) -> Fraction:
        acc = Fraction(0)
        for c in reversed(coefficients):
            acc = acc * load + c
        return acc

    return cost


def _game_of(instance: Instance) -> _Game:
    return instance._game


def _resolve(instance: Instance, profile: Profile) -> tuple[_Game, list[tuple[int, ...]]]:
    game = _game_of(instance)
    if profile.players != game.players:
        raise ValidationError("profile does not match the instance's players", "profile")
    return game, [game.res_of(s) for s in profile.choices]


def predecessors(instance: Instance, profile: Profile, player: str, resource: str | None = None) -> set[str]:
    """Players sharing ``resource`` with ``player`` that are not behind it.

    For scheduling games ``resource`` defaults to the player's machine.  The
    player itself is always included.
    """
    game, res = _resolve(instance, profile)
    if player not in game.pindex:
        raise InvalidReferenceError(f"unknown player {player!r}")
    i = game.pindex[player]
    if resource is None:
        if not game.scheduling:
            raise GameError("congestion predecessors need a resource")
        r = res[i][0]
    else:
        if resource not in game.rindex:
            raise InvalidReferenceError(f"unknown resource {resource!r}")
        r = game.rindex[resource]
        if r not in res[i]:
            raise InvalidReferenceError(f"player {player!r} does not use {resource!r}")
    rk = game.rank[r]
    return {game.players[k] for k, used in enumerate(res) if r in used and rk[k] <= rk[i]}


def job_cost(instance: GameInstance, profile: Profile, job: str) -> Fraction:
    """Completion time of ``job``: delay times the weight ahead of it, itself included."""
    if not isinstance(instance, GameInstance):
        raise UnsupportedError("job_cost applies to scheduling instances")
    game, res = _resolve(instance, profile)
    if job not in game.pindex:
        raise InvalidReferenceError(f"unknown job {job!r}")
    i = game.pindex[job]
    return game.cost_on(i, res[i], game.occupancy(res))


def player_cost(instance: CongestionInstance, profile: Profile, player: str) -> Fraction:
    """``weight * sum of cost_e(predecessor load on e)`` over the chosen resources."""
    if not isinstance(instance, CongestionInstance):
        raise UnsupportedError("player_cost applies to congestion instances")
    game, res = _resolve(instance, profile)
    if player not in game.pindex:
        raise InvalidReferenceError(f"unknown player {player!r}")
    i = game.pindex[player]
    return game.cost_on(i, res[i], game.occupancy(res))


def cost_of(instance: Instance, profile: Profile, player: str) -> Fraction:
    """Cost under whichever semantics the instance uses."""
    if isinstance(instance, GameInstance):
        return job_cost(instance, profile, player)
    return player_cost(instance, profile, player)


def all_costs(instance: Instance, profile: Profile) -> dict[str, Fraction]:
    game, res = _resolve(instance, profile)
    occ = game.occupancy(res)
    return {p: game.cost_on(i, res[i], occ) for i, p in enumerate(game.players)}


def scheduling_instance(
    weights: Mapping[str, Any] | Sequence[tuple[str, Any]],
    machines: Sequence[tuple[str, Any, Sequence[str]]],
    unrelated: Mapping[tuple[str, str], Any] | None = None,
) -> GameInstance:
    """Shorthand: ``scheduling_instance({"a": 5}, [("M1", 1, "ab")])``."""
    items = weights.items() if isinstance(weights, Mapping) else weights
    jobs = tuple(Job(j, as_rational(w)) for j, w in items)
    machs = tuple(Machine(mid, as_rational(d), PriorityList(tuple(order))) for mid, d, order in machines)
    return GameInstance(jobs, machs, unrelated)

