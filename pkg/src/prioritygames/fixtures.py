"""Named example games, lower-bound families and hardness gadgets."""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable

from .model import (
    CongestionInstance,
    CostPolynomial,
    DomainError,
    GameInstance,
    Job,
    Machine,
    Player,
    PriorityList,
    Profile,
    Resource,
    as_rational,
    scheduling_instance,
)

DESK_SCALE_TRIPLES = 4


# ---------------------------------------------------------------------------
# small no-equilibrium games


def gstar5() -> GameInstance:
    """Five jobs on three machines without a pure equilibrium."""
    return scheduling_instance(
        {"a": 5, "b": 4, "c": Fraction(9, 2), "d": Fraction(37, 4), "e": 2},
        [("M1", 1, "abcde"), ("M2", 2, "edbca"), ("M3", 2, "edbca")],
    )


def ghat4() -> GameInstance:
    """Four jobs, delays 1, 2, 3, no pure equilibrium."""
    return scheduling_instance(
        {"a": 5, "b": 4, "c": Fraction(13, 3), "d": Fraction(37, 4)},
        [("M1", 1, "abcd"), ("M2", 2, "dbca"), ("M3", 3, "dbca")],
    )


def unrelated3() -> GameInstance:
    """Three jobs on two unrelated machines, no pure equilibrium."""
    table = {"a": (5, 4), "b": (7, 4), "c": (1, 7)}
    weights = {(j, m): w for j, ws in table.items() for m, w in zip(("M1", "M2"), ws)}
    return scheduling_instance(
        {j: 1 for j in table}, [("M1", 1, "abc"), ("M2", 1, "cab")], unrelated=weights
    )


def _cyclic_rank(i: int, j: int, size: int) -> int:
    """``(i + j - 1) mod size`` with residue 0 read as rank ``size``."""
    return (i + j - 1) % size or size


def _order_by_rank(players: list[str], rank: Callable[[int], int]) -> tuple[str, ...]:
    return tuple(p for _, p in sorted((rank(i), p) for i, p in enumerate(players, start=1)))


def _condorcet_gadget(players: list[str], rids: list[str]) -> dict[str, tuple[str, ...]]:
    """Six rotating priority lists over three players."""
    return {rid: _order_by_rank(players, lambda i, j=j: _cyclic_rank(i, j, 3)) for j, rid in enumerate(rids, 1)}


def condorcet() -> CongestionInstance:
    """Three unit players, two disjoint triples, rotating priorities."""
    players = ["p1", "p2", "p3"]
    rids = [f"e{j}" for j in range(1, 7)]
    lists = _condorcet_gadget(players, rids)
    strategies = [frozenset(rids[:3]), frozenset(rids[3:])]
    return CongestionInstance(
        tuple(Player(p, 1, strategies) for p in players),
        tuple(Resource(r, CostPolynomial.linear(1), PriorityList(lists[r])) for r in rids),
    )


def _approx_gadget(p1: str, p2: str, rids: list[str]) -> tuple[dict[str, tuple[str, ...]], list, list]:
    e1, e2, e3, e4 = rids
    lists = {e1: (p2, p1), e3: (p2, p1), e2: (p1, p2), e4: (p1, p2)}
    return lists, [frozenset({e1, e2}), frozenset({e3, e4})], [frozenset({e1, e4}), frozenset({e2, e3})]


def approx32() -> CongestionInstance:
    """Two players whose every profile admits a 3/2-fold improvement."""
    rids = ["e1", "e2", "e3", "e4"]
    lists, s1, s2 = _approx_gadget("p1", "p2", rids)
    cost = CostPolynomial.linear(Fraction(8, 9))
    return CongestionInstance(
        (Player("p1", 1, s1), Player("p2", 1, s2)),
        tuple(Resource(r, cost, PriorityList(lists[r])) for r in rids),
    )


# ---------------------------------------------------------------------------
# lower-bound families


def _positive(value: Any, name: str) -> Fraction:
    v = as_rational(value, name)
    if v <= 0:
        raise DomainError(f"{name} must be positive, got {v}")
    return v


def _int_at_least(value: Any, low: int, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        try:
            value = int(str(value))
        except ValueError:
            raise DomainError(f"{name} must be an integer, got {value!r}") from None
    if value < low:
        raise DomainError(f"{name} must be at least {low}, got {value}")
    return value


def pos_g2(c: Any = 2) -> GameInstance:
    """Two machines with delays 1 and ``c`` whose best equilibrium is far from optimal.

    Above the golden ratio: jobs of weight 1 and ``c``.  Below it: three jobs
    tuned so that the unique equilibrium has makespan ``(1 + 2c) / c``.
    """
    c = as_rational(c, "c")
    if c < 1:
        raise DomainError(f"c must be at least 1, got {c}")
    if c * c > c + 1:
        return scheduling_instance({"a": 1, "b": c}, [("M1", 1, "ab"), ("M2", c, "ab")])
    weights = {"x": 1, "y": (1 + c - c * c) / (c * c), "z": (1 + c) / c}
    return scheduling_instance(weights, [("M1", 1, "xyz"), ("M2", c, "xyz")])


def pos_g3(m: Any = 3) -> GameInstance:
    """A heavy job of weight ``m`` behind ``m(m-1)`` unit jobs on ``m`` equal machines.

    Each machine sees the unit jobs in a different rotation; the heavy job is
    last everywhere.
    """
    m = _int_at_least(m, 2, "m")
    units = [f"u{i}" for i in range(1, m * (m - 1) + 1)]
    weights = {"h": m, **{u: 1 for u in units}}
    step = m - 1
    machines = []
    for r in range(m):
        shift = (r * step) % len(units)
        machines.append((f"M{r + 1}", 1, units[shift:] + units[:shift] + ["h"]))
    return scheduling_instance(weights, machines)


def pos_g3_sumct(m: Any = 2, k: Any = 3, eps: Any = Fraction(1, 1000)) -> GameInstance:
    """``m`` unit jobs, each first on its own machine, then ``(k-1)m`` tiny jobs."""
    m = _int_at_least(m, 2, "m")
    k = _int_at_least(k, 1, "k")
    eps = _positive(eps, "eps")
    units = [f"j{i}" for i in range(1, m + 1)]
    tiny = [f"t{i}" for i in range(1, (k - 1) * m + 1)]
    weights = {**{u: 1 for u in units}, **{t: eps for t in tiny}}
    machines = []
    for i, u in enumerate(units):
        machines.append((f"M{i + 1}", 1, [u] + tiny + [v for v in units if v != u]))
    return scheduling_instance(weights, machines)


def pos_g4_sumct(n: Any = 5, c: Any = 2, eps: Any = Fraction(1, 1000)) -> GameInstance:
    """Global list ``(a, b, tiny jobs)`` on machines with delays 1 and ``c``."""
    n = _int_at_least(n, 2, "n")
    c = as_rational(c, "c")
    if c < 1:
        raise DomainError(f"c must be at least 1, got {c}")
    eps = _positive(eps, "eps")
    tiny = [f"t{i}" for i in range(1, n - 1)]
    weights = {"a": 1, "b": 1 / c, **{t: eps for t in tiny}}
    order = ["a", "b"] + tiny
    return scheduling_instance(weights, [("M1", 1, order), ("M2", c, order)])


def poly_lower(d: Any = 1, k: Any = 2) -> CongestionInstance:
    """``(d+2)k`` unit players on a ring of resources with cost ``x^d``.

    Player ``i`` either takes the ``k`` resources starting at ``e_i`` or the
    following ``(d+1)k`` ones.
    """
    d = _int_at_least(d, 1, "d")
    k = _int_at_least(k, 1, "k")
    n = (d + 2) * k
    pids = [f"p{i}" for i in range(1, n + 1)]
    rids = [f"e{j}" for j in range(1, n + 1)]

    def ring(start: int, length: int) -> frozenset:
        return frozenset(rids[(start - 1 + t) % n] for t in range(length))

    players = tuple(Player(pids[i - 1], 1, [ring(i, k), ring(i + k, (d + 1) * k)]) for i in range(1, n + 1))
    cost = CostPolynomial.monomial(d)
    resources = []
    for j in range(1, n + 1):
        order = _order_by_rank(pids, lambda i, j=j: (j + (d + 1) * k + 1 - i) % n or n)
        resources.append(Resource(rids[j - 1], cost, PriorityList(order)))
    return CongestionInstance(players, tuple(resources))


def poly_lower_profiles(instance: CongestionInstance) -> tuple[Profile, Profile]:
    """``(long, short)``: everyone on the long arc, everyone on the short arc."""
    long_ = {p.id: max(p.strategies, key=len) for p in instance.players}
    short = {p.id: min(p.strategies, key=len) for p in instance.players}
    return instance.profile(long_), instance.profile(short)


def poly_lower_ratio(d: int, k: int) -> Fraction:
    """Closed-form cost ratio of the long-arc and short-arc profiles."""
    return Fraction(sum(j**d for j in range(1, (d + 1) * k + 1)), sum(j**d for j in range(1, k + 1)))


def poly_lower_stability(d: int, k: int) -> bool:
    """Closed-form condition under which the long-arc profile is stable."""
    return sum(j**d for j in range(1, (d + 1) * k + 1)) <= k * ((d + 1) * k + 1) ** d


# ---------------------------------------------------------------------------
# registry


FIXTURES: dict[str, Callable[..., Any]] = {
    "gstar5": gstar5,
    "ghat4": ghat4,
    "unrelated3": unrelated3,
    "condorcet": condorcet,
    "approx32": approx32,
    "pos_g2": pos_g2,
    "pos_g3": pos_g3,
    "pos_g3_sumct": pos_g3_sumct,
    "pos_g4_sumct": pos_g4_sumct,
    "poly_lower": poly_lower,
}

_CALL = re.compile(r"^\s*(\w+)\s*(?:\((.*)\))?\s*$")


def parse_fixture_id(text: str) -> tuple[str, dict[str, str]]:
    """``"pos_g2(c=3/2)"`` -> ``("pos_g2", {"c": "3/2"})``."""
    match = _CALL.match(text)
    if not match:
        raise DomainError(f"malformed fixture id {text!r}")
    name, args = match.group(1), match.group(2)
    params: dict[str, str] = {}
    if args and args.strip():
        for part in args.split(","):
            key, sep, value = part.partition("=")
            if not sep:
                raise DomainError(f"fixture parameters must be key=value, got {part.strip()!r}")
            params[key.strip()] = value.strip()
    return name, params


def build_fixture(fixture: str, **params: Any):
    """Build a named fixture; the id may carry parameters, e.g. ``pos_g3(m=4)``."""
    name, inline = parse_fixture_id(fixture)
    if name not in FIXTURES:
        raise DomainError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}")
    merged = {**inline, **params}
    try:
        return FIXTURES[name](**merged)
    except TypeError as exc:
        raise DomainError(f"bad parameters for {name}: {exc}") from None


# ---------------------------------------------------------------------------
# source problems of the reductions


@dataclass(frozen=True)
class ThreeDMInstance:
    """Triples ``(x, y, z)`` of 1-based indices, each element used at most three times."""

    n: int
    triples: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "triples", tuple(tuple(t) for t in self.triples))
        if self.n < 1:
            raise DomainError("n must be at least 1")
        if len(set(self.triples)) != len(self.triples):
            raise DomainError("duplicate triple")
        if len(self.triples) < self.n:
            raise DomainError("need at least n triples")
        for t in self.triples:
            if len(t) != 3 or not all(isinstance(v, int) and 1 <= v <= self.n for v in t):
                raise DomainError(f"triple {t} has indices outside 1..{self.n}")
        for axis in range(3):
            counts: dict[int, int] = {}
            for t in self.triples:
                counts[t[axis]] = counts.get(t[axis], 0) + 1
            if max(counts.values()) > 3:
                raise DomainError("an element occurs in more than three triples")

    def elements(self, axis: str) -> list[str]:
        return [f"{axis}{i}" for i in range(1, self.n + 1)]


def has_matching(dm: ThreeDMInstance) -> bool:
    """Exhaustive search for ``n`` pairwise disjoint triples."""
    for combo in itertools.combinations(dm.triples, dm.n):
        if all(len({t[axis] for t in combo}) == dm.n for axis in range(3)):
            return True
    return False


def all_3dm_instances(n: int, max_triples: int) -> Iterable[ThreeDMInstance]:
    """Every valid instance with ``n <= |T| <= max_triples`` (triples in lexicographic order)."""
    universe = list(itertools.product(range(1, n + 1), repeat=3))
    for size in range(n, max_triples + 1):
        for combo in itertools.combinations(universe, size):
            try:
                yield ThreeDMInstance(n, combo)
            except DomainError:
                continue


def matching_pair() -> tuple[ThreeDMInstance, ThreeDMInstance]:
    """``(with matching, without matching)`` for n = 2 and three triples."""
    yes = ThreeDMInstance(2, ((1, 1, 1), (2, 2, 2), (1, 2, 2)))
    no = ThreeDMInstance(2, ((1, 1, 1), (2, 2, 1), (1, 2, 2)))
    return yes, no


@dataclass(frozen=True)
class ExactCoverInstance:
    """Equal-size subsets of a universe of ``size * n`` elements."""

    universe: tuple[str, ...]
    sets: tuple[frozenset, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "universe", tuple(self.universe))
        object.__setattr__(self, "sets", tuple(frozenset(s) for s in self.sets))
        if len(set(self.universe)) != len(self.universe):
            raise DomainError("duplicate universe element")
        sizes = {len(s) for s in self.sets}
        if len(sizes) > 1:
            raise DomainError("all subsets must have the same size")
        if not self.sets:
            raise DomainError("at least one subset is required")
        size = sizes.pop()
        if size not in (3, 4):
            raise DomainError(f"subsets must have 3 or 4 elements, got {size}")
        if len(self.universe) % size or not self.universe:
            raise DomainError(f"universe size {len(self.universe)} is not a positive multiple of {size}")
        known = set(self.universe)
        for s in self.sets:
            if not s <= known:
                raise DomainError(f"subset {sorted(s)} leaves the universe")
        if len(set(self.sets)) != len(self.sets):
            raise DomainError("duplicate subset")

    @property
    def set_size(self) -> int:
        return len(self.sets[0])

    @property
    def n(self) -> int:
        return len(self.universe) // self.set_size


def has_exact_cover(xc: ExactCoverInstance) -> bool:
    for combo in itertools.combinations(xc.sets, xc.n):
        if len(frozenset().union(*combo)) == len(xc.universe):
            return True
    return False


# ---------------------------------------------------------------------------
# reductions


def _guard(dm: ThreeDMInstance, allow_large: bool) -> None:
    if not isinstance(dm, ThreeDMInstance):
        raise DomainError("expected a ThreeDMInstance")
    if len(dm.triples) > DESK_SCALE_TRIPLES and not allow_large:
        raise DomainError(
            f"{len(dm.triples)} triples exceed the desk-scale limit of {DESK_SCALE_TRIPLES};"
            " pass allow_large=True to build anyway"
        )


def _build(weights: dict[str, Any], delays: list[Any], lists: list[list[str]]) -> GameInstance:
    jobs = tuple(Job(j, as_rational(w)) for j, w in weights.items())
    machines = tuple(
        Machine(f"M{i}", as_rational(dly), PriorityList(tuple(order)))
        for i, (dly, order) in enumerate(zip(delays, lists), start=1)
    )
    return GameInstance(jobs, machines)


def _rest(order: list[str], everyone: list[str]) -> list[str]:
    seen = set(order)
    return order + [j for j in everyone if j not in seen]


def reduce_3dm_to_ne_existence(
    dm: ThreeDMInstance, eps: Any = Fraction(1, 100), allow_large: bool = False
) -> GameInstance:
    """Scheduling game with an equilibrium iff ``dm`` has a perfect matching.

    Machines 1-3 host the five-job no-equilibrium core; machine 4 is where
    job ``e`` escapes to when the element jobs all fit on triplet machines.
    ``eps`` is accepted for interface symmetry and does not enter the weights.
    """
    _guard(dm, allow_large)
    _positive(eps, "eps")
    T, n = len(dm.triples), dm.n
    X, Y, Z = dm.elements("x"), dm.elements("y"), dm.elements("z")
    D = [f"D{i}" for i in range(1, T - n + 1)]
    U = [f"U{i}" for i in range(1, T + 2)]
    weights: dict[str, Any] = {"a": 5, "b": 4, "c": Fraction(9, 2), "d": Fraction(37, 4), "e": 2, "f": 2}
    weights.update({j: 3 for j in D})
    weights.update({j: 20 for j in U})
    weights.update({j: 1 for j in X + Y + Z})
    lists = [
        ["a", "b", "c", "d", "e", "f", *U, *X, *Y, *Z, *D],
        ["e", "d", "b", "c", "a", "f", *U, *X, *Y, *Z, *D],
        ["e", "d", "b", "c", "a", "f", *U, *X, *Y, *Z, *D],
        ["f", *X, *Y, *Z, "e", *U, *D, "a", "b", "c", "d"],
    ]
    for i, j, k in dm.triples:
        xi, yj, zk = f"x{i}", f"y{j}", f"z{k}"
        lists.append(
            [*D, xi, yj, zk, *U, "f"]
            + [v for v in X if v != xi]
            + [v for v in Y if v != yj]
            + [v for v in Z if v != zk]
            + ["a", "b", "c", "d", "e"]
        )
    delays = [1, 2, 2] + [1] * (T + 1)
    return _build(weights, delays, lists)


def reduce_3dm_to_cmax(
    dm: ThreeDMInstance, eps: Any = Fraction(1, 100), allow_large: bool = False
) -> GameInstance:
    """Equal-delay game whose best equilibrium has makespan ``m + 3 eps`` with a
    matching and at least ``2m - 1`` without one (``m = |T| + 2``)."""
    _guard(dm, allow_large)
    eps = _positive(eps, "eps")
    T, n = len(dm.triples), dm.n
    m = T + 2
    X, Y, Z = dm.elements("x"), dm.elements("y"), dm.elements("z")
    D = [f"D{i}" for i in range(1, T - n + 1)]
    U = [f"U{i}" for i in range(1, (m - 1) ** 2 + 1)]
    weights: dict[str, Any] = {"a": m, "b": m - 1}
    weights.update({j: 3 * eps for j in D})
    weights.update({"d1": 2 * eps, "d2": 2 * eps})
    weights.update({j: 1 for j in U})
    weights.update({j: eps for j in X + Y + Z})
    lists = [
        ["d1", "b", "a", *U, *X, *Y, *Z, *D, "d2"],
        ["d2", *X, *Y, *Z, "b", *U, "a", "d1", *D],
    ]
    for i, j, k in dm.triples:
        xi, yj, zk = f"x{i}", f"y{j}", f"z{k}"
        lists.append(
            [*D, xi, yj, zk, *U]
            + [v for v in X if v != xi]
            + [v for v in Y if v != yj]
            + [v for v in Z if v != zk]
            + ["d1", "d2", "a", "b"]
        )
    return _build(weights, [1] * m, lists)


def sumct_parameters(m: int, r: Any) -> tuple[int, Fraction]:
    """Smallest ``k`` with ``(m + k)/(m + 1) > r`` and ``eps = 1/(k^2 + 4k + 9m + 1)``.

    The denominator also covers the small delays of the ``m`` unit jobs, so the
    matched equilibrium stays within ``m + 1`` in total.
    """
    r = as_rational(r, "r")
    if r <= 1:
        raise DomainError(f"r must exceed 1, got {r}")
    k = max(1, math.floor(r * (m + 1) - m) + 1)
    return k, Fraction(1, k * k + 4 * k + 9 * m + 1)


def reduce_3dm_to_sumct(dm: ThreeDMInstance, r: Any, allow_large: bool = False) -> GameInstance:
    """Equal-delay game whose best equilibrium has total completion time at
    most ``m + 1`` with a matching and more than ``m + k`` without one."""
    _guard(dm, allow_large)
    T, n = len(dm.triples), dm.n
    m = T + 2
    k, eps = sumct_parameters(m, r)
    X, Y, Z = dm.elements("x"), dm.elements("y"), dm.elements("z")
    D = [f"D{i}" for i in range(1, T - n + 1)]
    U = [f"U{i}" for i in range(1, m)]
    K = [f"K{i}" for i in range(1, k + 1)]
    weights: dict[str, Any] = {"a": eps, "b": 1}
    weights.update({j: 3 * eps for j in D})
    weights.update({"d1": 2 * eps, "d2": 2 * eps})
    weights.update({j: 1 for j in U})
    weights.update({j: eps for j in X + Y + Z})
    weights.update({j: eps for j in K})
    everyone = list(weights)
    lists = [
        _rest(["d1", "b", "a", *K, *U], everyone),
        _rest(["d2", *X, *Y, *Z, "b", *U, "a", *K], everyone),
    ]
    for i, j, kk in dm.triples:
        lists.append(_rest([*D, f"x{i}", f"y{j}", f"z{kk}", "a", *U, *K], everyone))
    return _build(weights, [1] * m, lists)


def _congestion(players: list[Player], costs: dict[str, CostPolynomial], lists: dict[str, list[str]]):
    pids = [p.id for p in players]
    resources = tuple(Resource(r, costs[r], PriorityList(tuple(_rest(lists.get(r, []), pids)))) for r in costs)
    return CongestionInstance(tuple(players), resources)


def reduce_4xc_to_congestion(xc: ExactCoverInstance) -> CongestionInstance:
    """Unit-weight congestion game with an equilibrium iff ``xc`` has an exact cover.

    Each block ``k`` has three players on a copy of the rotating-priority
    gadget; its first player may instead take any subset from ``xc``.
    """
    if not isinstance(xc, ExactCoverInstance) or xc.set_size != 4:
        raise DomainError("expected a 4-set exact cover instance")
    unit = CostPolynomial.linear(1)
    costs: dict[str, CostPolynomial] = {u: unit for u in xc.universe}
    lists: dict[str, list[str]] = {}
    players: list[Player] = []
    for k in range(1, xc.n + 1):
        trio = [f"P{r}_{k}" for r in (1, 2, 3)]
        rids = [f"g{k}_{j}" for j in range(1, 7)]
        costs.update({r: unit for r in rids})
        lists.update({r: list(order) for r, order in _condorcet_gadget(trio, rids).items()})
        gadget = [frozenset(rids[:3]), frozenset(rids[3:])]
        players.append(Player(trio[0], 1, list(xc.sets) + gadget))
        players.extend(Player(p, 1, gadget) for p in trio[1:])
    return _congestion(players, costs, lists)


def reduce_3xc_to_approx(xc: ExactCoverInstance) -> CongestionInstance:
    """Game with a 3/2-approximate equilibrium iff ``xc`` has an exact cover,
    and no (3/2 - delta)-approximate one otherwise."""
    if not isinstance(xc, ExactCoverInstance) or xc.set_size != 3:
        raise DomainError("expected a 3-set exact cover instance")
    costs: dict[str, CostPolynomial] = {u: CostPolynomial.linear(Fraction(201, 300)) for u in xc.universe}
    lists: dict[str, list[str]] = {}
    players: list[Player] = []
    gadget_cost = CostPolynomial.linear(Fraction(8, 9))
    for k in range(1, xc.n + 1):
        p1, p2 = f"P1_{k}", f"P2_{k}"
        rids = [f"g{k}_{j}" for j in range(1, 5)]
        glists, s1, s2 = _approx_gadget(p1, p2, rids)
        costs.update({r: gadget_cost for r in rids})
        lists.update({r: list(v) for r, v in glists.items()})
        players.append(Player(p1, 1, list(xc.sets) + s1))
        players.append(Player(p2, 1, s2))
    return _congestion(players, costs, lists)


def cover_profile(instance: CongestionInstance, xc: ExactCoverInstance) -> Profile | None:
    """Profile induced by the first exact cover found, or ``None``.

    First players take the cover sets; in each block the remaining players
    take the gadget strategies in turn.
    """
    for combo in itertools.combinations(xc.sets, xc.n):
        if len(frozenset().union(*combo)) != len(xc.universe):
            continue
        choice: dict[str, Any] = {}
        for k, subset in enumerate(combo, start=1):
            choice[f"P1_{k}"] = subset
            others = [p for p in instance.players if p.id.endswith(f"_{k}") and p.id != f"P1_{k}"]
            for idx, p in enumerate(others):
                choice[p.id] = p.strategies[idx % len(p.strategies)]
        return instance.profile(choice)
    return None
