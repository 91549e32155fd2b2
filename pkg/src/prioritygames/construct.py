"""Direct equilibrium constructions for the classes where one always exists."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .equilibria import DynamicsPolicy, is_nash, run_dynamics
from .model import (
    CongestionInstance,
    GameError,
    GameInstance,
    Instance,
    Profile,
    UnsupportedError,
)


class ClassTag(str, enum.Enum):
    G1 = "G1-unit-weights"
    G2 = "G2-two-machines"
    G3 = "G3-identical-delays"
    G4 = "G4-global-list"
    MATROID_UNIT = "MatroidUnit"

    @property
    def short(self) -> str:
        return {"MatroidUnit": "matroid"}.get(self.value, self.value[:2].lower())


def _related(instance: GameInstance) -> bool:
    """Unrelated weights that never depend on the machine are still related."""
    if instance.unrelated_weights is None:
        return True
    return all(
        len({instance.weight_on(j.id, m.id) for m in instance.machines}) == 1 for j in instance.jobs
    )


def classify(instance: Instance) -> set[ClassTag]:
    """Every class whose defining predicate the instance satisfies.

    The four scheduling classes are defined for related machines, so a
    scheduling instance whose weights depend on the machine gets no tag.
    """
    tags: set[ClassTag] = set()
    if isinstance(instance, CongestionInstance):
        if instance.is_matroid_game and instance.has_unit_weights:
            tags.add(ClassTag.MATROID_UNIT)
        return tags
    if not _related(instance):
        return tags
    if len({instance.weight_on(j.id, instance.machines[0].id) for j in instance.jobs}) == 1:
        tags.add(ClassTag.G1)
    if instance.m == 2:
        tags.add(ClassTag.G2)
    if len({m.delay for m in instance.machines}) == 1:
        tags.add(ClassTag.G3)
    if len({m.priority.order for m in instance.machines}) == 1:
        tags.add(ClassTag.G4)
    return tags


def _require(instance: Instance, tag: ClassTag) -> GameInstance | CongestionInstance:
    if tag not in classify(instance):
        raise UnsupportedError(f"instance is not in class {tag.value}")
    return instance


def _checked(instance: Instance, profile: Profile) -> Profile:
    verdict = is_nash(instance, profile)
    if not verdict:
        raise GameError(f"construction produced a non-equilibrium: {verdict.witness}")
    return profile


def _weight(instance: GameInstance, jid: str) -> Fraction:
    return instance.weight_on(jid, instance.machines[0].id)


# ---------------------------------------------------------------------------
# two machines


def _fast_slow(instance: GameInstance):
    m1, m2 = instance.machines
    return (m1, m2) if m1.delay <= m2.delay else (m2, m1)


def ne_two_machines(instance: GameInstance) -> Profile:
    """Everyone starts on the fast machine; then, in the slow machine's
    priority order, each job moves over iff that strictly lowers its cost."""
    if not isinstance(instance, GameInstance) or instance.m != 2:
        raise UnsupportedError("the two-machine construction needs exactly two machines")
    _require(instance, ClassTag.G2)
    fast, slow = _fast_slow(instance)
    on_fast = set(instance.player_ids)
    on_slow: set[str] = set()

    def cost(machine, jid, members) -> Fraction:
        rank = machine.priority.rank
        load = sum((_weight(instance, k) for k in members if rank[k] < rank[jid]), Fraction(0))
        return machine.delay * (load + _weight(instance, jid))

    for jid in slow.priority.order:
        if cost(slow, jid, on_slow) < cost(fast, jid, on_fast):
            on_fast.discard(jid)
            on_slow.add(jid)
    profile = instance.profile({j: (slow.id if j in on_slow else fast.id) for j in instance.player_ids})
    return _checked(instance, profile)


def migration_claims(instance: GameInstance, profile: Profile) -> tuple[bool, bool]:
    """Whether no fast-machine job and no slow-machine job gains by switching."""
    from .model import job_cost

    fast, slow = _fast_slow(instance)
    ok = {fast.id: True, slow.id: True}
    for jid in instance.player_ids:
        here = profile[jid]
        there = slow.id if here == fast.id else fast.id
        if job_cost(instance, profile.replace(jid, there), jid) < job_cost(instance, profile, jid):
            ok[here] = False
    return ok[fast.id], ok[slow.id]


# ---------------------------------------------------------------------------
# equal weights


def ne_greedy_singleton(instance: GameInstance) -> Profile:
    """Fill the machine where the next job would finish earliest with that
    machine's favourite remaining job."""
    if not isinstance(instance, GameInstance):
        raise UnsupportedError("the equal-weight greedy needs a scheduling instance")
    _require(instance, ClassTag.G1)
    w = _weight(instance, instance.jobs[0].id)
    count = {m.id: 0 for m in instance.machines}
    pending = set(instance.player_ids)
    assign: dict[str, str] = {}
    while pending:
        machine = min(instance.machines, key=lambda m: m.delay * w * (count[m.id] + 1))
        jid = next(j for j in machine.priority.order if j in pending)
        assign[jid] = machine.id
        count[machine.id] += 1
        pending.remove(jid)
    return _checked(instance, instance.profile(assign))


# ---------------------------------------------------------------------------
# equal delays


def ne_identical_machines(instance: GameInstance, polish: DynamicsPolicy | None = None) -> Profile:
    """Least-loaded machine takes its favourite remaining job, then best
    responses settle whatever the greedy left unstable."""
    if not isinstance(instance, GameInstance):
        raise UnsupportedError("the equal-delay greedy needs a scheduling instance")
    _require(instance, ClassTag.G3)
    load = {m.id: Fraction(0) for m in instance.machines}
    pending = set(instance.player_ids)
    assign: dict[str, str] = {}
    while pending:
        machine = min(instance.machines, key=lambda m: load[m.id])
        jid = next(j for j in machine.priority.order if j in pending)
        assign[jid] = machine.id
        load[machine.id] += _weight(instance, jid)
        pending.remove(jid)
    trace = run_dynamics(instance, instance.profile(assign), polish)
    if not trace.converged:
        raise GameError(f"best-response polish ended with {trace.status.value}")
    return _checked(instance, trace.final)


# ---------------------------------------------------------------------------
# one shared priority list


def ne_global_list(instance: GameInstance) -> Profile:
    """List scheduling in the common priority order."""
    if not isinstance(instance, GameInstance):
        raise UnsupportedError("list scheduling needs a scheduling instance")
    _require(instance, ClassTag.G4)
    load = {m.id: Fraction(0) for m in instance.machines}
    assign: dict[str, str] = {}
    for jid in instance.machines[0].priority.order:
        w = _weight(instance, jid)
        machine = min(instance.machines, key=lambda m: m.delay * (load[m.id] + w))
        assign[jid] = machine.id
        load[machine.id] += w
    return _checked(instance, instance.profile(assign))


# ---------------------------------------------------------------------------
# unit-weight matroid congestion games


@dataclass(frozen=True)
class Offer:
    """One round of the counter algorithm."""

    resource: str
    counter: int
    cost: Fraction
    cheapest: Fraction
    player: str
    accepted: bool


def matroid_greedy_trace(instance: CongestionInstance) -> tuple[Profile, tuple[Offer, ...]]:
    """Counter algorithm for unit-weight matroid games, with its full log.

    Each round takes the resource whose cost at its counter is lowest
    (lowest resource index on ties) and offers it to the first player still
    on its list.  The player takes it if that keeps its set independent and
    it still needs elements; otherwise the player is struck from that list.
    """
    if not isinstance(instance, CongestionInstance):
        raise UnsupportedError("the counter algorithm needs a congestion instance")
    if not instance.has_unit_weights:
        raise UnsupportedError("the counter algorithm needs unit weights")
    _require(instance, ClassTag.MATROID_UNIT)
    mats = {p.id: p.matroid for p in instance.players}
    held: dict[str, list[str]] = {p.id: [] for p in instance.players}
    queue = {r.id: list(r.priority.order) for r in instance.resources}
    counter = {r.id: 1 for r in instance.resources}
    costs = {r.id: r.cost for r in instance.resources}
    log: list[Offer] = []
    while any(len(held[p]) < mats[p].rank for p in held):
        live = [r.id for r in instance.resources if queue[r.id]]
        if not live:
            raise GameError("counter algorithm ran out of offers")
        price = {e: costs[e](Fraction(counter[e])) for e in live}
        cheapest = min(price.values())
        e = next(e for e in live if price[e] == cheapest)
        pid = queue[e].pop(0)
        mat = mats[pid]
        accepted = len(held[pid]) < mat.rank and mat.is_independent(held[pid] + [e])
        log.append(Offer(e, counter[e], price[e], cheapest, pid, accepted))
        if accepted:
            held[pid].append(e)
            counter[e] += 1
    profile = instance.profile({p: frozenset(s) for p, s in held.items()})
    return _checked(instance, profile), tuple(log)


def ne_matroid_unit(instance: CongestionInstance) -> Profile:
    return matroid_greedy_trace(instance)[0]


# ---------------------------------------------------------------------------

CONSTRUCTORS = {
    ClassTag.G1: ne_greedy_singleton,
    ClassTag.G2: ne_two_machines,
    ClassTag.G3: ne_identical_machines,
    ClassTag.G4: ne_global_list,
    ClassTag.MATROID_UNIT: ne_matroid_unit,
}

AUTO_ORDER = (ClassTag.G1, ClassTag.G4, ClassTag.G2, ClassTag.G3, ClassTag.MATROID_UNIT)


def parse_class(name: str) -> ClassTag | None:
    """``auto`` maps to ``None``; otherwise ``g1``..``g4`` or ``matroid``."""
    if name == "auto":
        return None
    for tag in ClassTag:
        if name.lower() in (tag.short, tag.value.lower()):
            return tag
    raise UnsupportedError(f"unknown class {name!r}")


def construct(instance: Instance, tag: ClassTag | str | None = None) -> tuple[ClassTag, Profile]:
    """Run the constructor for ``tag``, or the first applicable one."""
    if isinstance(tag, str):
        tag = parse_class(tag)
    tags = classify(instance)
    if tag is None:
        tag = next((t for t in AUTO_ORDER if t in tags), None)
        if tag is None:
            raise UnsupportedError("instance belongs to no class with a direct construction")
    return tag, CONSTRUCTORS[tag](instance)
