"""Seeded random instance pools and hypothesis strategies shared by the tests."""

from __future__ import annotations

import random
from fractions import Fraction as F

from hypothesis import strategies as st

from prioritygames import (
    BasesMatroid,
    CongestionInstance,
    CostPolynomial,
    PartitionMatroid,
    Player,
    PriorityList,
    Resource,
    UniformMatroid,
    scheduling_instance,
)


def _weight(rng: random.Random) -> F:
    return F(rng.randint(1, 9), rng.randint(1, 3))


def _delay(rng: random.Random) -> F:
    return F(rng.randint(1, 5), rng.randint(1, 2))


def scheduling(rng, n, m, unit=False, same_delay=False, same_list=False, unrelated=False):
    jobs = [f"j{i}" for i in range(1, n + 1)]
    weights = {j: (F(1) if unit else _weight(rng)) for j in jobs}
    base = rng.sample(jobs, n)
    d0 = _delay(rng)
    machines = [
        (f"M{k}", d0 if same_delay else _delay(rng), list(base) if same_list else rng.sample(jobs, n))
        for k in range(1, m + 1)
    ]
    table = None
    if unrelated:
        table = {(j, mid): _weight(rng) for j in jobs for mid, _, _ in machines}
    return scheduling_instance(weights, machines, table)


def g1(rng):
    return scheduling(rng, rng.randint(1, 8), rng.randint(1, 3), unit=True)


def g2(rng):
    return scheduling(rng, rng.randint(1, 8), 2)


def g3(rng):
    return scheduling(rng, rng.randint(1, 7), rng.randint(1, 3), same_delay=True)


def g4(rng):
    return scheduling(rng, rng.randint(1, 7), rng.randint(1, 3), same_list=True)


def _matroid(rng, rids):
    kind = rng.choice(("uniform", "partition", "bases"))
    if kind == "uniform":
        ground = tuple(rng.sample(rids, rng.randint(1, len(rids))))
        return UniformMatroid(rng.randint(1, min(2, len(ground))), ground)
    if kind == "partition":
        pool = rng.sample(rids, rng.randint(1, len(rids)))
        cut = rng.randint(1, len(pool))
        blocks = [tuple(pool[:cut])] + ([tuple(pool[cut:])] if cut < len(pool) else [])
        quotas = [rng.randint(1, min(2, len(b))) for b in blocks]
        return PartitionMatroid(tuple(blocks), tuple(quotas))
    # graphic matroid of a small multigraph: spanning trees of a triangle or a path
    if len(rids) >= 3:
        a, b, c = rng.sample(rids, 3)
        return BasesMatroid((frozenset({a, b}), frozenset({b, c}), frozenset({a, c})))
    return UniformMatroid(1, tuple(rids))


def _cost(rng, max_degree=1) -> CostPolynomial:
    degree = rng.randint(1, max_degree)
    coeffs = [F(rng.randint(0, 3), rng.randint(1, 2)) for _ in range(degree)] + [F(rng.randint(1, 4), rng.randint(1, 2))]
    return CostPolynomial(tuple(coeffs))


def matroid_unit(rng, max_players=6, max_resources=4):
    n = rng.randint(1, max_players)
    r = rng.randint(1, max_resources)
    pids = [f"p{i}" for i in range(1, n + 1)]
    rids = [f"e{j}" for j in range(1, r + 1)]
    players = tuple(Player(p, 1, _matroid(rng, rids)) for p in pids)
    resources = tuple(Resource(e, _cost(rng), PriorityList(tuple(rng.sample(pids, n)))) for e in rids)
    return CongestionInstance(players, resources)


def weighted_linear(rng, max_players=5, max_resources=4):
    """Weighted congestion game with affine costs and explicit strategies."""
    n = rng.randint(1, max_players)
    r = rng.randint(1, max_resources)
    pids = [f"p{i}" for i in range(1, n + 1)]
    rids = [f"e{j}" for j in range(1, r + 1)]
    players = []
    for p in pids:
        strats = {frozenset(rng.sample(rids, rng.randint(1, r))) for _ in range(rng.randint(1, 3))}
        players.append(Player(p, _weight(rng), sorted(strats, key=sorted)))
    resources = tuple(Resource(e, _cost(rng), PriorityList(tuple(rng.sample(pids, n)))) for e in rids)
    return CongestionInstance(tuple(players), resources)


CLASS_POOLS = {"g1": g1, "g2": g2, "g3": g3, "g4": g4, "matroid": matroid_unit}


def pool(kind: str, size: int, seed: int = 2024):
    rng = random.Random(f"{kind}-{seed}")
    return [CLASS_POOLS[kind](rng) for _ in range(size)]


# ---------------------------------------------------------------------------
# hypothesis strategies

rationals = st.builds(F, st.integers(1, 12), st.integers(1, 4))


@st.composite
def scheduling_instances(draw, max_jobs=4, max_machines=3, unit=False, same_delay=False, same_list=False):
    n = draw(st.integers(1, max_jobs))
    m = draw(st.integers(1, max_machines))
    jobs = [f"j{i}" for i in range(1, n + 1)]
    weights = {j: (F(1) if unit else draw(rationals)) for j in jobs}
    base = draw(st.permutations(jobs))
    delay = draw(rationals)
    machines = []
    for k in range(1, m + 1):
        order = list(base) if same_list else draw(st.permutations(jobs))
        machines.append((f"M{k}", delay if same_delay else draw(rationals), order))
    return scheduling_instance(weights, machines)


@st.composite
def congestion_instances(draw, max_players=3, max_resources=3, matroid=False, unit=False, affine=True):
    n = draw(st.integers(1, max_players))
    r = draw(st.integers(1, max_resources))
    pids = [f"p{i}" for i in range(1, n + 1)]
    rids = [f"e{j}" for j in range(1, r + 1)]
    subsets = st.sets(st.sampled_from(rids), min_size=1).map(frozenset)
    players = []
    for p in pids:
        w = F(1) if unit else draw(rationals)
        if matroid:
            ground = draw(st.lists(st.sampled_from(rids), min_size=1, unique=True))
            k = draw(st.integers(1, len(ground)))
            players.append(Player(p, w, UniformMatroid(k, tuple(ground))))
        else:
            players.append(Player(p, w, draw(st.lists(subsets, min_size=1, max_size=3, unique=True))))
    top = 1 if affine else 2
    resources = []
    for e in rids:
        coeffs = draw(st.lists(st.builds(F, st.integers(0, 4), st.integers(1, 2)), min_size=top + 1, max_size=top + 1))
        if all(c == 0 for c in coeffs):
            coeffs[-1] = F(1)
        resources.append(Resource(e, CostPolynomial(tuple(coeffs)), PriorityList(tuple(draw(st.permutations(pids))))))
    return CongestionInstance(tuple(players), tuple(resources))
