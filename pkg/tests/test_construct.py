import random
from fractions import Fraction as F

import pytest
from hypothesis import given

import oracle
from pools import g2, g3, g4, matroid_unit, scheduling_instances
from prioritygames import (
    ClassTag,
    CongestionInstance,
    CostPolynomial,
    Player,
    PriorityList,
    Resource,
    UniformMatroid,
    UnsupportedError,
    all_costs,
    classify,
    construct,
    enumerate_nash,
    is_nash,
    run_dynamics,
    scheduling_instance,
)
from prioritygames.construct import (
    matroid_greedy_trace,
    migration_claims,
    ne_global_list,
    ne_greedy_singleton,
    ne_identical_machines,
    ne_matroid_unit,
    ne_two_machines,
)
from prioritygames.fixtures import gstar5, pos_g2, pos_g3, pos_g4_sumct
from prioritygames.metrics import objective_value


def _sorted_costs(inst, profile):
    return sorted(all_costs(inst, profile).values())


class TestClassify:
    def test_no_equilibrium_example_has_no_class(self):
        assert classify(gstar5()) == set()

    def test_everything_at_once(self):
        inst = scheduling_instance({"a": 1, "b": 1, "c": 1}, [("M1", 2, "abc"), ("M2", 2, "abc")])
        assert classify(inst) == {ClassTag.G1, ClassTag.G2, ClassTag.G3, ClassTag.G4}

    def test_identical_machines_family(self):
        assert classify(pos_g3(3)) == {ClassTag.G3}

    def test_machine_dependent_weights_get_no_tag(self):
        inst = scheduling_instance(
            {"a": 1, "b": 1}, [("M1", 1, "ab"), ("M2", 1, "ab")], {("a", "M1"): 1, ("a", "M2"): 2, ("b", "M1"): 1, ("b", "M2"): 1}
        )
        assert classify(inst) == set()

    def test_constructors_refuse_other_classes(self):
        inst = gstar5()
        for ctor in (ne_two_machines, ne_greedy_singleton, ne_identical_machines, ne_global_list):
            with pytest.raises(UnsupportedError):
                ctor(inst)
        with pytest.raises(UnsupportedError):
            construct(inst)


class TestTwoMachines:
    def test_both_stay_on_fast_machine(self):
        inst = pos_g2(2)
        s = ne_two_machines(inst)
        assert s.as_dict() == {"a": "M1", "b": "M1"}
        assert all_costs(inst, s)["b"] == 3

    def test_one_job(self):
        inst = scheduling_instance({"a": 3}, [("M1", 2, "a"), ("M2", 1, "a")])
        assert ne_two_machines(inst)["a"] == "M2"

    def test_wrong_machine_count(self):
        with pytest.raises(UnsupportedError):
            ne_two_machines(pos_g3(3))

    def test_random_instances(self):
        rng = random.Random(11)
        for _ in range(150):
            inst = g2(rng)
            s = ne_two_machines(inst)
            assert is_nash(inst, s)
            assert migration_claims(inst, s) == (True, True)
            assert oracle.key(s.as_dict()) in {oracle.key(a) for a in oracle.nash_set(inst)}


class TestEqualWeights:
    def test_balanced_pair(self):
        inst = scheduling_instance({j: 1 for j in "abcd"}, [("M1", 1, "abcd"), ("M2", 1, "dcba")])
        s = ne_greedy_singleton(inst)
        assert sorted(s.as_dict().values()) == ["M1", "M1", "M2", "M2"]
        assert objective_value(inst, s, "makespan") == 2

    def test_slow_machine_stays_empty(self):
        inst = scheduling_instance({j: 1 for j in "abc"}, [("M1", 1, "abc"), ("M2", 3, "abc")])
        s = ne_greedy_singleton(inst)
        assert set(s.as_dict().values()) == {"M1"}
        assert objective_value(inst, s, "makespan") == 3
        assert min(oracle.makespan(inst, a) for a in oracle.profiles(inst)) == 3
        assert oracle.is_nash(inst, s.as_dict())

    def test_weighted_refused(self):
        with pytest.raises(UnsupportedError):
            ne_greedy_singleton(pos_g2(2))

    @given(scheduling_instances(max_jobs=5, unit=True))
    def test_sorted_costs_shared_by_all_equilibria(self, inst):
        greedy = _sorted_costs(inst, ne_greedy_singleton(inst))
        for s in oracle.nash_set(inst):
            assert sorted(oracle.costs(inst, s).values()) == greedy


class TestIdenticalMachines:
    def test_heavy_job_last(self):
        inst = pos_g3(3)
        assert objective_value(inst, ne_identical_machines(inst), "makespan") == 5

    def test_single_machine_is_the_list(self):
        inst = scheduling_instance({"a": 2, "b": 3, "c": 1}, [("M1", 2, "cab")])
        s = ne_identical_machines(inst)
        assert all_costs(inst, s) == {"c": 2, "a": 6, "b": 12}

    def test_random_instances(self):
        rng = random.Random(13)
        for _ in range(150):
            inst = g3(rng)
            assert oracle.is_nash(inst, ne_identical_machines(inst).as_dict())


class TestGlobalList:
    def test_first_two_jobs_split(self):
        inst = pos_g4_sumct(4, 2, F(1, 100))
        s = ne_global_list(inst)
        assert (s["a"], s["b"]) == ("M1", "M2")

    def test_one_job_fastest(self):
        inst = scheduling_instance({"a": 1}, [("M1", 3, "a"), ("M2", 2, "a"), ("M3", 2, "a")])
        assert ne_global_list(inst)["a"] == "M2"

    def test_random_members_of_equilibrium_set(self):
        rng = random.Random(17)
        for _ in range(120):
            inst = g4(rng)
            if inst.n > 6:
                continue
            s = ne_global_list(inst)
            assert s in enumerate_nash(inst)
            assert run_dynamics(inst, s).moves == ()


def _two_triplets(players):
    rids = [f"e{j}" for j in range(1, 7)]
    rotate = {r: tuple(players[(j + k) % len(players)] for k in range(len(players))) for j, r in enumerate(rids)}
    triplets = (frozenset(rids[:3]), frozenset(rids[3:]))
    return CongestionInstance(
        tuple(Player(p, 1, [*triplets]) for p in players),
        tuple(Resource(r, CostPolynomial.linear(1), PriorityList(rotate[r])) for r in rids),
    ), triplets


class TestMatroidGreedy:
    def test_two_players_split_triplets(self):
        base, _ = _two_triplets(["p1", "p2"])
        inst = CongestionInstance(tuple(Player(p.id, 1, UniformMatroid(3)) for p in base.players), base.resources)
        s = ne_matroid_unit(inst)
        assert not s["p1"] & s["p2"]
        assert all_costs(inst, s) == {"p1": 3, "p2": 3}
        assert min(oracle.total(inst, a) for a in oracle.profiles(inst)) == 6
        assert oracle.is_nash(inst, s.as_dict())

    def test_rank_one_matches_singleton_greedy(self):
        rng = random.Random(19)
        for _ in range(60):
            n, m = rng.randint(1, 6), rng.randint(1, 3)
            jobs = [f"j{i}" for i in range(n)]
            machines = [(f"M{k}", F(rng.randint(1, 4)), rng.sample(jobs, n)) for k in range(m)]
            sched = scheduling_instance({j: 1 for j in jobs}, machines)
            cong = CongestionInstance(
                tuple(Player(j, 1, UniformMatroid(1)) for j in jobs),
                tuple(Resource(mid, CostPolynomial.linear(d), PriorityList(tuple(o))) for mid, d, o in machines),
            )
            assert _sorted_costs(cong, ne_matroid_unit(cong)) == _sorted_costs(sched, ne_greedy_singleton(sched))

    def test_one_player_gets_cheapest_basis(self):
        costs = [3, 1, 2, 5]
        inst = CongestionInstance(
            (Player("p", 1, UniformMatroid(2)),),
            tuple(Resource(f"e{k}", CostPolynomial.linear(c), PriorityList(("p",))) for k, c in enumerate(costs)),
        )
        assert ne_matroid_unit(inst)["p"] == frozenset({"e1", "e2"})

    def test_weighted_refused(self):
        inst = CongestionInstance(
            (Player("p", 2, UniformMatroid(1)),), (Resource("e", CostPolynomial.linear(1), PriorityList(("p",))),)
        )
        with pytest.raises(UnsupportedError):
            ne_matroid_unit(inst)

    def test_offers_are_globally_cheapest(self):
        rng = random.Random(23)
        for _ in range(100):
            inst = matroid_unit(rng)
            profile, log = matroid_greedy_trace(inst)
            costs = {r.id: r.cost for r in inst.resources}
            counters = {r.id: 1 for r in inst.resources}
            remaining = {r.id: list(r.priority.order) for r in inst.resources}
            for offer in log:
                live = [e for e in remaining if remaining[e]]
                assert offer.cost == min(costs[e](counters[e]) for e in live)
                assert offer.player == remaining[offer.resource].pop(0)
                counters[offer.resource] += offer.accepted
            assert oracle.is_nash(inst, profile.as_dict())


def test_auto_construction_is_stable():
    rng = random.Random(29)
    for build in (g2, g3, g4, matroid_unit):
        for _ in range(40):
            inst = build(rng)
            tag, s = construct(inst)
            assert tag in classify(inst)
            assert is_nash(inst, s)
