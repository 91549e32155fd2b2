import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

import oracle
from pools import congestion_instances, matroid_unit, scheduling_instances
from prioritygames import (
    BudgetExceededError,
    CongestionInstance,
    CostPolynomial,
    DomainError,
    DynamicsPolicy,
    PartitionMatroid,
    Player,
    PriorityList,
    Resource,
    UniformMatroid,
    UnsupportedError,
    best_response,
    construct,
    enumerate_nash,
    find_nash,
    is_alpha_nash,
    is_nash,
    optimize_nash,
    potential_compare,
    run_dynamics,
    run_lazy_dynamics,
    search_nash,
)
from prioritygames.construct import ne_matroid_unit
from prioritygames.equilibria import (
    Ordering,
    Status,
    fastest_start,
    iter_profiles,
    lazy_better_response_step,
    potential_signature,
)
from prioritygames.fixtures import approx32, condorcet, ghat4, gstar5, unrelated3
from prioritygames.metrics import Objective, objective_value


def _gstar_bad():
    inst = gstar5()
    return inst, inst.profile({"a": "M1", "d": "M1", "b": "M2", "c": "M1", "e": "M3"})


class TestBestResponse:
    @pytest.mark.parametrize("b", ["M1", "M2", "M3"])
    @pytest.mark.parametrize("c", ["M1", "M2", "M3"])
    def test_second_job_joins_fast_machine(self, b, c):
        inst = gstar5()
        s = inst.profile({"a": "M1", "d": "M2", "e": "M3", "b": b, "c": c})
        assert best_response(inst, s, "b") == ("M1", 9)

    def test_third_job_picks_slowest_machine(self):
        inst = ghat4()
        for c in ("M1", "M2", "M3"):
            s = inst.profile({"a": "M1", "d": "M2", "b": "M1", "c": c})
            assert best_response(inst, s, "c") == ("M3", 13)

    def test_single_machine(self):
        from prioritygames import scheduling_instance

        inst = scheduling_instance({"a": 2, "b": 1}, [("M", 3, "ba")])
        assert best_response(inst, inst.profile({"a": "M", "b": "M"}), "a") == ("M", 9)

    def test_keeps_current_on_tie(self):
        from prioritygames import scheduling_instance

        inst = scheduling_instance({"a": 1}, [("M1", 1, "a"), ("M2", 1, "a")])
        assert best_response(inst, inst.profile({"a": "M2"}), "a") == ("M2", 1)
        assert best_response(inst, inst.profile({"a": "M1"}), "a") == ("M1", 1)


class TestNashChecks:
    def test_heavy_job_wants_out(self):
        inst, s = _gstar_bad()
        check = is_nash(inst, s)
        assert not check
        assert (check.witness.player, check.witness.strategy) == ("d", "M2")
        assert (check.witness.current_cost, check.witness.deviation_cost) == (F(75, 4), F(37, 2))

    def test_single_player(self):
        from prioritygames import scheduling_instance

        inst = scheduling_instance({"a": 5}, [("M1", 2, "a"), ("M2", 2, "a")])
        for s in iter_profiles(inst):
            assert is_nash(inst, s)
        slow = scheduling_instance({"a": 5}, [("M1", 1, "a"), ("M2", 2, "a")])
        assert [s["a"] for s in enumerate_nash(slow)] == ["M1"]

    def test_gadget_three_halves(self):
        inst = approx32()
        for s in iter_profiles(inst):
            assert is_alpha_nash(inst, s, F(3, 2))
            assert not is_alpha_nash(inst, s, F(3, 2) - F(1, 100))

    def test_alpha_below_one(self):
        inst, s = _gstar_bad()
        with pytest.raises(DomainError):
            is_alpha_nash(inst, s, F(99, 100))


@given(scheduling_instances(max_jobs=4), st.sampled_from([F(1), F(5, 4), F(2)]))
def test_alpha_nash_matches_reference(inst, alpha):
    for s in iter_profiles(inst):
        assert bool(is_alpha_nash(inst, s, alpha)) == oracle.is_nash(inst, s.as_dict(), alpha)


@given(scheduling_instances())
def test_alpha_one_is_nash(inst):
    for s in iter_profiles(inst):
        assert bool(is_alpha_nash(inst, s, 1)) == bool(is_nash(inst, s))


@given(scheduling_instances())
def test_exact_nash_is_alpha_nash(inst):
    for s in enumerate_nash(inst):
        assert is_alpha_nash(inst, s, F(7, 5))


class TestEnumeration:
    @pytest.mark.parametrize("build,count", [(gstar5, 243), (ghat4, 81), (unrelated3, 8), (condorcet, 8)])
    def test_no_equilibrium(self, build, count):
        inst = build()
        assert inst.profile_count() == count
        assert enumerate_nash(inst) == []
        assert search_nash(inst) == []
        assert find_nash(inst) is None

    def test_budget_refusal_reports_count(self):
        with pytest.raises(BudgetExceededError) as err:
            enumerate_nash(gstar5(), profile_budget=100)
        assert err.value.count == 243

    def test_budget_from_environment(self, monkeypatch):
        monkeypatch.setenv("PRIORITYGAMES_BUDGET", "50")
        with pytest.raises(BudgetExceededError):
            enumerate_nash(ghat4())


@given(scheduling_instances())
def test_enumeration_matches_reference_scheduling(inst):
    got = [oracle.key(s.as_dict()) for s in enumerate_nash(inst)]
    assert sorted(got) == sorted(oracle.key(a) for a in oracle.nash_set(inst))
    assert len(set(got)) == len(got)
    assert [s.choices for s in search_nash(inst)] == [s.choices for s in enumerate_nash(inst)]


@given(congestion_instances())
def test_enumeration_matches_reference_congestion(inst):
    got = sorted(oracle.key(s.as_dict()) for s in enumerate_nash(inst))
    assert got == sorted(oracle.key(a) for a in oracle.nash_set(inst))
    assert [s.choices for s in search_nash(inst)] == [s.choices for s in enumerate_nash(inst)]


@given(scheduling_instances(max_jobs=3, max_machines=3))
def test_three_jobs_always_have_equilibrium(inst):
    assert enumerate_nash(inst)


@given(scheduling_instances(max_jobs=5), st.sampled_from(["makespan", "sum"]))
def test_search_optimum_matches_scan(inst, objective):
    values = [objective_value(inst, s, objective) for s in enumerate_nash(inst)]
    low = optimize_nash(inst, objective, "min")
    high = optimize_nash(inst, objective, "max")
    if not values:
        assert low is None and high is None and find_nash(inst) is None
        return
    assert low[0] == min(values) and high[0] == max(values)
    assert is_nash(inst, low[1]) and is_nash(inst, high[1])
    assert find_nash(inst, objective, below=min(values), strict=False) is not None
    assert find_nash(inst, objective, below=min(values)) is None


def test_allowed_restricts_search():
    inst = condorcet()
    with pytest.raises(Exception):
        find_nash(inst, allowed={"p1": [["e9"]]})
    from prioritygames import scheduling_instance

    two = scheduling_instance({"a": 1, "b": 1}, [("M1", 1, "ab"), ("M2", 1, "ab")])
    hit = find_nash(two, allowed={"a": ["M2"]})
    assert hit["a"] == "M2" and is_nash(two, hit)


class TestDynamics:
    def test_no_equilibrium_game_cycles(self):
        inst, s = _gstar_bad()
        trace = run_dynamics(inst, s, DynamicsPolicy.parse("round-robin"))
        assert trace.status is Status.CYCLE
        assert trace.cycle_start is not None

    def test_equilibrium_start_has_no_moves(self):
        from prioritygames.fixtures import pos_g2

        g = pos_g2(2)
        start = enumerate_nash(g)[0]
        trace = run_dynamics(g, start)
        assert trace.converged and trace.moves == () and trace.final == start

    def test_step_limit(self):
        inst, s = _gstar_bad()
        trace = run_dynamics(inst, s, step_limit=1)
        assert trace.status is Status.STEP_LIMIT and len(trace.moves) == 1

    def test_policy_text(self):
        assert DynamicsPolicy.parse("priority:M2+better").describe() == "priority:M2+better"
        with pytest.raises(DomainError):
            DynamicsPolicy.parse("random")
        with pytest.raises(DomainError):
            DynamicsPolicy.parse("priority")

    def test_unknown_priority_target(self):
        inst, s = _gstar_bad()
        with pytest.raises(Exception):
            run_dynamics(inst, s, DynamicsPolicy.parse("priority:M9"))


@given(
    scheduling_instances(max_jobs=6, max_machines=4, same_delay=True),
    st.sampled_from(["round-robin", "lowest-id", "priority:M1", "round-robin+better"]),
    st.integers(0, 2**32),
)
def test_identical_delays_converge(inst, policy, seed):
    rng = random.Random(seed)
    start = inst.profile({j.id: rng.choice(inst.machines).id for j in inst.jobs})
    trace = run_dynamics(inst, start, DynamicsPolicy.parse(policy))
    assert trace.converged
    assert is_nash(inst, trace.final)


@given(scheduling_instances(max_jobs=5), st.integers(0, 2**32))
def test_moves_strictly_improve(inst, seed):
    rng = random.Random(seed)
    start = inst.profile({j.id: rng.choice(inst.machines).id for j in inst.jobs})
    trace = run_dynamics(inst, start, DynamicsPolicy.parse("lowest-id"))
    current = start
    for move in trace.moves:
        before = oracle.costs(inst, current.as_dict())[move.player]
        current = current.replace(move.player, move.new)
        after = oracle.costs(inst, current.as_dict())[move.player]
        assert (move.old_cost, move.new_cost) == (before, after)
        assert after < before


def test_fastest_start_prefers_low_delay():
    from prioritygames import scheduling_instance

    inst = scheduling_instance({"a": 1, "b": 2}, [("M1", 3, "ab"), ("M2", 1, "ba"), ("M3", 1, "ab")])
    assert fastest_start(inst).as_dict() == {"a": "M2", "b": "M2"}


# ---------------------------------------------------------------------------
# matroid games


def _two_partition_players():
    rids = ["e1", "e2", "e3", "e4"]
    mat = PartitionMatroid((("e1", "e2"), ("e3", "e4")), (1, 1))
    costs = {"e1": CostPolynomial.linear(1), "e2": CostPolynomial.linear(5), "e3": CostPolynomial.linear(1), "e4": CostPolynomial.linear(2)}
    return CongestionInstance(
        (Player("p", 1, mat), Player("q", 1, mat)),
        tuple(Resource(r, costs[r], PriorityList(("p", "q"))) for r in rids),
    )


def _reference_lazy(inst, s):
    """First player with an improving single swap and its cheapest swap cost."""
    for p in inst.players:
        cur = s[p.id]
        base = oracle.costs(inst, s.as_dict())[p.id]
        options = [
            b for b in oracle.bases(p.strategies, tuple(r.id for r in inst.resources)) if len(cur - b) == 1
        ]
        better = [oracle.costs(inst, {**s.as_dict(), p.id: b})[p.id] for b in options]
        better = [c for c in better if c < base]
        if better:
            return p.id, min(better)
    return None


class TestLazyMoves:
    def test_contrived_swap(self):
        inst = _two_partition_players()
        s = inst.profile({"p": ["e2", "e3"], "q": ["e1", "e3"]})
        pid, strat = lazy_better_response_step(inst, s)
        assert pid == "p" and strat == frozenset({"e1", "e3"})
        assert _reference_lazy(inst, s) == ("p", oracle.costs(inst, {**s.as_dict(), "p": strat})["p"])

    def test_greedy_output_has_no_lazy_move(self):
        inst = _two_partition_players()
        assert lazy_better_response_step(inst, ne_matroid_unit(inst)) is None

    def test_rank_one_is_plain_best_response(self):
        rids = ["e1", "e2", "e3"]
        inst = CongestionInstance(
            tuple(Player(p, 1, UniformMatroid(1)) for p in ("p", "q")),
            tuple(Resource(r, CostPolynomial.linear(k), PriorityList(("p", "q"))) for k, r in enumerate(rids, 1)),
        )
        s = inst.profile({"p": ["e3"], "q": ["e3"]})
        pid, strat = lazy_better_response_step(inst, s)
        assert (pid, strat) == ("p", best_response(inst, s, "p")[0])

    def test_unsupported_inputs(self):
        inst, s = _gstar_bad()
        with pytest.raises(UnsupportedError):
            lazy_better_response_step(inst, s)
        weighted = CongestionInstance(
            (Player("p", 2, UniformMatroid(1)),), (Resource("e", CostPolynomial.linear(1), PriorityList(("p",))),)
        )
        with pytest.raises(UnsupportedError):
            lazy_better_response_step(weighted, weighted.profile({"p": ["e"]}))
        with pytest.raises(UnsupportedError):
            potential_compare(weighted, weighted.profile({"p": ["e"]}), weighted.profile({"p": ["e"]}))


@given(st.integers(0, 10**9))
def test_lazy_moves_descend_potential(seed):
    rng = random.Random(seed)
    inst = matroid_unit(rng, max_players=4, max_resources=4)
    start = inst.profile({p.id: rng.choice(inst.strategies(p.id)) for p in inst.players})
    assert potential_compare(inst, start, start) is Ordering.EQUAL
    s = start
    for _ in range(200):
        step = lazy_better_response_step(inst, s)
        ref = _reference_lazy(inst, s)
        if step is None:
            assert ref is None
            assert is_nash(inst, s)
            break
        pid, strat = step
        t = s.replace(pid, strat)
        assert ref == (pid, oracle.costs(inst, t.as_dict())[pid])
        assert potential_compare(inst, t, s) is Ordering.LESS
        assert potential_compare(inst, s, t) is Ordering.GREATER
        s = t
    else:
        pytest.fail("lazy moves did not settle")


def test_signature_counts_incidences():
    inst = _two_partition_players()
    s = inst.profile({"p": ["e2", "e3"], "q": ["e1", "e3"]})
    sig = potential_signature(inst, s)
    assert len(sig.elements) == 4
    assert sig.below(max(sig.thresholds))[0] == 4


def test_lazy_run_ends_in_equilibrium():
    rng = random.Random(5)
    for _ in range(30):
        inst = matroid_unit(rng)
        start = inst.profile({p.id: inst.strategies(p.id)[-1] for p in inst.players})
        trace = run_lazy_dynamics(inst, start)
        assert trace.converged and is_nash(inst, trace.final)
        assert construct(inst)[1] is not None
