"""Episode runners: reference path, lockstep batch path, class properties."""

import numpy as np
import pytest

from seqprice.episode import (
    RSDPolicy,
    format_trajectory,
    rsd_act_fn,
    run_batch,
    run_episode,
)
from seqprice.errors import ProtocolError
from seqprice.learner.policy import NeuralPolicy, init_policy, policy_act_fn
from seqprice.mechanism import Objective
from seqprice.oracle.solve import optimal_adaptive_spm
from seqprice.oracle.tree import TreePolicy
from seqprice.settings import (
    enumerate_support,
    get_setting,
    profile_from_values,
)
from seqprice.statistics import statistic_length


def neural(spec, kind, seed=0):
    params = init_policy(
        spec.n,
        spec.m,
        statistic_length(kind, spec.n, spec.m),
        hidden=16,
        arch="mlp",
        price_cap=spec.vmax,
        rng=np.random.default_rng(seed),
    )
    return params


def test_rsd_on_single_item_sells_to_first_visit():
    spec = get_setting("prop1")
    profile = profile_from_values(spec, np.array([[1.0], [3.0]]))
    seen = set()
    for seed in range(20):
        rec = run_episode(RSDPolicy(), spec, "none", seed=seed, profile=profile)
        assert rec.objective_value in (1.0, 3.0)
        seen.add(rec.objective_value)
        assert len(rec.rounds) == spec.n
    assert seen == {1.0, 3.0}  # both orders appear over 20 seeds


def test_optimal_tree_replay_matches_oracle_value():
    spec = get_setting("prop1")
    res = optimal_adaptive_spm(spec, Objective.WELFARE)
    assert res.tree is not None
    expected = 0.0
    for profile, prob in enumerate_support(spec):
        rec = run_episode(
            TreePolicy(res.tree), spec, "price_allocation_matrix", profile=profile
        )
        expected += float(prob) * rec.objective_value
    assert expected == pytest.approx(res.value, abs=1e-12)
    assert expected == pytest.approx(2.5, abs=1e-12)


def test_variance_reduced_reward_of_optimal_episode_is_zero():
    # prop1's optimal mechanism attains the offline optimum realization by
    # realization, so welfare minus the offline benchmark vanishes.
    spec = get_setting("prop1")
    res = optimal_adaptive_spm(spec, Objective.WELFARE)
    for profile, _ in enumerate_support(spec):
        rec = run_episode(
            TreePolicy(res.tree),
            spec,
            "price_allocation_matrix",
            profile=profile,
            variance_reduction=True,
        )
        assert rec.reward == pytest.approx(0.0, abs=1e-12)
        assert rec.offline_value == pytest.approx(rec.objective_value, abs=1e-12)


def test_reward_equals_objective_without_variance_reduction():
    spec = get_setting("prop2")
    rec = run_episode(RSDPolicy(3), spec, "none", seed=3)
    assert rec.reward == rec.objective_value
    rec_vr = run_episode(RSDPolicy(3), spec, "none", seed=3, variance_reduction=True)
    assert rec_vr.reward == rec_vr.objective_value - rec_vr.offline_value


def test_episode_length_always_n():
    for name in ("prop1", "prop2", "prop4", "kitchen_sink"):
        spec = get_setting(name)
        for seed in range(3):
            rec = run_episode(RSDPolicy(seed), spec, "none", seed=seed)
            assert len(rec.rounds) == spec.n
            visited = [r.action.agent for r in rec.rounds]
            assert sorted(visited) == list(range(spec.n))


def test_asp_policy_replays_fixed_schedule():
    # With no observation, a fixed parameter vector yields one (order, price)
    # script regardless of the value realization.
    spec = get_setting("prop2")
    params = neural(spec, "none", seed=5)
    schedules = set()
    rng = np.random.default_rng(0)
    for _ in range(100):
        profile = profile_from_values(spec, spec.sample_batch(rng, 1)[0])
        rec = run_episode(NeuralPolicy(params), spec, "none", profile=profile)
        script = tuple(
            (r.action.agent, tuple(sorted(r.action.prices.items())))
            for r in rec.rounds
        )
        schedules.add(script)
    assert len(schedules) == 1


def test_psp_policy_prices_ignore_purchase_history():
    # remaining_agents statistic: same visit order, different purchases,
    # identical prices per round.
    spec = get_setting("prop2")
    params = neural(spec, "remaining_agents", seed=9)
    lo = profile_from_values(spec, np.full((3, 2), 1.0))
    hi = profile_from_values(spec, np.full((3, 2), 3.0))
    rec_lo = run_episode(NeuralPolicy(params), spec, "remaining_agents", profile=lo)
    rec_hi = run_episode(NeuralPolicy(params), spec, "remaining_agents", profile=hi)
    bought_lo = [r.purchased for r in rec_lo.rounds]
    bought_hi = [r.purchased for r in rec_hi.rounds]
    assert bought_lo != bought_hi  # histories genuinely diverge
    for a, b in zip(rec_lo.rounds, rec_hi.rounds):
        assert a.action.agent == b.action.agent
        shared = set(a.action.prices) & set(b.action.prices)
        for j in shared:
            assert a.action.prices[j] == b.action.prices[j]


def test_policy_visiting_removed_agent_raises():
    class Stuck:
        def act(self, obs, agents, items, mode="eval"):
            from seqprice.mechanism import Action

            return Action(0, {j: 0.0 for j in np.flatnonzero(items)}), 0.0

    spec = get_setting("prop2")
    with pytest.raises(ProtocolError):
        run_episode(Stuck(), spec, "none", seed=0)

    def stuck_fn(obs, agents_mask, items_mask, rng, mode):
        agents = np.zeros(agents_mask.shape[0], dtype=int)
        prices = np.zeros((agents_mask.shape[0], items_mask.shape[1]))
        return agents, prices, {}

    with pytest.raises(ProtocolError):
        run_batch(stuck_fn, spec, "none", rng=np.random.default_rng(0), count=4)


def test_batch_path_matches_reference_path():
    # The lockstep runner and the object-level state machine must agree
    # round for round on the same deterministic policy and profiles.
    for name, kind in [
        ("prop2", "price_allocation_matrix"),
        ("prop4", "items_agents_left"),
        ("kitchen_sink", "allocation_matrix"),
        ("appD_nonidentical", "remaining_agents"),
    ]:
        spec = get_setting(name)
        params = neural(spec, kind, seed=11)
        values = spec.sample_batch(np.random.default_rng(42), 32)
        batch = run_batch(
            policy_act_fn(params), spec, kind, values=values, mode="eval"
        )
        for e in range(8):
            profile = profile_from_values(spec, values[e])
            rec = run_episode(NeuralPolicy(params), spec, kind, profile=profile)
            assert rec.objective_value == pytest.approx(
                float(batch.objective_values[e]), abs=1e-12
            )
            for t, r in enumerate(rec.rounds):
                assert batch.agents[t, e] == r.action.agent
                np.testing.assert_allclose(
                    batch.observations[t, e], r.observation, atol=1e-12
                )
                for j, p in r.action.prices.items():
                    assert batch.prices[t, e, j] == pytest.approx(p, abs=1e-12)


def test_batch_rsd_prices_are_zero_and_orders_vary():
    spec = get_setting("prop2")
    batch = run_batch(
        rsd_act_fn, spec, "none", rng=np.random.default_rng(1), count=64
    )
    assert (batch.prices == 0).all()
    orders = {tuple(batch.agents[:, e]) for e in range(64)}
    assert len(orders) > 1


def test_additive_batch_buys_one_unit_per_type():
    spec = get_setting("additive_types")
    batch = run_batch(
        rsd_act_fn, spec, "none", rng=np.random.default_rng(2), count=16
    )
    # at zero prices the first visited agent takes one unit of each type
    first = batch.agents[0]
    for e in range(16):
        row = batch.allocation[e, first[e]]
        assert row[:2].sum() == 1  # one unit of the two-unit type
        assert row[2:].sum() == 1  # one unit of the four-unit type


def test_trajectory_dump_format():
    spec = get_setting("prop1")
    rec = run_episode(RSDPolicy(0), spec, "none", seed=0)
    line = format_trajectory(rec)
    assert "setting=prop1" in line
    assert line.count("agent=") == spec.n
    assert "\n" not in line
