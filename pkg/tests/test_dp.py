import time

import numpy as np
import pytest

from hotpolicy.dp import (Policy, ValueTable, bellman_residual,
                          policy_evaluation, policy_improvement,
                          policy_iteration, q_from_v, write_policy_csv)
from hotpolicy.model import MdpTensors, build_mdp

from conftest import enumerate_optimal_value, exact_policy_value, make_random_mdp


def constant_mdp(n_states, n_actions, reward):
    transition = np.full((n_states, n_states, n_actions), 1.0 / n_states)
    return MdpTensors(n_states=n_states, n_actions=n_actions,
                      transition=transition,
                      reward=np.full((n_states, n_actions), float(reward)))


class TestPolicyEvaluation:
    def test_zero_reward_fixed_point(self):
        mdp = constant_mdp(4, 2, 0.0)
        v = policy_evaluation(Policy(np.zeros(4)), mdp, 0.9)
        assert np.all(v.values == 0.0)

    def test_single_state_geometric_series(self):
        mdp = constant_mdp(1, 1, 0.7)
        v = policy_evaluation(Policy(np.zeros(1)), mdp, 0.8, delta=1e-10)
        assert v.values[0] == pytest.approx(0.7 / 0.2, abs=1e-8)

    def test_matches_dense_linear_solve(self):
        mdp = make_random_mdp(5, 3, seed=11)
        policy = np.array([0, 2, 1, 1, 0])
        v = policy_evaluation(Policy(policy), mdp, 0.9, delta=1e-9)
        oracle = exact_policy_value(policy, mdp, 0.9)
        assert np.max(np.abs(v.values - oracle)) <= 1e-6

    def test_gamma_range_enforced(self):
        mdp = constant_mdp(2, 2, 1.0)
        with pytest.raises(ValueError):
            policy_evaluation(Policy(np.zeros(2)), mdp, 1.0)


class TestQFromV:
    def test_zero_continuation_returns_rewards(self):
        mdp = make_random_mdp(4, 3, seed=2)
        q = q_from_v(ValueTable(np.zeros(4)), mdp, 0.9)
        assert np.allclose(q, mdp.reward)

    def test_constant_value_harvest_row(self):
        # action with zero reward and constant continuation c scores gamma*c
        mdp = constant_mdp(3, 2, 0.0)
        mdp.reward[:, 1] = 0.5
        q = q_from_v(ValueTable(np.full(3, 2.0)), mdp, 0.9)
        assert np.allclose(q[:, 0], 0.9 * 2.0)
        assert np.allclose(q[:, 1], 0.5 + 0.9 * 2.0)

    def test_matches_triple_loop(self):
        mdp = make_random_mdp(4, 2, seed=3)
        v = np.linspace(0.0, 1.0, 4)
        q = q_from_v(ValueTable(v), mdp, 0.85)
        for s in range(4):
            for a in range(2):
                acc = mdp.reward[s, a]
                for k in range(4):
                    acc += 0.85 * mdp.transition[s, k, a] * v[k]
                assert q[s, a] == pytest.approx(acc, abs=1e-12)


class TestPolicyImprovement:
    def test_ties_break_to_lowest_index(self):
        mdp = constant_mdp(3, 4, 1.0)
        policy = policy_improvement(ValueTable(np.zeros(3)), mdp, 0.9)
        assert np.all(policy.actions == 0)

    def test_strictly_increasing_picks_last(self):
        mdp = constant_mdp(2, 3, 0.0)
        mdp.reward[:] = np.array([[0.1, 0.2, 0.3], [0.0, 0.5, 0.9]])
        policy = policy_improvement(ValueTable(np.zeros(2)), mdp, 0.9)
        assert np.all(policy.actions == 2)

    def test_matches_exhaustive_enumeration(self):
        mdp = make_random_mdp(2, 2, seed=5)
        policy, v, _ = policy_iteration(mdp, 0.9)
        oracle = enumerate_optimal_value(mdp, 0.9)
        assert np.max(np.abs(v.values - oracle)) <= 1e-6


class TestPolicyIteration:
    def test_zero_reward_any_policy_optimal(self):
        mdp = constant_mdp(3, 2, 0.0)
        policy, v, _ = policy_iteration(mdp, 0.9)
        assert np.all(v.values == 0.0)

    def test_dominant_action_selected_everywhere(self):
        mdp = constant_mdp(2, 2, 0.0)
        mdp.reward[:, 1] = 1.0
        policy, v, _ = policy_iteration(mdp, 0.9)
        assert np.all(policy.actions == 1)
        oracle = enumerate_optimal_value(mdp, 0.9)
        assert np.max(np.abs(v.values - oracle)) <= 1e-6

    def test_monotone_improvement_across_sweeps(self):
        mdp = make_random_mdp(6, 3, seed=9)
        gamma, delta = 0.9, 1e-8
        policy = Policy(np.zeros(6, dtype=np.int64))
        prev = None
        for _ in range(50):
            v = policy_evaluation(policy, mdp, gamma, delta)
            if prev is not None:
                assert np.all(v.values >= prev - 10 * delta)
            prev = v.values
            improved = policy_improvement(v, mdp, gamma)
            if np.array_equal(improved.actions, policy.actions):
                break
            policy = improved

    def test_deterministic_output(self):
        mdp = make_random_mdp(5, 3, seed=21)
        p1, v1, _ = policy_iteration(mdp, 0.9)
        p2, v2, _ = policy_iteration(mdp, 0.9)
        assert np.array_equal(p1.actions, p2.actions)
        assert np.array_equal(v1.values, v2.values)

    def test_benchmark_mdp_fixed_point(self, benchmark_config):
        cfg = benchmark_config
        mdp = build_mdp(cfg.params, cfg.markov)
        start = time.perf_counter()
        policy, v, iterations = policy_iteration(mdp, cfg.params.gamma)
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0
        assert bellman_residual(v, mdp, cfg.params.gamma) <= 1e-5
        assert np.all(v.values >= 0.0)
        q = q_from_v(v, mdp, cfg.params.gamma)
        assert np.array_equal(np.argmax(q, axis=1), policy.actions)


class TestPolicyCsv:
    def test_export_columns(self, tmp_path, benchmark_config):
        cfg = benchmark_config
        mdp = build_mdp(cfg.params, cfg.markov)
        policy, v, _ = policy_iteration(mdp, cfg.params.gamma)
        path = tmp_path / "policy.csv"
        write_policy_csv(policy, v, mdp.space, cfg.params, cfg.markov, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "state_index,h_ps,h_ss,e_h,b,action,harvest,power,value"
        assert len(lines) == 1 + mdp.n_states
