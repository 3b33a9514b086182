import numpy as np
import pytest

from hotpolicy.dp import policy_iteration, q_from_v
from hotpolicy.model import build_mdp, initial_state_distribution
from hotpolicy.rl import (LearningConfig, MdpEnvironment, QTable,
                          epsilon_greedy, greedy_policy, learning_rate,
                          q_learning, q_update, write_learning_curve_csv)

from conftest import make_random_mdp, teaching_mdp


class TestLearningRate:
    def test_first_visit_is_one(self):
        assert learning_rate(0, 0.8) == 1.0

    def test_harmonic_schedule(self):
        assert learning_rate(3, 1.0) == pytest.approx(0.25)

    def test_robbins_monro_conditions_numerically(self):
        # omega = 0.8: partial sums of alpha diverge, of alpha^2 converge
        n = np.arange(1, 1_000_001, dtype=float)
        alpha = n ** -0.8
        s1 = np.cumsum(alpha)
        s2 = np.cumsum(alpha ** 2)
        assert s1[-1] > 2.0 * s1[9_999]          # still growing by decades
        assert s2[-1] - s2[99_999] < 5e-3        # square-sum tail vanishes
        assert np.all((alpha > 0) & (alpha <= 1))

    def test_rejects_negative_count(self):
        with pytest.raises(ValueError):
            learning_rate(-1, 0.8)


class TestEpsilonGreedy:
    def test_zero_epsilon_always_argmax(self):
        qt = QTable.zeros(3, 4)
        qt.q[1] = [0.1, 0.9, 0.3, 0.2]
        rng = np.random.default_rng(0)
        assert all(epsilon_greedy(qt, 1, 0.0, rng) == 1 for _ in range(50))

    def test_full_epsilon_uniform_frequencies(self):
        qt = QTable.zeros(1, 5)
        rng = np.random.default_rng(42)
        draws = np.array([epsilon_greedy(qt, 0, 1.0, rng) for _ in range(100_000)])
        freqs = np.bincount(draws, minlength=5) / draws.size
        assert np.max(np.abs(freqs - 0.2)) < 0.02

    def test_tie_break_to_lowest_index(self):
        qt = QTable.zeros(1, 6)
        rng = np.random.default_rng(1)
        assert epsilon_greedy(qt, 0, 0.0, rng) == 0


class TestQUpdate:
    def test_first_visit_writes_reward(self):
        qt = QTable.zeros(2, 2)
        q_update(qt, 0, 1, 0.7, 1, gamma=0.9, omega=0.8)
        assert qt.q[0, 1] == pytest.approx(0.7)
        assert qt.visit_counts[0, 1] == 1

    def test_zero_reward_keeps_zero(self):
        qt = QTable.zeros(2, 2)
        q_update(qt, 0, 0, 0.0, 1, gamma=0.9, omega=0.8)
        assert np.all(qt.q == 0.0)

    def test_only_visited_cell_changes(self):
        qt = QTable.zeros(4, 3)
        qt.q[:] = 0.5
        before = qt.q.copy()
        q_update(qt, 2, 1, 1.0, 3, gamma=0.9, omega=0.8)
        changed = qt.q != before
        assert changed.sum() == 1 and changed[2, 1]

    def test_one_state_fixed_point(self):
        # reward 1 with gamma 0.5 bootstraps to q = 1 / (1 - 0.5) = 2
        qt = QTable.zeros(1, 1)
        for _ in range(10_000):
            q_update(qt, 0, 0, 1.0, 0, gamma=0.5, omega=0.8)
        assert qt.q[0, 0] == pytest.approx(2.0, abs=1e-3)


class TestEnvironment:
    def test_step_respects_transition_support(self):
        mdp = make_random_mdp(5, 2, seed=13)
        mdp.transition[:, :, 0] = 0.0
        mdp.transition[:, 2, 0] = 1.0   # action 0 jumps to state 2
        env = MdpEnvironment(mdp, rng_seed=3)
        for s in range(5):
            nxt, reward = env.step(s, 0)
            assert nxt == 2
            assert reward == pytest.approx(mdp.reward[s, 0])

    def test_reset_uses_initial_distribution(self):
        mdp = make_random_mdp(4, 2, seed=14)
        dist = np.array([0.0, 0.0, 1.0, 0.0])
        env = MdpEnvironment(mdp, dist, rng_seed=5)
        assert all(env.reset() == 2 for _ in range(20))


class TestQLearning:
    def test_zero_iterations_returns_harvest_policy(self):
        mdp = make_random_mdp(4, 3, seed=1)
        env = MdpEnvironment(mdp, rng_seed=1)
        cfg = LearningConfig(epsilon=0.1, n_iterations=0, rng_seed=2)
        qt, policy, log = q_learning(env, cfg, 0.9)
        assert np.all(qt.q == 0.0)
        assert np.all(policy.actions == 0)
        assert log == []

    def test_seed_reproducibility_bitwise(self):
        mdp, params, markov = teaching_mdp()
        dist = initial_state_distribution(mdp.space, params)
        runs = []
        for _ in range(2):
            env = MdpEnvironment(mdp, dist, rng_seed=11)
            cfg = LearningConfig(epsilon=0.1, n_iterations=5000, rng_seed=12)
            qt, policy, _ = q_learning(env, cfg, params.gamma)
            runs.append((qt.q.copy(), policy.actions.copy()))
        assert np.array_equal(runs[0][0], runs[1][0])
        assert np.array_equal(runs[0][1], runs[1][1])

    def test_q_table_bounded(self):
        mdp, params, markov = teaching_mdp()
        r_max = float(mdp.reward.max())
        bound = r_max / (1.0 - params.gamma)
        env = MdpEnvironment.from_mdp(mdp, params, rng_seed=3)
        cfg = LearningConfig(epsilon=0.3, n_iterations=50_000, rng_seed=4)
        qt, _, _ = q_learning(env, cfg, params.gamma)
        assert np.all(qt.q >= 0.0)
        assert np.all(qt.q <= bound + 1e-12)

    def test_small_mdp_matches_policy_iteration(self):
        mdp, params, markov = teaching_mdp()
        pi_policy, _, _ = policy_iteration(mdp, params.gamma)
        matches = []
        for seed in range(10):
            env = MdpEnvironment.from_mdp(mdp, params, rng_seed=seed + 100)
            cfg = LearningConfig(epsilon=0.1, n_iterations=200_000,
                                 rng_seed=seed)
            _, policy, _ = q_learning(env, cfg, params.gamma)
            matches.append(np.mean(policy.actions == pi_policy.actions))
        assert np.median(matches) >= 0.95

    def test_qstar_distance_shrinks_with_iterations(self):
        mdp, params, markov = teaching_mdp()
        _, v_star, _ = policy_iteration(mdp, params.gamma, delta=1e-10)
        q_star = q_from_v(v_star, mdp, params.gamma)
        medians = []
        for n_iter in (1_000, 10_000, 100_000):
            dists = []
            for seed in range(10):
                env = MdpEnvironment.from_mdp(mdp, params, rng_seed=seed + 500)
                cfg = LearningConfig(epsilon=0.2, n_iterations=n_iter,
                                     rng_seed=seed + 900)
                qt, _, _ = q_learning(env, cfg, params.gamma)
                dists.append(float(np.max(np.abs(qt.q - q_star))))
            medians.append(float(np.median(dists)))
        assert medians[2] < medians[1] < medians[0]

    def test_throughput_log_nondecreasing_smoothed(self, benchmark_config):
        from hotpolicy.model import simulate_policy
        cfg = benchmark_config
        mdp = build_mdp(cfg.params, cfg.markov)
        dist = initial_state_distribution(mdp.space, cfg.params)
        env = MdpEnvironment(mdp, dist, rng_seed=55)

        def evaluator(policy):
            return simulate_policy(policy.actions, cfg.markov, cfg.params, 20,
                                   400, cfg.eval_seed, space=mdp.space).mean

        lc = LearningConfig(epsilon=0.04, n_iterations=100, rng_seed=56)
        _, _, log = q_learning(env, lc, cfg.params.gamma, evaluator=evaluator)
        series = np.array([v for _, v in log])
        smoothed = np.convolve(series, np.ones(10) / 10, mode="valid")
        assert np.all(np.diff(smoothed) >= -1e-9)

    def test_learning_curve_csv(self, tmp_path):
        path = tmp_path / "curve.csv"
        write_learning_curve_csv([(1, 0.0), (2, 0.5)], 0.04, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "iteration,epsilon,throughput_estimate"
        assert lines[1].startswith("1,0.04,")
