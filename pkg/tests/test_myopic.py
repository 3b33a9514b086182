import numpy as np
import pytest

from hotpolicy.model import Trajectory, sample_trajectory
from hotpolicy.myopic import (_slot_objective, myopic_alpha, myopic_run,
                              myopic_slot, myopic_slots)


def grid_argmax(c, alpha_min, points=100_000):
    alphas = np.linspace(max(alpha_min, 1e-9), 1.0, points)
    vals = alphas * np.log2(1.0 + c * (1.0 - alphas) / alphas)
    k = int(np.argmax(vals))
    return float(alphas[k]), float(vals[k])


def slot_constants(h_ss, h_ps, e_h, params):
    stored = params.eta * e_h
    c = stored * h_ss / (params.tau * (params.sigma_n2 + h_ps * params.P_p))
    alpha_min = stored / (stored + params.p_max * params.tau)
    return c, alpha_min


class TestMyopicAlpha:
    def test_zero_energy_returns_one(self, benchmark_params):
        assert myopic_alpha(0.4e-6, 0.2e-6, 0.0, benchmark_params) == 1.0

    def test_small_gain_matches_grid(self, benchmark_params):
        # tiny c: do not assume the boundary wins, compare against the grid
        e_h = 1e-6
        c, alpha_min = slot_constants(0.2e-6, 0.4e-6, e_h, benchmark_params)
        astar = myopic_alpha(0.2e-6, 0.4e-6, e_h, benchmark_params, tol=1e-8)
        agrid, vgrid = grid_argmax(c, alpha_min)
        got = _slot_objective(astar, c)
        assert got >= vgrid - 1e-9
        assert abs(astar - agrid) <= 1e-4

    def test_benchmark_point_matches_grid(self, benchmark_params):
        c, alpha_min = slot_constants(0.4e-6, 0.2e-6, 0.4e-3, benchmark_params)
        assert c == pytest.approx(0.399, rel=1e-2)
        astar = myopic_alpha(0.4e-6, 0.2e-6, 0.4e-3, benchmark_params, tol=1e-8)
        agrid, _ = grid_argmax(c, alpha_min)
        assert abs(astar - agrid) <= 1e-4

    def test_constraint_slack_nonnegative(self, benchmark_params):
        rng = np.random.default_rng(6)
        for _ in range(50):
            h_ss = float(rng.choice([0.2e-6, 0.4e-6]))
            h_ps = float(rng.choice([0.2e-6, 0.4e-6]))
            e_h = float(rng.uniform(0.0, 1e-3))
            alpha = myopic_alpha(h_ss, h_ps, e_h, benchmark_params)
            slack = (alpha * benchmark_params.p_max * benchmark_params.tau
                     - (1 - alpha) * benchmark_params.eta * e_h)
            assert slack >= -1e-12

    def test_objective_concavity_midpoint(self):
        rng = np.random.default_rng(9)
        for _ in range(1000):
            c = float(rng.uniform(0.01, 5.0))
            a1, a2 = np.sort(rng.uniform(1e-6, 1.0, size=2))
            mid = 0.5 * (a1 + a2)
            assert _slot_objective(mid, c) >= (0.5 * _slot_objective(a1, c)
                                               + 0.5 * _slot_objective(a2, c)
                                               - 1e-12)


class TestMyopicRun:
    def test_zero_energy_trajectory(self, benchmark_params):
        traj = Trajectory(n_slots=4, h_ss=[0.4e-6] * 4, h_ps=[0.2e-6] * 4,
                          e_h=[0.0] * 4)
        assert myopic_run(traj, benchmark_params) == 0.0

    def test_single_slot_reduction(self, benchmark_params):
        traj = Trajectory(n_slots=1, h_ss=[0.4e-6], h_ps=[0.2e-6], e_h=[0.4e-3])
        slot = myopic_slot(0.4e-6, 0.2e-6, 0.4e-3, benchmark_params)
        assert myopic_run(traj, benchmark_params) == pytest.approx(
            benchmark_params.gamma * slot.rate, abs=1e-12)

    def test_matches_per_slot_grid_sum(self, benchmark_params, benchmark_markov):
        traj = sample_trajectory(benchmark_markov, 10, 33)
        total = myopic_run(traj, benchmark_params, tol=1e-8)
        oracle = 0.0
        for i in range(10):
            c, alpha_min = slot_constants(float(traj.h_ss[i]), float(traj.h_ps[i]),
                                          float(traj.e_h[i]), benchmark_params)
            _, v = grid_argmax(c, alpha_min)
            oracle += benchmark_params.gamma ** (i + 1) * v
        assert total == pytest.approx(oracle, abs=1e-3)

    def test_slot_decoupling_under_permutation(self, benchmark_params,
                                               benchmark_markov):
        traj = sample_trajectory(benchmark_markov, 8, 44)
        rates = [myopic_slot(float(traj.h_ss[i]), float(traj.h_ps[i]),
                             float(traj.e_h[i]), benchmark_params).rate
                 for i in range(8)]
        perm = np.random.default_rng(1).permutation(8)
        permuted = Trajectory(n_slots=8, h_ss=traj.h_ss[perm],
                              h_ps=traj.h_ps[perm], e_h=traj.e_h[perm])
        rates_p = [myopic_slot(float(permuted.h_ss[i]), float(permuted.h_ps[i]),
                               float(permuted.e_h[i]), benchmark_params).rate
                   for i in range(8)]
        assert sorted(rates) == pytest.approx(sorted(rates_p), abs=1e-12)

    def test_implied_power_stays_under_cap(self, benchmark_params,
                                           benchmark_markov):
        traj = sample_trajectory(benchmark_markov, 20, 55)
        for slot in myopic_slots(traj, benchmark_params):
            assert slot.power <= benchmark_params.p_max * (1 + 1e-9)
