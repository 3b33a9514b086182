"""Model-free harvest-or-transmit learning with tabular Q-learning.

The learner only ever touches an environment through reset() and
step(state, action); transition and reward tensors stay hidden. Exploration
is epsilon-greedy and the per-cell learning rate follows a visit-count power
schedule 1 / (1 + count)^omega, which satisfies the usual stochastic
approximation step-size conditions for omega in (0.5, 1].
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .dp import Policy
from .model import MdpTensors, initial_state_distribution


@dataclass
class QTable:
    """Action-value estimates plus per-cell visit counts."""

    q: np.ndarray
    visit_counts: np.ndarray

    @classmethod
    def zeros(cls, n_states: int, n_actions: int) -> "QTable":
        return cls(q=np.zeros((n_states, n_actions)),
                   visit_counts=np.zeros((n_states, n_actions), dtype=np.int64))


@dataclass
class LearningConfig:
    epsilon: float
    n_iterations: int
    schedule_exponent: float = 0.8   # omega
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.n_iterations < 0:
            raise ValueError("n_iterations must be nonnegative")
        if not 0.5 < self.schedule_exponent <= 1.0:
            raise ValueError("schedule_exponent must lie in (0.5, 1]")


def learning_rate(visit_count: int, omega: float) -> float:
    """Step size 1 / (1 + visit_count)^omega for the given cell."""
    if visit_count < 0:
        raise ValueError("visit_count must be nonnegative")
    return (1.0 + visit_count) ** -omega


def epsilon_greedy(qtable: QTable, state: int, epsilon: float,
                   rng: np.random.Generator) -> int:
    """Random action with probability epsilon, else greedy (ties to index 0)."""
    n_actions = qtable.q.shape[1]
    if rng.random() < epsilon:
        return int(rng.integers(n_actions))
    return int(np.argmax(qtable.q[state]))


def q_update(qtable: QTable, s: int, a: int, reward: float, s_next: int,
             gamma: float, omega: float) -> QTable:
    """One Robbins-Monro update of the visited cell; all others untouched."""
    alpha = learning_rate(int(qtable.visit_counts[s, a]), omega)
    target = reward + gamma * float(np.max(qtable.q[s_next]))
    qtable.q[s, a] = (1.0 - alpha) * qtable.q[s, a] + alpha * target
    qtable.visit_counts[s, a] += 1
    return qtable


class MdpEnvironment:
    """Sampling-only wrapper around enumerated MDP tensors.

    Exposes reset() and step(state, action) -> (next_state, reward); the
    learner never sees the tensors themselves.
    """

    def __init__(self, mdp: MdpTensors, initial_distribution: Optional[np.ndarray] = None,
                 rng_seed: int = 0):
        self._reward = mdp.reward
        self._cum = np.cumsum(mdp.transition, axis=1)   # (s, k, a) cumulative over k
        self.n_states = mdp.n_states
        self.n_actions = mdp.n_actions
        if initial_distribution is None:
            initial_distribution = np.full(mdp.n_states, 1.0 / mdp.n_states)
        p0 = np.asarray(initial_distribution, dtype=float)
        if p0.size != mdp.n_states or abs(p0.sum() - 1.0) > 1e-9:
            raise ValueError("initial distribution must be a length-n_states pmf")
        self._cum0 = np.cumsum(p0)
        self._rng = np.random.default_rng(rng_seed)
        self._last = self.n_states - 1

    @classmethod
    def from_mdp(cls, mdp: MdpTensors, params, rng_seed: int = 0) -> "MdpEnvironment":
        return cls(mdp, initial_state_distribution(mdp.space, params), rng_seed)

    def reset(self) -> int:
        return min(int(np.searchsorted(self._cum0, self._rng.random(), side="right")),
                   self._last)

    def step(self, state: int, action: int) -> tuple[int, float]:
        nxt = min(int(np.searchsorted(self._cum[state, :, action],
                                      self._rng.random(), side="right")), self._last)
        return nxt, float(self._reward[state, action])


def greedy_policy(qtable: QTable) -> Policy:
    return Policy(actions=np.argmax(qtable.q, axis=1))


def q_learning(env: MdpEnvironment, config: LearningConfig, gamma: float,
               evaluator: Optional[Callable[[Policy], float]] = None
               ) -> tuple[QTable, Policy, list[tuple[int, float]]]:
    """Run n_iterations select-act-observe-update steps from a sampled start.

    After each update the episode restarts with probability 1 - gamma, which
    realizes the per-slot termination semantics while the iteration counter
    keeps counting updates. When an evaluator is given, the greedy policy's
    estimated throughput is logged after every iteration.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    rng = np.random.default_rng(config.rng_seed)
    qtable = QTable.zeros(env.n_states, env.n_actions)
    q = qtable.q
    counts = qtable.visit_counts
    omega = config.schedule_exponent
    epsilon = config.epsilon
    n_actions = env.n_actions
    log: list[tuple[int, float]] = []

    s = env.reset()
    for i in range(1, config.n_iterations + 1):
        if rng.random() < epsilon:
            a = int(rng.integers(n_actions))
        else:
            a = int(np.argmax(q[s]))
        s_next, r = env.step(s, a)
        alpha = (1.0 + counts[s, a]) ** -omega
        q[s, a] = (1.0 - alpha) * q[s, a] + alpha * (r + gamma * q[s_next].max())
        counts[s, a] += 1
        s = s_next
        if rng.random() < 1.0 - gamma:
            s = env.reset()
        if evaluator is not None:
            log.append((i, float(evaluator(greedy_policy(qtable)))))
    return qtable, greedy_policy(qtable), log


LEARNING_CURVE_HEADER = ("iteration", "epsilon", "throughput_estimate")


def write_learning_curve_csv(log: list[tuple[int, float]], epsilon: float, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LEARNING_CURVE_HEADER)
        for iteration, estimate in log:
            writer.writerow([iteration, repr(float(epsilon)), repr(float(estimate))])


def write_qtable_csv(qtable: QTable, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["state_index", "action", "q_value", "visits"])
        n_states, n_actions = qtable.q.shape
        for s in range(n_states):
            for a in range(n_actions):
                writer.writerow([s, a, repr(float(qtable.q[s, a])),
                                 int(qtable.visit_counts[s, a])])
