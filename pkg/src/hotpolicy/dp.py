"""Exact online policy via policy iteration on the enumerated MDP.

Evaluation uses synchronous (Jacobi) sweeps until the sup-norm of successive
iterates drops below delta * (1 - gamma) / gamma, which bounds the true
fixed-point error by delta. Improvement is the greedy argmax with ties broken
toward the lowest action index; the loop stops when two consecutive
improvements return the same policy.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .model import MarkovSpec, MdpTensors, StateSpace, SystemParams

DEFAULT_DELTA = 1e-8


@dataclass
class ValueTable:
    """Expected discounted sum-rate per state (bpcu)."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)


@dataclass
class Policy:
    """Deterministic stationary policy: one action index per state."""

    actions: np.ndarray

    def __post_init__(self):
        self.actions = np.asarray(self.actions, dtype=np.int64)


def _policy_matrices(policy: np.ndarray, mdp: MdpTensors):
    idx = np.arange(mdp.n_states)
    t_pi = mdp.transition[idx, :, policy]
    c_pi = mdp.reward[idx, policy]
    return t_pi, c_pi


def policy_evaluation(policy: Policy, mdp: MdpTensors, gamma: float,
                      delta: float = DEFAULT_DELTA) -> ValueTable:
    """Iterate V <- C_pi + gamma T_pi V to within delta of the fixed point."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    t_pi, c_pi = _policy_matrices(np.asarray(policy.actions, dtype=np.int64), mdp)
    stop = delta * (1.0 - gamma) / gamma
    v = np.zeros(mdp.n_states)
    while True:
        v_next = c_pi + gamma * (t_pi @ v)
        gap = float(np.max(np.abs(v_next - v))) if v.size else 0.0
        v = v_next
        if gap <= stop:
            return ValueTable(values=v)


def q_from_v(v: ValueTable, mdp: MdpTensors, gamma: float) -> np.ndarray:
    """Action values Q[s, a] = C[s, a] + gamma * sum_k T[s, k, a] V[k]."""
    return mdp.reward + gamma * np.einsum("ska,k->sa", mdp.transition, v.values)


def policy_improvement(v: ValueTable, mdp: MdpTensors, gamma: float) -> Policy:
    """Greedy policy of the one-step lookahead; argmax ties go to index 0 first."""
    return Policy(actions=np.argmax(q_from_v(v, mdp, gamma), axis=1))


def policy_iteration(mdp: MdpTensors, gamma: float,
                     delta: float = DEFAULT_DELTA) -> tuple[Policy, ValueTable, int]:
    """Alternate evaluation and greedy improvement until the policy repeats."""
    policy = Policy(actions=np.zeros(mdp.n_states, dtype=np.int64))
    iterations = 0
    while True:
        iterations += 1
        v = policy_evaluation(policy, mdp, gamma, delta)
        improved = policy_improvement(v, mdp, gamma)
        if np.array_equal(improved.actions, policy.actions):
            return policy, v, iterations
        policy = improved


def bellman_residual(v: ValueTable, mdp: MdpTensors, gamma: float) -> float:
    """Sup-norm of V - max_a Q(., a); small at an optimal pair."""
    return float(np.max(np.abs(v.values - q_from_v(v, mdp, gamma).max(axis=1))))


POLICY_HEADER = ("state_index", "h_ps", "h_ss", "e_h", "b", "action",
                 "harvest", "power", "value")


def write_policy_csv(policy: Policy, values: ValueTable, space: StateSpace,
                     params: SystemParams, markov: MarkovSpec, path) -> None:
    """Dump a policy and its value table with decoded state components."""
    h_ps, h_ss, e, b = space.component_arrays()
    powers = np.asarray(params.power_grid)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(POLICY_HEADER)
        for s in range(space.n_states):
            a = int(policy.actions[s])
            harvest = 1 if a == 0 else 0
            power = 0.0 if harvest else float(powers[a])
            writer.writerow([
                s,
                repr(float(markov.channel_values[h_ps[s]])),
                repr(float(markov.channel_values[h_ss[s]])),
                repr(float(markov.energy_values[e[s]])),
                repr(float(space.battery_grid[b[s]])),
                a, harvest, repr(power), repr(float(values.values[s])),
            ])
