"""Environment model for a slotted underlay energy-harvesting secondary link.

A secondary transmitter shares spectrum with a primary link. In each slot it
either harvests ambient energy into a finite battery or spends stored energy
transmitting, subject to a worst-case interference cap at the primary
receiver. Channel power gains and harvestable energies follow first-order
Markov chains over finite value sets, so after battery quantization the whole
system is a finite MDP.

This module holds the domain types, the per-slot physics, builders for the
enumerated MDP tensors, and seeded trajectory / policy simulators. All
quantities are SI (W, J, s); rates are bpcu.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

DEFAULT_BATTERY_STEP = 0.2e-3  # J; aligns with the default energy and power grids

_REL_TOL = 1e-9


class GridMisalignmentError(ValueError):
    """Battery grid step does not divide the battery capacity."""


class InfeasibleActionError(ValueError):
    """Transmit action would draw more energy than the battery holds."""


@dataclass
class SystemParams:
    """Physical constants of the secondary link.

    power_grid is the ordered transmit power set, ascending and starting at 0.
    gamma doubles as the per-slot survival probability and the MDP discount.
    """

    P_p: float            # primary transmit power (W)
    sigma_n2: float       # noise power at the secondary receiver (W)
    P_int: float          # worst-case interference cap at the primary receiver (W)
    eta: float            # harvesting efficiency, (0, 1]
    B_0: float            # initial battery energy (J)
    B_max: float          # battery capacity (J)
    gamma: float          # survival probability / discount factor, (0, 1)
    power_grid: tuple[float, ...]
    tau: float = 1.0      # slot length (s)

    def __post_init__(self):
        self.power_grid = tuple(float(p) for p in self.power_grid)
        if not (0.0 < self.gamma < 1.0):
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not (0.0 < self.eta <= 1.0):
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")
        for name in ("P_p", "sigma_n2", "P_int", "B_0", "B_max", "tau"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")
        if self.B_0 > self.B_max:
            raise ValueError("B_0 exceeds B_max")
        if not self.power_grid or self.power_grid[0] != 0.0:
            raise ValueError("power_grid must start at 0")
        if any(b <= a for a, b in zip(self.power_grid, self.power_grid[1:])):
            raise ValueError("power_grid must be strictly ascending")

    @property
    def p_max(self) -> float:
        return self.power_grid[-1]


@dataclass
class MarkovSpec:
    """Finite value sets and transition matrices for the exogenous chains.

    All channel links draw from the same channel value set and transition
    matrix. Value sets are kept strictly ascending so value-to-index lookups
    are unambiguous.
    """

    channel_values: np.ndarray   # (M_C,) channel power gains
    energy_values: np.ndarray    # (M_E,) harvestable energies (J)
    channel_tm: np.ndarray       # (M_C, M_C) row-stochastic
    energy_tm: np.ndarray        # (M_E, M_E) row-stochastic

    def __post_init__(self):
        self.channel_values = np.asarray(self.channel_values, dtype=float)
        self.energy_values = np.asarray(self.energy_values, dtype=float)
        self.channel_tm = np.asarray(self.channel_tm, dtype=float)
        self.energy_tm = np.asarray(self.energy_tm, dtype=float)
        for vals, name in ((self.channel_values, "channel_values"),
                           (self.energy_values, "energy_values")):
            if vals.ndim != 1 or vals.size == 0:
                raise ValueError(f"{name} must be a nonempty 1-D array")
            if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
                raise ValueError(f"{name} must be strictly positive and finite")
            if np.any(np.diff(vals) <= 0.0):
                raise ValueError(f"{name} must be strictly ascending")
        for tm, n, name in ((self.channel_tm, self.m_channel, "channel_tm"),
                            (self.energy_tm, self.m_energy, "energy_tm")):
            if tm.shape != (n, n):
                raise ValueError(f"{name} must be {n}x{n}")
            if np.any(tm < 0.0):
                raise ValueError(f"{name} has negative entries")
            if np.any(np.abs(tm.sum(axis=1) - 1.0) > 1e-12):
                raise ValueError(f"{name} rows must sum to 1 within 1e-12")

    @property
    def m_channel(self) -> int:
        return self.channel_values.size

    @property
    def m_energy(self) -> int:
        return self.energy_values.size

    @property
    def h_best(self) -> float:
        return float(self.channel_values[-1])


@dataclass(frozen=True)
class SystemState:
    """Index tuple (PT-SR gain, ST-SR gain, harvestable energy, battery level)."""

    h_ps_idx: int
    h_ss_idx: int
    e_idx: int
    b_idx: int


@dataclass(frozen=True)
class Action:
    """Harvest-or-transmit decision; harvesting forces the zero power index."""

    harvest: bool
    power_idx: int

    def __post_init__(self):
        if self.harvest and self.power_idx != 0:
            raise ValueError("harvest action must carry the zero power index")


def action_set(params: SystemParams) -> list[Action]:
    """Action list: harvest first, then one transmit action per nonzero power.

    The harvest-first ordering is the tie-break convention used by every
    argmax in this package.
    """
    actions = [Action(harvest=True, power_idx=0)]
    actions.extend(Action(harvest=False, power_idx=j)
                   for j in range(1, len(params.power_grid)))
    return actions


@dataclass
class Trajectory:
    """A realized exogenous sequence over n_slots slots (slot i is index i-1)."""

    n_slots: int
    h_ss: np.ndarray
    h_ps: np.ndarray
    e_h: np.ndarray

    def __post_init__(self):
        self.h_ss = np.asarray(self.h_ss, dtype=float)
        self.h_ps = np.asarray(self.h_ps, dtype=float)
        self.e_h = np.asarray(self.e_h, dtype=float)
        if not (self.h_ss.size == self.h_ps.size == self.e_h.size == self.n_slots):
            raise ValueError("trajectory arrays must all have length n_slots")


# ---------------------------------------------------------------------------
# Per-slot physics
# ---------------------------------------------------------------------------

def max_power(params: SystemParams, markov: MarkovSpec) -> float:
    """Largest transmit power honoring the interference cap on the best channel."""
    return params.P_int / markov.h_best


def check_power_cap(params: SystemParams, markov: MarkovSpec) -> None:
    """Require the top of the power grid to sit exactly at the interference cap."""
    cap = max_power(params, markov)
    if abs(params.p_max - cap) > _REL_TOL * max(cap, 1e-30):
        raise ValueError(
            f"power grid tops out at {params.p_max} W but the interference cap "
            f"allows {cap} W")


def build_params(markov: MarkovSpec, *, P_p: float, sigma_n2: float,
                 P_int: float, eta: float = 1.0, B_0: float = 0.0,
                 B_max: float, gamma: float = 0.9, n_power_levels: int = 5,
                 tau: float = 1.0) -> SystemParams:
    """Construct SystemParams with the power grid derived from the cap.

    The grid is n_power_levels equal steps from 0 to P_int / h_best, which
    pins max(power_grid) to the worst-case interference constraint.
    """
    p_max = P_int / markov.h_best
    grid = tuple(p_max * k / n_power_levels for k in range(n_power_levels + 1))
    params = SystemParams(P_p=P_p, sigma_n2=sigma_n2, P_int=P_int, eta=eta,
                          B_0=B_0, B_max=B_max, gamma=gamma,
                          power_grid=grid, tau=tau)
    check_power_cap(params, markov)
    return params


def instantaneous_rate(h_ss: float, h_ps: float, P_s: float,
                       params: SystemParams) -> float:
    """Undiscounted achievable rate log2(1 + h_ss P_s / (sigma^2 + h_ps P_p)).

    Callers apply the per-slot gamma^i weight; the MDP applies gamma once as
    its discount, so the discount never enters twice.
    """
    return float(np.log2(1.0 + h_ss * P_s / (params.sigma_n2 + h_ps * params.P_p)))


def battery_step(B: float, action: Action, E_H: float,
                 params: SystemParams) -> float:
    """Continuous battery update, clamped at capacity.

    Raises InfeasibleActionError when a transmit action would draw more than
    the stored energy (energy neutrality).
    """
    if action.harvest:
        return min(B + params.eta * E_H, params.B_max)
    drawn = params.power_grid[action.power_idx] * params.tau
    if drawn > B + 1e-15 * max(1.0, B):
        raise InfeasibleActionError(
            f"transmit draws {drawn} J but battery holds {B} J")
    return min(B - drawn, params.B_max)


def quantize_down(value: float, step: float) -> int:
    """Grid index of value rounded down (never fabricates energy)."""
    if step <= 0.0:
        return 0
    return int(np.floor(value / step + _REL_TOL))


# ---------------------------------------------------------------------------
# State enumeration and MDP tensors
# ---------------------------------------------------------------------------

@dataclass
class StateSpace:
    """Enumeration of all (h_ps, h_ss, E_H, B) combinations.

    The flat index nests as ((h_ps * M_C + h_ss) * M_E + e) * n_b + b, i.e.
    battery fastest. Both directions of the index map are bijective.
    """

    markov: MarkovSpec
    battery_grid: np.ndarray
    battery_step_size: float

    @property
    def n_battery(self) -> int:
        return self.battery_grid.size

    @property
    def n_states(self) -> int:
        m = self.markov
        return m.m_channel * m.m_channel * m.m_energy * self.n_battery

    @property
    def n_exogenous(self) -> int:
        m = self.markov
        return m.m_channel * m.m_channel * m.m_energy

    def state_index(self, state: SystemState) -> int:
        m = self.markov
        for idx, bound in ((state.h_ps_idx, m.m_channel),
                           (state.h_ss_idx, m.m_channel),
                           (state.e_idx, m.m_energy),
                           (state.b_idx, self.n_battery)):
            if not 0 <= idx < bound:
                raise IndexError(f"state component {idx} out of range [0, {bound})")
        exo = (state.h_ps_idx * m.m_channel + state.h_ss_idx) * m.m_energy + state.e_idx
        return exo * self.n_battery + state.b_idx

    def state_at(self, index: int) -> SystemState:
        if not 0 <= index < self.n_states:
            raise IndexError(f"state index {index} out of range")
        m = self.markov
        exo, b = divmod(index, self.n_battery)
        rest, e = divmod(exo, m.m_energy)
        h_ps, h_ss = divmod(rest, m.m_channel)
        return SystemState(h_ps_idx=h_ps, h_ss_idx=h_ss, e_idx=e, b_idx=b)

    def states(self) -> list[SystemState]:
        return [self.state_at(i) for i in range(self.n_states)]

    def component_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Per-state component indices as four (n_states,) int arrays."""
        idx = np.arange(self.n_states)
        exo, b = np.divmod(idx, self.n_battery)
        rest, e = np.divmod(exo, self.markov.m_energy)
        h_ps, h_ss = np.divmod(rest, self.markov.m_channel)
        return h_ps, h_ss, e, b


def enumerate_states(params: SystemParams, markov: MarkovSpec,
                     battery_grid_step: float = DEFAULT_BATTERY_STEP) -> StateSpace:
    """Build the quantized state space; the step must divide B_max exactly."""
    if battery_grid_step <= 0.0:
        raise GridMisalignmentError("battery grid step must be positive")
    ratio = params.B_max / battery_grid_step
    if abs(ratio - round(ratio)) > 1e-9:
        raise GridMisalignmentError(
            f"battery step {battery_grid_step} J does not divide "
            f"B_max {params.B_max} J")
    n_b = int(round(ratio)) + 1
    grid = np.arange(n_b) * battery_grid_step
    return StateSpace(markov=markov, battery_grid=grid,
                      battery_step_size=battery_grid_step)


@dataclass
class MdpTensors:
    """Dense transition/reward tensors of the enumerated MDP.

    transition[j, k, a] is the probability of moving from state j to state k
    under action a; reward[j, a] is the expected immediate rate (zero for the
    harvest action by construction).
    """

    n_states: int
    n_actions: int
    transition: np.ndarray       # (n_states, n_states, n_actions)
    reward: np.ndarray           # (n_states, n_actions)
    space: Optional[StateSpace] = None
    actions: Optional[list[Action]] = None


class _SimTables:
    """Lookup tables shared by the MDP builder and the simulators.

    Battery dynamics live entirely on the grid: harvesting adds a floor-rounded
    index gain, transmitting subtracts a ceil-rounded index cost, and requests
    that exceed the stored energy are remapped to the largest feasible grid
    power so the action set stays state-independent.
    """

    def __init__(self, params: SystemParams, markov: MarkovSpec, space: StateSpace):
        self.params = params
        self.markov = markov
        self.space = space
        step = space.battery_step_size
        powers = np.asarray(params.power_grid)
        self.actions = action_set(params)
        self.act_harvest = np.array([a.harvest for a in self.actions])
        self.act_pidx = np.array([a.power_idx for a in self.actions])
        # index gain per energy value (floor: pessimistic rounding)
        self.gain = np.array([quantize_down(params.eta * e, step)
                              for e in markov.energy_values], dtype=np.int64)
        # index cost per power level (ceil: pessimistic rounding)
        self.cost = np.array([int(np.ceil(p * params.tau / step - _REL_TOL)) if step > 0 else 0
                              for p in powers], dtype=np.int64)
        # largest feasible power index per battery index
        draw = powers * params.tau
        bvals = space.battery_grid * (1.0 + 1e-12) + 1e-18
        self.max_feasible_pidx = (draw[None, :] <= bvals[:, None]).cumprod(axis=1).sum(axis=1) - 1
        # rate per (h_ss_idx, h_ps_idx, power_idx)
        h = markov.channel_values
        denom = params.sigma_n2 + h * params.P_p
        self.rate_lut = np.log2(1.0 + h[:, None, None] * powers[None, None, :]
                                / denom[None, :, None])
        self.cum_channel = np.cumsum(markov.channel_tm, axis=1)
        self.cum_energy = np.cumsum(markov.energy_tm, axis=1)

    def effective_power_idx(self, action_idx: np.ndarray, b_idx: np.ndarray) -> np.ndarray:
        req = self.act_pidx[action_idx]
        eff = np.minimum(req, self.max_feasible_pidx[b_idx])
        return np.where(self.act_harvest[action_idx], 0, eff)

    def next_battery_idx(self, action_idx: np.ndarray, eff_pidx: np.ndarray,
                         b_idx: np.ndarray, e_idx: np.ndarray) -> np.ndarray:
        harvested = np.minimum(b_idx + self.gain[e_idx], self.space.n_battery - 1)
        drained = b_idx - self.cost[eff_pidx]
        return np.where(self.act_harvest[action_idx], harvested, drained)

    def rates(self, h_ss_idx: np.ndarray, h_ps_idx: np.ndarray,
              eff_pidx: np.ndarray) -> np.ndarray:
        return self.rate_lut[h_ss_idx, h_ps_idx, eff_pidx]


def build_mdp(params: SystemParams, markov: MarkovSpec,
              battery_grid_step: float = DEFAULT_BATTERY_STEP,
              space: Optional[StateSpace] = None) -> MdpTensors:
    """Assemble dense T and R tensors.

    T factorizes as the joint exogenous chain times the deterministic
    (grid-rounded) battery move; rewards are the instantaneous rates of the
    effectively issued power, zero for harvesting.
    """
    if space is None:
        space = enumerate_states(params, markov, battery_grid_step)
    tables = _SimTables(params, markov, space)
    n_s, n_a, n_b = space.n_states, len(tables.actions), space.n_battery
    joint_exo = np.kron(np.kron(markov.channel_tm, markov.channel_tm),
                        markov.energy_tm)
    h_ps, h_ss, e, b = space.component_arrays()
    exo = (h_ps * markov.m_channel + h_ss) * markov.m_energy + e
    exo_targets = np.arange(space.n_exogenous) * n_b

    transition = np.zeros((n_s, n_s, n_a))
    reward = np.zeros((n_s, n_a))
    for a in range(n_a):
        a_vec = np.full(n_s, a)
        eff = tables.effective_power_idx(a_vec, b)
        b_next = tables.next_battery_idx(a_vec, eff, b, e)
        if not tables.act_harvest[a]:
            reward[:, a] = tables.rates(h_ss, h_ps, eff)
        for s in range(n_s):
            transition[s, exo_targets + b_next[s], a] = joint_exo[exo[s]]
    return MdpTensors(n_states=n_s, n_actions=n_a, transition=transition,
                      reward=reward, space=space, actions=tables.actions)


def initial_state_distribution(space: StateSpace, params: SystemParams) -> np.ndarray:
    """Uniform over exogenous states, battery at B_0 rounded down to the grid."""
    b0 = min(quantize_down(params.B_0, space.battery_step_size), space.n_battery - 1)
    dist = np.zeros(space.n_states)
    dist[b0::space.n_battery] = 1.0 / space.n_exogenous
    return dist


# ---------------------------------------------------------------------------
# Sampling and simulation
# ---------------------------------------------------------------------------

def _sample_chain(tm: np.ndarray, values: np.ndarray, n: int,
                  rng: np.random.Generator, p0: np.ndarray) -> np.ndarray:
    last = values.size - 1
    cum = np.cumsum(tm, axis=1)
    idx = np.empty(n, dtype=np.int64)
    idx[0] = min(int(np.searchsorted(np.cumsum(p0), rng.random(), side="right")), last)
    for i in range(1, n):
        idx[i] = min(int(np.searchsorted(cum[idx[i - 1]], rng.random(), side="right")), last)
    return values[idx]


def sample_trajectory(markov: MarkovSpec, n_slots: int, rng_seed: int,
                      initial_distribution: Optional[tuple[np.ndarray, np.ndarray]] = None
                      ) -> Trajectory:
    """Draw an exogenous trajectory; deterministic for a fixed seed.

    Chains are drawn in the order h_ss, h_ps, e_h, each from its initial
    distribution (uniform unless given as (channel_probs, energy_probs)).
    """
    if n_slots < 1:
        raise ValueError("n_slots must be >= 1")
    rng = np.random.default_rng(rng_seed)
    if initial_distribution is None:
        p_c = np.full(markov.m_channel, 1.0 / markov.m_channel)
        p_e = np.full(markov.m_energy, 1.0 / markov.m_energy)
    else:
        p_c = np.asarray(initial_distribution[0], dtype=float)
        p_e = np.asarray(initial_distribution[1], dtype=float)
    h_ss = _sample_chain(markov.channel_tm, markov.channel_values, n_slots, rng, p_c)
    h_ps = _sample_chain(markov.channel_tm, markov.channel_values, n_slots, rng, p_c)
    e_h = _sample_chain(markov.energy_tm, markov.energy_values, n_slots, rng, p_e)
    return Trajectory(n_slots=n_slots, h_ss=h_ss, h_ps=h_ps, e_h=e_h)


def _values_to_indices(values: np.ndarray, value_set: np.ndarray,
                       what: str) -> np.ndarray:
    idx = np.searchsorted(value_set, values)
    idx = np.clip(idx, 0, value_set.size - 1)
    left = np.clip(idx - 1, 0, value_set.size - 1)
    use_left = np.abs(values - value_set[left]) < np.abs(values - value_set[idx])
    idx = np.where(use_left, left, idx)
    if np.any(np.abs(value_set[idx] - values) > 1e-9 * np.maximum(np.abs(values), 1e-30)):
        raise ValueError(f"{what} contains values outside the Markov value set")
    return idx


@dataclass
class SimulationResult:
    """Monte-Carlo estimate of the discounted throughput of a policy."""

    mean: float
    stderr: float
    episodes: int
    episode_values: np.ndarray
    mean_harvest_slots: float
    mean_transmit_slots: float
    slot_battery_j: Optional[np.ndarray] = None   # (n_slots, episodes) start-of-slot energy
    slot_power_w: Optional[np.ndarray] = None     # (n_slots, episodes) issued power


def simulate_policy(policy: np.ndarray, markov: MarkovSpec, params: SystemParams,
                    n_slots: int, episodes: int, rng_seed: int,
                    battery_grid_step: float = DEFAULT_BATTERY_STEP,
                    space: Optional[StateSpace] = None,
                    collect_slots: bool = False) -> SimulationResult:
    """Estimate sum_i gamma^i * rate_i under a state-indexed policy.

    Episodes start from the uniform exogenous distribution with the battery at
    B_0 (rounded down) and run n_slots slots with explicit gamma^i weights,
    slot 1 carrying weight gamma. Infeasible transmit requests are remapped to
    the largest feasible grid power.
    """
    policy = np.asarray(policy, dtype=np.int64)
    if space is None:
        space = enumerate_states(params, markov, battery_grid_step)
    if policy.size != space.n_states:
        raise ValueError("policy must assign an action to every state")
    tables = _SimTables(params, markov, space)
    rng = np.random.default_rng(rng_seed)
    m_c, m_e, n_b = markov.m_channel, markov.m_energy, space.n_battery

    h_ss = rng.integers(0, m_c, size=episodes)
    h_ps = rng.integers(0, m_c, size=episodes)
    e = rng.integers(0, m_e, size=episodes)
    b = np.full(episodes, min(quantize_down(params.B_0, space.battery_step_size), n_b - 1))

    values = np.zeros(episodes)
    harvest_slots = np.zeros(episodes)
    log_b = np.empty((n_slots, episodes)) if collect_slots else None
    log_p = np.empty((n_slots, episodes)) if collect_slots else None
    powers = np.asarray(params.power_grid)

    for i in range(1, n_slots + 1):
        state = ((h_ps * m_c + h_ss) * m_e + e) * n_b + b
        act = policy[state]
        eff = tables.effective_power_idx(act, b)
        rate = np.where(tables.act_harvest[act], 0.0, tables.rates(h_ss, h_ps, eff))
        values += params.gamma ** i * rate
        harvest_slots += tables.act_harvest[act]
        if collect_slots:
            log_b[i - 1] = space.battery_grid[b]
            log_p[i - 1] = np.where(tables.act_harvest[act], 0.0, powers[eff])
        b = tables.next_battery_idx(act, eff, b, e)
        h_ss = (rng.random(episodes)[:, None] < tables.cum_channel[h_ss]).argmax(axis=1)
        h_ps = (rng.random(episodes)[:, None] < tables.cum_channel[h_ps]).argmax(axis=1)
        e = (rng.random(episodes)[:, None] < tables.cum_energy[e]).argmax(axis=1)

    stderr = float(values.std(ddof=1) / np.sqrt(episodes)) if episodes > 1 else 0.0
    return SimulationResult(mean=float(values.mean()), stderr=stderr,
                            episodes=episodes, episode_values=values,
                            mean_harvest_slots=float(harvest_slots.mean()),
                            mean_transmit_slots=float(n_slots - harvest_slots.mean()),
                            slot_battery_j=log_b, slot_power_w=log_p)


@dataclass
class ReplayResult:
    """Deterministic replay of a policy on one fixed trajectory."""

    value: float
    i_h: np.ndarray        # (n_slots,) harvest indicators
    powers: np.ndarray     # (n_slots,) issued powers (W)
    rates: np.ndarray      # (n_slots,) undiscounted rates (bpcu)

    @property
    def transmit_slots(self) -> int:
        return int(np.sum(self.i_h == 0))

    @property
    def harvest_slots(self) -> int:
        return int(np.sum(self.i_h == 1))


def replay_policy(policy: np.ndarray, trajectory: Trajectory, params: SystemParams,
                  markov: MarkovSpec,
                  battery_grid_step: float = DEFAULT_BATTERY_STEP,
                  space: Optional[StateSpace] = None) -> ReplayResult:
    """Run a state-indexed policy against a known trajectory slot by slot."""
    policy = np.asarray(policy, dtype=np.int64)
    if space is None:
        space = enumerate_states(params, markov, battery_grid_step)
    tables = _SimTables(params, markov, space)
    hss_idx = _values_to_indices(trajectory.h_ss, markov.channel_values, "h_ss")
    hps_idx = _values_to_indices(trajectory.h_ps, markov.channel_values, "h_ps")
    e_idx = _values_to_indices(trajectory.e_h, markov.energy_values, "e_h")
    m_c, m_e, n_b = markov.m_channel, markov.m_energy, space.n_battery
    powers = np.asarray(params.power_grid)

    b = min(quantize_down(params.B_0, space.battery_step_size), n_b - 1)
    n = trajectory.n_slots
    i_h = np.zeros(n, dtype=np.int64)
    issued = np.zeros(n)
    rates = np.zeros(n)
    value = 0.0
    for i in range(n):
        state = ((hps_idx[i] * m_c + hss_idx[i]) * m_e + e_idx[i]) * n_b + b
        a = int(policy[state])
        one = np.array([a])
        eff = int(tables.effective_power_idx(one, np.array([b]))[0])
        if tables.act_harvest[a]:
            i_h[i] = 1
        else:
            issued[i] = powers[eff]
            rates[i] = float(tables.rate_lut[hss_idx[i], hps_idx[i], eff])
            value += params.gamma ** (i + 1) * rates[i]
        b = int(tables.next_battery_idx(one, np.array([eff]), np.array([b]),
                                        np.array([e_idx[i]]))[0])
    return ReplayResult(value=value, i_h=i_h, powers=issued, rates=rates)


# ---------------------------------------------------------------------------
# Trajectory CSV round-trip
# ---------------------------------------------------------------------------

TRAJECTORY_HEADER = ("slot", "h_ss", "h_ps", "e_h")


def write_trajectory_csv(trajectory: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_HEADER)
        for i in range(trajectory.n_slots):
            writer.writerow([i + 1, repr(float(trajectory.h_ss[i])),
                             repr(float(trajectory.h_ps[i])),
                             repr(float(trajectory.e_h[i]))])


def read_trajectory_csv(path, markov: Optional[MarkovSpec] = None) -> Trajectory:
    """Load a trajectory; when a MarkovSpec is given, validate set membership."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRAJECTORY_HEADER:
            raise ValueError(f"unexpected trajectory header {header}")
        rows = [row for row in reader if row]
    h_ss = np.array([float(r[1]) for r in rows])
    h_ps = np.array([float(r[2]) for r in rows])
    e_h = np.array([float(r[3]) for r in rows])
    traj = Trajectory(n_slots=len(rows), h_ss=h_ss, h_ps=h_ps, e_h=e_h)
    if markov is not None:
        _values_to_indices(traj.h_ss, markov.channel_values, "h_ss")
        _values_to_indices(traj.h_ps, markov.channel_values, "h_ps")
        _values_to_indices(traj.e_h, markov.energy_values, "e_h")
    return traj
