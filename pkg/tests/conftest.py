import numpy as np
import pytest

from hotpolicy import harness
from hotpolicy.model import MarkovSpec, MdpTensors, SystemParams


@pytest.fixture(scope="session")
def benchmark_config():
    return harness.default_config()


@pytest.fixture(scope="session")
def benchmark_markov(benchmark_config):
    return benchmark_config.markov


@pytest.fixture(scope="session")
def benchmark_params(benchmark_config):
    return benchmark_config.params


def make_random_mdp(n_states: int, n_actions: int, seed: int,
                    reward_scale: float = 1.0) -> MdpTensors:
    """Dense random MDP with Dirichlet transition rows and uniform rewards."""
    rng = np.random.default_rng(seed)
    transition = np.empty((n_states, n_states, n_actions))
    for a in range(n_actions):
        transition[:, :, a] = rng.dirichlet(np.ones(n_states), size=n_states)
    reward = reward_scale * rng.random((n_states, n_actions))
    return MdpTensors(n_states=n_states, n_actions=n_actions,
                      transition=transition, reward=reward)


def exact_policy_value(policy: np.ndarray, mdp: MdpTensors, gamma: float) -> np.ndarray:
    """Closed-form policy evaluation by dense linear solve (oracle)."""
    idx = np.arange(mdp.n_states)
    t_pi = mdp.transition[idx, :, policy]
    c_pi = mdp.reward[idx, policy]
    return np.linalg.solve(np.eye(mdp.n_states) - gamma * t_pi, c_pi)


def enumerate_optimal_value(mdp: MdpTensors, gamma: float) -> np.ndarray:
    """Best value over every deterministic policy (exponential oracle)."""
    import itertools

    best = np.full(mdp.n_states, -np.inf)
    for actions in itertools.product(range(mdp.n_actions), repeat=mdp.n_states):
        v = exact_policy_value(np.array(actions), mdp, gamma)
        best = np.maximum(best, v)
    return best


def teaching_mdp():
    """Fixed 4-state physical MDP: one channel level, two energy levels,
    battery in {0, 0.2 mJ}, actions {harvest, transmit 0.2 mW}."""
    from hotpolicy.model import build_mdp, build_params

    markov = MarkovSpec(channel_values=np.array([0.4e-6]),
                        energy_values=np.array([0.2e-3, 0.4e-3]),
                        channel_tm=np.array([[1.0]]),
                        energy_tm=np.array([[0.5, 0.5], [0.5, 0.5]]))
    params = build_params(markov, P_p=2e-3, sigma_n2=1e-12, P_int=0.2e-3 * 0.4e-6,
                          eta=1.0, B_0=0.0, B_max=0.2e-3, gamma=0.9,
                          n_power_levels=1)
    return build_mdp(params, markov, battery_grid_step=0.2e-3), params, markov
