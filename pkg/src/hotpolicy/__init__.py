"""Harvest-or-transmit policy toolkit for an energy-harvesting underlay link."""

from .model import (Action, DEFAULT_BATTERY_STEP, GridMisalignmentError,
                    InfeasibleActionError, MarkovSpec, MdpTensors, StateSpace,
                    SystemParams, SystemState, Trajectory, action_set,
                    battery_step, build_mdp, build_params, enumerate_states,
                    initial_state_distribution, instantaneous_rate, max_power,
                    read_trajectory_csv, replay_policy, sample_trajectory,
                    simulate_policy, write_trajectory_csv)
from .dp import (Policy, ValueTable, bellman_residual, policy_evaluation,
                 policy_improvement, policy_iteration, q_from_v)
from .rl import (LearningConfig, MdpEnvironment, QTable, epsilon_greedy,
                 greedy_policy, learning_rate, q_learning, q_update)
from .offline import (BendersCut, EnumerationSizeError, GbdResult,
                      IterationLimitError, MasterProblem, OfflineInstance,
                      PrimalDuals, PrimalSolution, brute_force_offline,
                      cut_from_solution, gbd, lagrangian_value, solve_master,
                      solve_primal, waterfill_power)
from .myopic import MyopicSlot, myopic_alpha, myopic_run, myopic_slots
from .harness import (ExperimentConfig, Report, ReportRow, config_hash,
                      dbm_to_watts, default_config, default_markov,
                      load_config, run_capacity_sweeps, run_comparison,
                      run_epsilon_sweep, write_report_csv)

__version__ = "0.1.0"
