"""Command-line front end: simulate, solve, learn, and sweep from config files."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import dp, harness, myopic, rl
from .model import (build_mdp, enumerate_states, initial_state_distribution,
                    read_trajectory_csv, sample_trajectory, simulate_policy,
                    write_trajectory_csv)
from .offline import (EnumerationSizeError, IterationLimitError,
                      OfflineInstance, SOLUTION_HEADER, gbd, write_bounds_csv,
                      write_solution_csv)


def _load(args) -> harness.ExperimentConfig:
    config = harness.load_config(args.config) if args.config \
        else harness.default_config()
    if getattr(args, "sweep", None):
        variable, _, values = args.sweep.partition("=")
        if not values:
            raise ValueError("expected --sweep var=v1,v2,...")
        config = harness.ExperimentConfig(
            **{**config.__dict__, "sweep_variable": variable.strip(),
               "sweep_values": tuple(float(v) for v in values.split(","))})
    return config


def _seed(args, config) -> int:
    return args.seed if args.seed is not None else config.seeds[0]


def _trajectory(args, config):
    if getattr(args, "trajectory", None):
        return read_trajectory_csv(args.trajectory, config.markov)
    return sample_trajectory(config.markov, config.n_slots, _seed(args, config))


def cmd_simulate(args) -> int:
    config = _load(args)
    trajectory = sample_trajectory(config.markov, config.n_slots, _seed(args, config))
    write_trajectory_csv(trajectory, args.out)
    print(f"wrote {config.n_slots}-slot trajectory to {args.out}")
    return 0


def cmd_online(args) -> int:
    config = _load(args)
    space = enumerate_states(config.params, config.markov, config.battery_grid_step)
    mdp = build_mdp(config.params, config.markov, space=space)
    policy, values, iterations = dp.policy_iteration(mdp, config.params.gamma)
    residual = dp.bellman_residual(values, mdp, config.params.gamma)
    if args.out:
        dp.write_policy_csv(policy, values, space, config.params, config.markov,
                            args.out)
    print(f"policy iteration: {space.n_states} states, {iterations} sweeps, "
          f"bellman residual {residual:.3e}, mean value "
          f"{float(values.values.mean()):.6f} bpcu")
    return 0


def cmd_qlearn(args) -> int:
    config = _load(args)
    space = enumerate_states(config.params, config.markov, config.battery_grid_step)
    mdp = build_mdp(config.params, config.markov, space=space)
    env = rl.MdpEnvironment(mdp, initial_state_distribution(space, config.params),
                            rng_seed=_seed(args, config) + 1)
    learn_cfg = rl.LearningConfig(epsilon=config.epsilon,
                                  n_iterations=config.n_learning_iterations,
                                  schedule_exponent=config.schedule_exponent,
                                  rng_seed=_seed(args, config))

    def evaluator(policy):
        return simulate_policy(policy.actions, config.markov, config.params,
                               config.n_slots, min(config.episodes, 200),
                               config.eval_seed, space=space).mean

    qtable, policy, log = rl.q_learning(env, learn_cfg, config.params.gamma,
                                        evaluator=evaluator)
    if args.out:
        rl.write_learning_curve_csv(log, config.epsilon, args.out)
    if args.qtable_out:
        rl.write_qtable_csv(qtable, args.qtable_out)
    final = log[-1][1] if log else 0.0
    print(f"q-learning: {config.n_learning_iterations} updates, "
          f"final greedy throughput {final:.6f} bpcu")
    return 0


def cmd_offline(args) -> int:
    config = _load(args)
    trajectory = _trajectory(args, config)
    instance = OfflineInstance(trajectory=trajectory, params=config.params)
    result = gbd(instance, Gamma=config.gbd_gamma, max_iters=config.gbd_max_iters,
                 rng_seed=_seed(args, config))
    if args.out:
        write_solution_csv(result.i_h, result.powers, instance, args.out)
    if args.bounds_out:
        write_bounds_csv(result.bounds, args.bounds_out)
    gap = result.bounds[-1][2] - result.bounds[-1][1]
    print(f"gbd: value {result.value:.6f} bpcu in {result.iterations} iterations, "
          f"final gap {gap:.3e}")
    return 0


def cmd_myopic(args) -> int:
    import csv

    config = _load(args)
    trajectory = _trajectory(args, config)
    slots = myopic.myopic_slots(trajectory, config.params)
    value = sum(config.params.gamma ** (i + 1) * s.rate for i, s in enumerate(slots))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(SOLUTION_HEADER)
            for i, slot in enumerate(slots):
                # time-shared slots are neither pure harvest nor pure transmit
                writer.writerow([i + 1, -1, repr(float(slot.power)),
                                 repr(float(slot.rate))])
    print(f"myopic: value {value:.6f} bpcu over {trajectory.n_slots} slots")
    return 0


def cmd_sweep(args) -> int:
    config = _load(args)
    variable = config.sweep_variable
    if variable == "epsilon":
        report = harness.run_epsilon_sweep(config)
    elif variable in ("P_max", "B_max"):
        report = harness.run_capacity_sweeps(config)
    else:
        report = harness.run_comparison(config)
    harness.write_report_csv(report, args.out, include_timing=args.timings)
    print(f"wrote {len(report.rows)} report rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hotpolicy",
        description="Harvest-or-transmit policy solvers and experiment sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--seed", type=int, default=None, help="base RNG seed")
        p.add_argument("--out", required=out_required, help="output CSV path")

    p = sub.add_parser("simulate", help="sample a trajectory CSV")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("online", help="policy iteration on the enumerated MDP")
    common(p, out_required=False)
    p.set_defaults(func=cmd_online)

    p = sub.add_parser("qlearn", help="tabular Q-learning with a throughput log")
    common(p, out_required=False)
    p.add_argument("--qtable-out", default=None, help="final Q-table CSV path")
    p.set_defaults(func=cmd_qlearn)

    p = sub.add_parser("offline", help="GBD schedule for a known trajectory")
    common(p, out_required=False)
    p.add_argument("--trajectory", default=None, help="trajectory CSV to load")
    p.add_argument("--bounds-out", default=None, help="bound history CSV path")
    p.set_defaults(func=cmd_offline)

    p = sub.add_parser("myopic", help="per-slot time-sharing baseline")
    common(p, out_required=False)
    p.add_argument("--trajectory", default=None, help="trajectory CSV to load")
    p.set_defaults(func=cmd_myopic)

    p = sub.add_parser("sweep", help="seeded multi-policy comparison or sweep")
    common(p)
    p.add_argument("--sweep", default=None, metavar="VAR=V1,V2,...",
                   help="sweep variable and values (epsilon, n_iterations, "
                        "P_p, P_max, B_max)")
    p.add_argument("--timings", action="store_true",
                   help="include wall times (breaks byte reproducibility)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (EnumerationSizeError, IterationLimitError, ValueError) as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, IterationLimitError):
            payload["gap"] = exc.gap
            payload["incumbent_value"] = exc.incumbent.value
        print(json.dumps(payload), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
