"""Experiment runner: seeded policy comparisons and parameter sweeps.

Builds configurations (defaults mirror the two-level channel / two-level
energy benchmark link), runs the four policies over seeded trajectories, and
emits CSV reports. Every report row carries a hash of the configuration that
produced it; volatile wall-times are kept out of the default CSV payload so
identical seeds reproduce identical bytes.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import dp, myopic, rl
from .model import (DEFAULT_BATTERY_STEP, MarkovSpec, SystemParams, Trajectory,
                    build_mdp, build_params, enumerate_states,
                    initial_state_distribution, replay_policy, sample_trajectory,
                    simulate_policy)
from .offline import (DEFAULT_GAMMA_GAP, IterationLimitError, OfflineInstance,
                      gbd)

SWEEPABLE = ("epsilon", "n_iterations", "P_p", "P_max", "B_max")

# deterministic stream offsets so one base seed drives independent substreams
_TRAJ_OFFSET = 0
_GBD_OFFSET = 1_000_003
_ENV_OFFSET = 2_000_003
_LEARNER_OFFSET = 3_000_003


@dataclass
class ExperimentConfig:
    params: SystemParams
    markov: MarkovSpec
    battery_grid_step: float = DEFAULT_BATTERY_STEP
    n_slots: int = 20
    episodes: int = 2000
    seeds: tuple[int, ...] = tuple(range(8))
    epsilon: float = 0.04
    n_learning_iterations: int = 100
    schedule_exponent: float = 0.8
    gbd_gamma: float = DEFAULT_GAMMA_GAP
    gbd_max_iters: int = 200
    eval_seed: int = 987654321
    workers: int = 1
    sweep_variable: Optional[str] = None
    sweep_values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        if self.sweep_variable is not None and self.sweep_variable not in SWEEPABLE:
            raise ValueError(f"sweep variable must be one of {SWEEPABLE}")


def default_markov() -> MarkovSpec:
    """Two channel gains, two energy levels, uniform transitions."""
    half = np.full((2, 2), 0.5)
    return MarkovSpec(channel_values=np.array([0.2e-6, 0.4e-6]),
                      energy_values=np.array([0.2e-3, 0.4e-3]),
                      channel_tm=half.copy(), energy_tm=half.copy())


def default_config() -> ExperimentConfig:
    """Benchmark configuration: 1 mW cap from a 0.4 nW interference budget,
    -90 dBm noise, 10 mJ battery, uniform exogenous transitions."""
    markov = default_markov()
    params = build_params(markov, P_p=2e-3, sigma_n2=dbm_to_watts(-90.0),
                          P_int=0.4e-9, eta=1.0, B_0=0.0, B_max=10e-3,
                          gamma=0.9, n_power_levels=5)
    return ExperimentConfig(params=params, markov=markov)


def dbm_to_watts(dbm: float) -> float:
    return 1e-3 * 10.0 ** (dbm / 10.0)


def config_hash(config: ExperimentConfig) -> str:
    """Stable short hash over every field that shapes the experiment."""
    payload = {
        "params": dataclasses.asdict(config.params),
        "markov": {
            "channel_values": config.markov.channel_values.tolist(),
            "energy_values": config.markov.energy_values.tolist(),
            "channel_tm": config.markov.channel_tm.tolist(),
            "energy_tm": config.markov.energy_tm.tolist(),
        },
        "battery_grid_step": config.battery_grid_step,
        "n_slots": config.n_slots,
        "episodes": config.episodes,
        "seeds": list(config.seeds),
        "epsilon": config.epsilon,
        "n_learning_iterations": config.n_learning_iterations,
        "schedule_exponent": config.schedule_exponent,
        "gbd_gamma": config.gbd_gamma,
        "gbd_max_iters": config.gbd_max_iters,
        "eval_seed": config.eval_seed,
        "sweep_variable": config.sweep_variable,
        "sweep_values": list(config.sweep_values),
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class ReportRow:
    sweep_variable: str
    sweep_value: float
    policy: str
    mean: float
    stderr: float
    wall_time_s: float
    config_hash: str
    harvest_slots: Optional[float] = None
    transmit_slots: Optional[float] = None
    error: str = ""


@dataclass
class Report:
    rows: list[ReportRow]
    header: dict[str, object]

    def rows_for(self, policy: str) -> list[ReportRow]:
        return [r for r in self.rows if r.policy == policy]


def _report_header(config: ExperimentConfig) -> dict[str, object]:
    p = config.params
    return {
        "config_hash": config_hash(config),
        "P_p_w": p.P_p, "sigma_n2_w": p.sigma_n2, "P_int_w": p.P_int,
        "eta": p.eta, "B_0_j": p.B_0, "B_max_j": p.B_max, "gamma": p.gamma,
        "tau_s": p.tau, "power_grid_w": list(p.power_grid),
        "battery_grid_step_j": config.battery_grid_step,
        "n_slots": config.n_slots, "episodes": config.episodes,
        "seeds": list(config.seeds), "epsilon": config.epsilon,
        "n_learning_iterations": config.n_learning_iterations,
        "schedule_exponent": config.schedule_exponent,
        "gbd_gamma": config.gbd_gamma, "gbd_max_iters": config.gbd_max_iters,
        "eval_seed": config.eval_seed,
    }


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    if values.size <= 1:
        return float(values.mean()) if values.size else 0.0, 0.0
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))


@dataclass
class _PointArtifacts:
    """Per-sweep-point solver state shared across seeds."""

    config: ExperimentConfig
    online_policy: dp.Policy
    mdp: object
    space: object


def _prepare_point(config: ExperimentConfig) -> _PointArtifacts:
    space = enumerate_states(config.params, config.markov, config.battery_grid_step)
    mdp = build_mdp(config.params, config.markov, config.battery_grid_step, space)
    policy, _, _ = dp.policy_iteration(mdp, config.params.gamma)
    return _PointArtifacts(config=config, online_policy=policy, mdp=mdp, space=space)


def _train_q_policy(point: _PointArtifacts, seed: int, epsilon: float,
                    n_iterations: int) -> dp.Policy:
    config = point.config
    env = rl.MdpEnvironment(
        point.mdp, initial_state_distribution(point.space, config.params),
        rng_seed=seed + _ENV_OFFSET)
    learn_cfg = rl.LearningConfig(epsilon=epsilon, n_iterations=n_iterations,
                                  schedule_exponent=config.schedule_exponent,
                                  rng_seed=seed + _LEARNER_OFFSET)
    _, policy, _ = rl.q_learning(env, learn_cfg, config.params.gamma)
    return policy


def _apply_sweep(config: ExperimentConfig, variable: str, value: float) -> ExperimentConfig:
    """Rebuild the configuration at one sweep point."""
    if variable == "P_p":
        return replace(config, params=replace(config.params, P_p=float(value)))
    if variable == "n_iterations":
        return replace(config, n_learning_iterations=int(value))
    if variable == "epsilon":
        return replace(config, epsilon=float(value))
    if variable == "B_max":
        params = replace(config.params, B_max=float(value),
                         B_0=min(config.params.B_0, float(value)))
        return replace(config, params=params)
    if variable == "P_max":
        spacing = config.params.power_grid[1] if len(config.params.power_grid) > 1 \
            else float(value)
        levels = max(1, int(round(float(value) / spacing)))
        params = build_params(
            config.markov, P_p=config.params.P_p, sigma_n2=config.params.sigma_n2,
            P_int=float(value) * config.markov.h_best, eta=config.params.eta,
            B_0=config.params.B_0, B_max=config.params.B_max,
            gamma=config.params.gamma, n_power_levels=levels,
            tau=config.params.tau)
        return replace(config, params=params)
    raise ValueError(f"unknown sweep variable {variable}")


def _seed_chunk_values(config: ExperimentConfig,
                       seeds: tuple[int, ...]) -> dict[int, dict]:
    """Run all four policies on one chunk of trajectory seeds.

    Top-level so process pools can pickle it; rebuilds the per-point solver
    artifacts, which is cheap next to the per-seed work.
    """
    point = _prepare_point(config)
    out: dict[int, dict] = {}
    for seed in seeds:
        trajectory = sample_trajectory(config.markov, config.n_slots,
                                       seed + _TRAJ_OFFSET)
        instance = OfflineInstance(trajectory=trajectory, params=config.params)
        record: dict[str, object] = {}

        t0 = time.perf_counter()
        try:
            result = gbd(instance, Gamma=config.gbd_gamma,
                         max_iters=config.gbd_max_iters,
                         rng_seed=seed + _GBD_OFFSET)
            error = ""
        except IterationLimitError as exc:
            result = exc.incumbent
            error = f"iteration-limit gap={exc.gap:.3e}"
        record["offline"] = (result.value,
                             float(np.sum((result.i_h == 0)
                                          & (result.powers > 1e-15))),
                             time.perf_counter() - t0, error)

        t0 = time.perf_counter()
        online = replay_policy(point.online_policy.actions, trajectory,
                               config.params, config.markov, space=point.space)
        record["online"] = (online.value, float(online.transmit_slots),
                            time.perf_counter() - t0, "")

        t0 = time.perf_counter()
        q_policy = _train_q_policy(point, seed, config.epsilon,
                                   config.n_learning_iterations)
        q_replay = replay_policy(q_policy.actions, trajectory, config.params,
                                 config.markov, space=point.space)
        record["qlearn"] = (q_replay.value, float(q_replay.transmit_slots),
                            time.perf_counter() - t0, "")

        t0 = time.perf_counter()
        value = myopic.myopic_run(trajectory, config.params)
        record["myopic"] = (value, None, time.perf_counter() - t0, "")
        out[seed] = record
    return out


def comparison_values(config: ExperimentConfig) -> dict[str, dict]:
    """Per-seed policy values for one configuration point.

    Seeds fan out across processes when config.workers > 1; the merge is by
    seed order, so worker count never changes the numbers.
    """
    seeds = config.seeds
    if config.workers > 1 and len(seeds) > 1:
        from concurrent.futures import ProcessPoolExecutor

        n_chunks = min(config.workers, len(seeds))
        chunks = [tuple(seeds[i::n_chunks]) for i in range(n_chunks)]
        merged: dict[int, dict] = {}
        with ProcessPoolExecutor(max_workers=n_chunks) as pool:
            for part in pool.map(_seed_chunk_values, [config] * n_chunks, chunks):
                merged.update(part)
    else:
        merged = _seed_chunk_values(config, seeds)
    result: dict[str, dict] = {}
    for policy in ("offline", "online", "qlearn", "myopic"):
        records = [merged[seed][policy] for seed in seeds]
        result[policy] = {
            "values": np.array([r[0] for r in records]),
            "transmit_slots": (np.array([r[1] for r in records])
                               if records[0][1] is not None else None),
            "wall_time_s": float(sum(r[2] for r in records)),
            "error": next((r[3] for r in records if r[3]), ""),
        }
    return result


def _comparison_rows(config: ExperimentConfig, sweep_variable: str,
                     sweep_value: float, chash: str) -> list[ReportRow]:
    """Aggregate per-seed policy values into report rows."""
    per_policy = comparison_values(config)
    rows = []
    for policy in ("offline", "online", "qlearn", "myopic"):
        entry = per_policy[policy]
        mean, stderr = _mean_stderr(entry["values"])
        tx = entry["transmit_slots"]
        tx_mean = float(tx.mean()) if tx is not None else None
        rows.append(ReportRow(
            sweep_variable=sweep_variable, sweep_value=sweep_value,
            policy=policy, mean=mean, stderr=stderr,
            wall_time_s=entry["wall_time_s"], config_hash=chash,
            harvest_slots=(config.n_slots - tx_mean) if tx_mean is not None else None,
            transmit_slots=tx_mean, error=entry["error"]))
    return rows


def run_comparison(config: ExperimentConfig) -> Report:
    """Four-policy comparison at the base point or along a P_p / N_L sweep."""
    variable = config.sweep_variable or "none"
    if variable not in ("none", "P_p", "n_iterations"):
        raise ValueError("run_comparison sweeps only P_p or n_iterations")
    points = config.sweep_values if config.sweep_variable else (float("nan"),)
    rows: list[ReportRow] = []
    for value in points:
        point_config = _apply_sweep(config, variable, value) \
            if config.sweep_variable else config
        chash = config_hash(point_config)
        rows.extend(_comparison_rows(point_config, variable, float(value), chash))
    return Report(rows=rows, header=_report_header(config))


def run_epsilon_sweep(config: ExperimentConfig) -> Report:
    """Q-learning throughput and slot counts per exploration probability.

    Policies are trained per (epsilon, seed) and scored with a fixed-seed
    Monte-Carlo evaluation so sweep points share common random numbers.
    """
    eps_values = config.sweep_values or tuple(np.round(np.arange(1, 11) * 0.01, 2))
    if any(not 0.0 < e < 1.0 for e in eps_values):
        raise ValueError("epsilon sweep values must lie in (0, 1)")
    point = _prepare_point(config)
    chash = config_hash(config)
    rows: list[ReportRow] = []
    for eps in eps_values:
        t0 = time.perf_counter()
        means, harvests, transmits = [], [], []
        for seed in config.seeds:
            policy = _train_q_policy(point, seed, float(eps),
                                     config.n_learning_iterations)
            sim = simulate_policy(policy.actions, config.markov, config.params,
                                  config.n_slots, config.episodes,
                                  config.eval_seed, space=point.space)
            means.append(sim.mean)
            harvests.append(sim.mean_harvest_slots)
            transmits.append(sim.mean_transmit_slots)
        mean, stderr = _mean_stderr(np.array(means))
        rows.append(ReportRow(
            sweep_variable="epsilon", sweep_value=float(eps), policy="qlearn",
            mean=mean, stderr=stderr, wall_time_s=time.perf_counter() - t0,
            config_hash=chash, harvest_slots=float(np.mean(harvests)),
            transmit_slots=float(np.mean(transmits))))
    return Report(rows=rows, header=_report_header(config))


def run_capacity_sweeps(config: ExperimentConfig) -> Report:
    """Per-policy throughput versus the transmit cap or the battery capacity."""
    if config.sweep_variable not in ("P_max", "B_max"):
        raise ValueError("capacity sweep variable must be P_max or B_max")
    rows: list[ReportRow] = []
    for value in config.sweep_values:
        point_config = _apply_sweep(config, config.sweep_variable, value)
        chash = config_hash(point_config)
        rows.extend(_comparison_rows(point_config, config.sweep_variable,
                                     float(value), chash))
    return Report(rows=rows, header=_report_header(config))


# ---------------------------------------------------------------------------
# Report CSV
# ---------------------------------------------------------------------------

REPORT_COLUMNS = ("sweep_variable", "sweep_value", "policy", "mean", "stderr",
                  "harvest_slots", "transmit_slots", "config_hash", "error")


def write_report_csv(report: Report, path, include_timing: bool = False) -> None:
    """Emit the report; wall-times only on request since they break
    byte-for-byte reproducibility."""
    columns = REPORT_COLUMNS + (("wall_time_s",) if include_timing else ())
    with open(path, "w", newline="") as fh:
        for key, value in report.header.items():
            fh.write(f"# {key} = {value}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in report.rows:
            record = [row.sweep_variable, repr(float(row.sweep_value)), row.policy,
                      repr(float(row.mean)), repr(float(row.stderr)),
                      "" if row.harvest_slots is None else repr(float(row.harvest_slots)),
                      "" if row.transmit_slots is None else repr(float(row.transmit_slots)),
                      row.config_hash, row.error]
            if include_timing:
                record.append(repr(float(row.wall_time_s)))
            writer.writerow(record)


# ---------------------------------------------------------------------------
# Key-value configuration files
# ---------------------------------------------------------------------------

def _parse_scalar(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _parse_value(text: str):
    text = text.strip()
    if ";" in text:
        return [[_parse_scalar(x) for x in row.split(",")]
                for row in text.split(";")]
    if "," in text:
        return [_parse_scalar(x) for x in text.split(",")]
    return _parse_scalar(text)


def load_config(path) -> ExperimentConfig:
    """Read a key = value config file (SI units; noise may be given in dBm).

    Unknown keys are rejected; anything omitted keeps the default. A matrix
    value uses ';' between rows and ',' within a row.
    """
    raw: dict[str, object] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, text = line.split("=", 1)
            raw[key.strip()] = _parse_value(text)
    return config_from_dict(raw)


_CONFIG_KEYS = {
    "channel_values", "energy_values", "channel_tm", "energy_tm",
    "P_p_w", "sigma_n2_w", "sigma_n2_dbm", "P_int_w", "eta", "B_0_j",
    "B_max_j", "gamma", "tau_s", "n_power_levels", "battery_grid_step_j",
    "n_slots", "episodes", "seed_base", "n_seeds", "seeds", "epsilon",
    "n_learning_iterations", "schedule_exponent", "gbd_gamma",
    "gbd_max_iters", "eval_seed", "workers", "sweep_variable", "sweep_values",
}


def config_from_dict(raw: dict) -> ExperimentConfig:
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    base = default_config()
    markov = base.markov
    if any(k in raw for k in ("channel_values", "energy_values",
                              "channel_tm", "energy_tm")):
        cv = np.asarray(raw.get("channel_values", markov.channel_values), dtype=float)
        ev = np.asarray(raw.get("energy_values", markov.energy_values), dtype=float)
        ctm = np.asarray(raw.get("channel_tm", np.full((cv.size, cv.size), 1.0 / cv.size)),
                         dtype=float)
        etm = np.asarray(raw.get("energy_tm", np.full((ev.size, ev.size), 1.0 / ev.size)),
                         dtype=float)
        markov = MarkovSpec(channel_values=cv, energy_values=ev,
                            channel_tm=ctm, energy_tm=etm)
    if "sigma_n2_dbm" in raw and "sigma_n2_w" in raw:
        raise ValueError("give the noise power in watts or dBm, not both")
    sigma = raw.get("sigma_n2_w", base.params.sigma_n2)
    if "sigma_n2_dbm" in raw:
        sigma = dbm_to_watts(float(raw["sigma_n2_dbm"]))
    params = build_params(
        markov,
        P_p=float(raw.get("P_p_w", base.params.P_p)),
        sigma_n2=float(sigma),
        P_int=float(raw.get("P_int_w", base.params.P_int)),
        eta=float(raw.get("eta", base.params.eta)),
        B_0=float(raw.get("B_0_j", base.params.B_0)),
        B_max=float(raw.get("B_max_j", base.params.B_max)),
        gamma=float(raw.get("gamma", base.params.gamma)),
        n_power_levels=int(raw.get("n_power_levels", len(base.params.power_grid) - 1)),
        tau=float(raw.get("tau_s", base.params.tau)),
    )
    if "seeds" in raw:
        value = raw["seeds"]
        seeds = tuple(int(s) for s in (value if isinstance(value, list) else [value]))
    else:
        n_seeds = int(raw.get("n_seeds", len(base.seeds)))
        seed_base = int(raw.get("seed_base", 0))
        seeds = tuple(range(seed_base, seed_base + n_seeds))
    sweep_values = raw.get("sweep_values", ())
    if not isinstance(sweep_values, (list, tuple)):
        sweep_values = (sweep_values,)
    return ExperimentConfig(
        params=params, markov=markov,
        battery_grid_step=float(raw.get("battery_grid_step_j", base.battery_grid_step)),
        n_slots=int(raw.get("n_slots", base.n_slots)),
        episodes=int(raw.get("episodes", base.episodes)),
        seeds=seeds,
        epsilon=float(raw.get("epsilon", base.epsilon)),
        n_learning_iterations=int(raw.get("n_learning_iterations",
                                          base.n_learning_iterations)),
        schedule_exponent=float(raw.get("schedule_exponent", base.schedule_exponent)),
        gbd_gamma=float(raw.get("gbd_gamma", base.gbd_gamma)),
        gbd_max_iters=int(raw.get("gbd_max_iters", base.gbd_max_iters)),
        eval_seed=int(raw.get("eval_seed", base.eval_seed)),
        workers=int(raw.get("workers", base.workers)),
        sweep_variable=raw.get("sweep_variable") or None,
        sweep_values=tuple(float(v) for v in sweep_values),
    )
