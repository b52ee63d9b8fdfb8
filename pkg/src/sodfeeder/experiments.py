"""Experiment orchestration: single runs, training and paired comparisons."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .demand import RequestState
from .dispatch import DispatchController, PolicyKind
from .econ import aggregate, generalized_cost
from .env import ZonalDispatchEnv
from .matching import match_step
from .ppo import PPOTrainer, greedy_action, load_checkpoint, save_checkpoint
from .scenario import build_world


def run_simulation(scenario, policy_kind, seed, actor=None, net=None,
                   event_log=None):
    """One full deterministic episode; returns (RunMetrics, world)."""
    scenario.validate()
    if policy_kind is PolicyKind.RL_ZONAL:
        if actor is None:
            raise ValueError("the RL zonal policy needs a trained actor")
        env = ZonalDispatchEnv(scenario, net=net)
        obs = env.reset(seed)
        actions = []
        while not env.done:
            a = greedy_action(actor, obs)
            actions.append(a)
            obs, _, _, _ = env.step(a)
        world = env.world
        world.rl_actions = actions
    else:
        world = build_world(scenario, policy_kind, seed, net=net,
                            event_log=event_log)
        controller = DispatchController(world, policy_kind, scenario.dispatch)
        for _ in range(scenario.n_steps):
            controller.baseline_dispatch()
            match_step(world, walk_speed=scenario.demand.walk_speed,
                       walk_cap=scenario.demand.walk_cap)
            world.advance_step()
    return generalized_cost(world), world


def train_rl(scenario, n_instances, out_checkpoint=None, stats_path=None,
             seed=0, n_envs=None):
    """Desk-scale training run; returns (trainer, stats)."""
    scenario.validate()
    net = scenario.network()
    trainer = PPOTrainer(
        env_factory=lambda i: ZonalDispatchEnv(scenario, net=net),
        obs_dim=18, n_actions=4, config=scenario.ppo, seed=seed,
        n_envs=n_envs)
    n_updates = max(1, n_instances // trainer.n_envs)
    seeds = scenario.seeds.train_seeds(n_instances)
    trainer.train(seeds, n_updates)
    if out_checkpoint:
        save_checkpoint(out_checkpoint, trainer.actor, trainer.critic,
                        scenario.ppo)
    if stats_path:
        trainer.stats.to_csv(stats_path)
    return trainer, trainer.stats


def compare(scenario, policies, seeds, actor=None, out_dir=None):
    """Run every (policy, seed) cell on identical demand instances.

    Returns {policy: [RunMetrics per seed]}; RL action densities are attached
    under the "action_density" key of the returned info dict.
    """
    scenario.validate()
    net = scenario.network()
    results = {}
    action_counts = None
    for kind in policies:
        metrics = []
        for seed in seeds:
            m, world = run_simulation(scenario, kind, seed, actor=actor,
                                      net=net)
            metrics.append(m)
            if kind is PolicyKind.RL_ZONAL:
                if action_counts is None:
                    action_counts = np.zeros((len(world.rl_actions), 4))
                for t, a in enumerate(world.rl_actions):
                    action_counts[t, a] += 1
        results[kind] = metrics

    info = {}
    if action_counts is not None:
        info["action_density"] = action_counts / action_counts.sum(
            axis=1, keepdims=True)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_compare_outputs(results, seeds, info, out)
    return results, info


def _write_compare_outputs(results, seeds, info, out):
    from .econ import write_aggregate_csv, write_metrics_csv, \
        write_summary_json
    rows = []
    for kind, metrics in results.items():
        for seed, m in zip(seeds, metrics):
            rows.append(({"policy": kind.value, "seed": seed}, m))
    write_metrics_csv(rows, out / "runs.csv")
    agg = {kind.value: aggregate(metrics)
           for kind, metrics in results.items()}
    write_aggregate_csv(agg, out / "aggregate.csv")
    write_summary_json(
        {kind.value: {"mean_served": agg[kind.value]["served"]["mean"],
                      "mean_cost_per_passenger":
                          agg[kind.value]["cost_per_passenger"]["mean"]}
         for kind in results}, out / "summary.json")
    if "action_density" in info:
        with open(out / "action_density.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["step", "a0", "a1", "a2", "a3"])
            for t, row in enumerate(info["action_density"]):
                w.writerow([t] + list(row))


def load_actor(checkpoint_path):
    actor, _, _ = load_checkpoint(checkpoint_path)
    return actor


def paired_bootstrap_ge_zero(diffs, n_boot=10_000, seed=0):
    """Fraction of bootstrap resamples whose mean difference is >= 0."""
    diffs = np.asarray(diffs, dtype=float)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(diffs), size=(n_boot, len(diffs)))
    means = diffs[idx].mean(axis=1)
    return float(np.mean(means >= 0.0))


def conservation_ok(world):
    """Every generated request ends in exactly one terminal bucket."""
    states = [r.state for r in world.requests]
    n = len(states)
    terminal = sum(s in (RequestState.SERVED, RequestState.REJECTED)
                   for s in states)
    open_ = sum(s in (RequestState.PENDING, RequestState.ASSIGNED,
                      RequestState.RIDING) for s in states)
    return terminal + open_ == n
