"""Experiment drivers shared by the command line and the reproduction tests."""
from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import scenarios
from .pi2 import Problem, RunResult, run
from .ppc import BaseLaw
from .scenarios import BaseConfig, ScenarioConfig
from .sim import rollout, simulate
from .stl import Trajectory

# seeds of evaluation rollouts live in their own stream, disjoint from training
_EVAL_STREAM = 7_919


def configure(config: ScenarioConfig, seed: Optional[int] = None, base: Optional[str] = None,
              iterations: Optional[int] = None, samples: Optional[int] = None,
              nesterov: Optional[bool] = None, Cmin=None) -> ScenarioConfig:
    """Copy of ``config`` with command-line style overrides applied."""
    cfg = config.replace()
    if seed is not None:
        cfg.pi2.master_seed = int(seed)
    if base is not None:
        gain = cfg.base.gain if cfg.base.kind == "lin" else 1.0
        cfg.base = BaseConfig(base, gain)
    if iterations is not None:
        cfg.pi2.K = int(iterations)
    if samples is not None:
        cfg.pi2.N = int(samples)
    if nesterov is not None:
        cfg.pi2.nesterov = bool(nesterov)
    if Cmin is not None:
        cfg.pi2.Cmin = Cmin
    scenarios.validate(cfg)
    return cfg


def subtask_law(config: ScenarioConfig, problem: Problem) -> BaseLaw:
    """The PPC law of a scenario, also for runs that use another base."""
    if isinstance(problem.base, BaseLaw):
        return problem.base
    return scenarios.base_law_of(config.replace(base=BaseConfig("ppc")), problem.task)


@dataclass
class Outcome:
    config: ScenarioConfig
    problem: Problem
    result: RunResult

    @property
    def seed(self) -> int:
        return self.config.pi2.master_seed

    def trajectory(self) -> Trajectory:
        """Noiseless rollout of the final mean policy."""
        res = rollout(self.problem.model, self.problem.base, self.result.policy.feedforward()[None],
                      self.problem.x0, self.problem.dt)
        return Trajectory(dt=self.problem.dt, states=res.states[0], inputs=res.inputs[0])

    def summary(self) -> dict:
        r = self.result
        return {
            "final_cost": r.final_cost, "final_rho": r.final_rho,
            "initial_cost": r.initial_cost, "initial_rho": r.initial_rho,
            "first_satisfied": r.first_satisfied(self.problem.rho_min),
            "iterations": len(r.history),
        }


def execute(config: ScenarioConfig, progress=None) -> Outcome:
    problem, pc = scenarios.build(config)
    return Outcome(config, problem, run(pc, problem, progress=progress))


def evaluate_noisy(outcome: Outcome, rollouts: int = 30) -> Tuple[np.ndarray, np.ndarray]:
    """Cost and robustness of the final policy over independent noisy rollouts."""
    p = outcome.problem
    L, n = p.steps, p.model.n
    noise = np.stack([
        np.random.default_rng([outcome.seed, _EVAL_STREAM, j]).standard_normal((L, n))
        for j in range(rollouts)
    ])
    ff = np.broadcast_to(outcome.result.policy.feedforward(), (rollouts, L, p.model.m))
    res = rollout(p.model, p.base, ff, p.x0, p.dt, noise)
    return p.score(res)


@dataclass(frozen=True)
class Variant:
    base: str
    nesterov: bool
    samples: int
    Cmin: float

    @property
    def label(self) -> str:
        return (f"{self.base.upper()} nesterov={'on' if self.nesterov else 'off'} "
                f"N={self.samples} Cmin={self.Cmin:g}")


def variants(bases: Sequence[str], nesterov: Sequence[bool], samples: Sequence[int],
             cmins: Sequence[float]) -> List[Variant]:
    return [Variant(b, n, s, c) for b, n, s, c in itertools.product(bases, nesterov, samples, cmins)]


def _one(args) -> Tuple[Variant, int, dict, List[dict], Optional[Tuple[list, list]]]:
    config, variant, seed, eval_rollouts = args
    cfg = configure(config, seed=seed, base=variant.base, samples=variant.samples,
                    nesterov=variant.nesterov, Cmin=variant.Cmin)
    out = execute(cfg)
    noisy = None
    if eval_rollouts and out.problem.model.noisy:
        c, rho = evaluate_noisy(out, eval_rollouts)
        noisy = (c.tolist(), rho.tolist())
    return variant, seed, out.summary(), [r.as_dict() for r in out.result.history], noisy


def compare(config: ScenarioConfig, variant_list: Sequence[Variant], repeats: int,
            first_seed: int = 0, eval_rollouts: int = 30, jobs: int = 1) -> Dict[Variant, dict]:
    """Run every variant ``repeats`` times with seeds ``first_seed, first_seed + 1, ...``.

    Returns per-variant mean convergence curves, per-run summaries and, for
    noisy scenarios, the evaluation-rollout statistics of every final policy.
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    tasks = [(config, v, first_seed + r, eval_rollouts) for v in variant_list for r in range(repeats)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_one, tasks))
    else:
        results = [_one(t) for t in tasks]
    out: Dict[Variant, dict] = {}
    for v in variant_list:
        mine = [r for r in results if r[0] == v]
        runs = [r[2] for r in mine]
        hist = [r[3] for r in mine]
        # iteration 0 is the initial policy
        cost = np.array([[s["initial_cost"]] + [h["cost"] for h in rows] for s, rows in zip(runs, hist)])
        rho = np.array([[s["initial_rho"]] + [h["rho"] for h in rows] for s, rows in zip(runs, hist)])
        out[v] = {
            "seeds": [r[1] for r in mine],
            "runs": runs,
            "mean_cost": cost.mean(axis=0),
            "mean_rho": rho.mean(axis=0),
            "noise": [r[4] for r in mine],
        }
    return out


def first_satisfaction(runs: Sequence[dict], horizon: int) -> float:
    """Mean first iteration reaching ``rho_min``; runs that never do count as ``horizon + 1``."""
    vals = [horizon + 1 if r["first_satisfied"] is None else r["first_satisfied"] for r in runs]
    return float(np.mean(vals))


def replay(manifest: dict) -> Outcome:
    """Re-run a manifest's resolved configuration."""
    return execute(scenarios.from_dict(manifest["config"]))


def simulate_policy(outcome: Outcome, seed: Optional[int] = None) -> Trajectory:
    p = outcome.problem
    return simulate(p.model, outcome.result.policy, p.x0, p.T, p.dt, seed)


__all__ = [
    "Outcome", "Variant", "compare", "configure", "evaluate_noisy", "execute",
    "first_satisfaction", "replay", "simulate_policy", "subtask_law", "variants",
]
