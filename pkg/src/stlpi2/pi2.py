"""Policy improvement with path integrals, guided by a base control law.

Each iteration perturbs the per-step feedforward differentials ``theta_t``,
rolls every perturbed policy out through the (partially unknown) dynamics,
scores whole trajectories by ``J = C + P_lambda(rho)`` and moves ``theta``
to the probability-weighted average of the samples.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .objectives import CostSpec, PenaltySchedule, normalize_costs, penalty
from .sim import BaseFn, Policy, Rollouts, SystemModel, feedforward, rollout, step_count
from .stl import Formula, robustness_batch


class Pi2Error(RuntimeError):
    pass


@dataclass(frozen=True)
class Problem:
    """Everything the optimizer needs to roll out and score a policy."""
    model: SystemModel
    base: BaseFn
    x0: np.ndarray
    T: float
    dt: float
    task: Formula
    cost: CostSpec
    rho_min: float
    schedule: PenaltySchedule

    @property
    def steps(self) -> int:
        return step_count(self.T, self.dt)

    def score(self, res: Rollouts):
        """Cost and task robustness for every rollout in a batch (NaN if diverged)."""
        with np.errstate(invalid="ignore", over="ignore"):
            c = np.asarray(self.cost.batch(res.states, res.inputs, self.dt), dtype=float)
            rho = robustness_batch(self.task, np.nan_to_num(res.states), self.dt)
        bad = ~res.ok
        c = np.where(bad, np.nan, c)
        rho = np.where(bad, np.nan, rho)
        return c, rho

    def evaluate(self, theta: np.ndarray, noise: Optional[np.ndarray] = None):
        """Roll out one parameter set; returns ``(rollouts, C, rho)``."""
        res = rollout(self.model, self.base, feedforward(theta)[None], self.x0, self.dt, noise)
        c, rho = self.score(res)
        return res, float(c[0]), float(rho[0])


@dataclass(frozen=True)
class Pi2Config:
    K: int = 25
    N: int = 100
    eta: float = 1.0
    h: float = 10.0
    eliteness_percentile: float = 25.0
    C0: np.ndarray = None
    Cmin: np.ndarray = None
    nesterov: bool = True
    master_seed: int = 0
    sample_from_initial_cov: bool = False
    # deviations in the covariance update are taken from the mean the batch
    # was sampled around ("sampling") or from the freshly averaged mean ("update")
    cov_center: str = "sampling"

    def __post_init__(self):
        if self.cov_center not in ("sampling", "update"):
            raise ValueError(f"cov_center must be 'sampling' or 'update', got {self.cov_center!r}")
        if self.N < 2:
            raise ValueError("need at least two samples per iteration")
        if self.K < 0:
            raise ValueError("iteration count must be non-negative")
        if not self.eta > 0:
            raise ValueError("temperature eta must be positive")
        for name in ("C0", "Cmin"):
            mat = getattr(self, name)
            if mat is None:
                raise ValueError(f"{name} is required")
            mat = np.atleast_2d(np.array(mat, dtype=float))
            if not np.allclose(mat, mat.T) or np.linalg.eigvalsh(mat).min() < -1e-15:
                raise ValueError(f"{name} must be symmetric positive semidefinite")
            object.__setattr__(self, name, mat)


@dataclass
class IterationRecord:
    k: int
    lam: float
    min_J: float
    mean_J: float
    cost: float
    rho: float
    diverged: int = 0

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class Pi2State:
    theta: np.ndarray        # (L, m) weighted means
    theta_hat: np.ndarray    # (L, m) lookahead the next batch is sampled around
    cov: np.ndarray          # (L, m, m)
    alpha: float
    lam: float
    k: int = 0
    history: List[IterationRecord] = field(default_factory=list)

    @classmethod
    def initial(cls, config: Pi2Config, problem: Problem, theta0=None) -> "Pi2State":
        L, m = problem.steps, problem.model.m
        theta = np.zeros((L, m)) if theta0 is None else np.array(theta0, dtype=float)
        if theta.shape != (L, m):
            raise ValueError(f"theta0 must have shape {(L, m)}")
        if config.C0.shape != (m, m) or config.Cmin.shape != (m, m):
            raise ValueError(f"covariances must be {m}x{m}")
        cov = np.broadcast_to(config.C0, (L, m, m)).copy()
        return cls(theta=theta, theta_hat=theta.copy(), cov=cov, alpha=1.0,
                   lam=problem.schedule.value(0, config.K))


def weights(J_normalized, eta: float) -> np.ndarray:
    """Softmax of ``-J / eta`` with max-subtraction; ``+inf`` costs get zero weight."""
    z = -np.asarray(J_normalized, dtype=float) / eta
    finite = np.isfinite(z)
    if not finite.any():
        raise Pi2Error("no finite cost to weight")
    z = z - z[finite].max()
    w = np.exp(z)
    return w / w.sum()


def nesterov_alpha(alpha: float) -> float:
    return (1.0 + math.sqrt(4.0 * alpha * alpha + 1.0)) / 2.0


def _sqrt_factors(cov: np.ndarray) -> np.ndarray:
    evals, evecs = np.linalg.eigh(cov)
    return evecs * np.sqrt(np.clip(evals, 0.0, None))[..., None, :]


def sample_rng(master_seed: int, k: int, i: int) -> np.random.Generator:
    """Generator for sample ``i`` of iteration ``k``; independent of batch layout."""
    return np.random.default_rng([master_seed, k, i])


def draw_samples(state: Pi2State, config: Pi2Config, problem: Problem, k: int):
    """Perturbed parameters ``(N, L, m)`` and process-noise draws (or None)."""
    L, m, n = problem.steps, problem.model.m, problem.model.n
    cov = np.broadcast_to(config.C0, (L, m, m)) if config.sample_from_initial_cov else state.cov
    factors = _sqrt_factors(cov)
    eps = np.empty((config.N, L, m))
    noise = np.empty((config.N, L, n)) if problem.model.noisy else None
    for i in range(config.N):
        rng = sample_rng(config.master_seed, k, i)
        eps[i] = rng.standard_normal((L, m))
        if noise is not None:
            noise[i] = rng.standard_normal((L, n))
    samples = state.theta_hat[None] + np.einsum("tab,itb->ita", factors, eps)
    return samples, noise


def iterate(state: Pi2State, config: Pi2Config, problem: Problem,
            callback: Callable = None) -> Pi2State:
    """One pass of sampling, scoring, weighted averaging and momentum."""
    k = state.k + 1
    samples, noise = draw_samples(state, config, problem, k)
    res = rollout(problem.model, problem.base, feedforward(samples), problem.x0, problem.dt, noise)
    c, rho = problem.score(res)
    J = c + penalty(state.lam, rho, problem.rho_min)
    J = np.where(res.ok, J, np.inf)
    if not np.isfinite(J).any():
        raise Pi2Error(f"iteration failed: all {config.N} rollouts diverged at k={k}")

    # normalized costs are non-positive scores (0 for the best sample), so
    # the weights exponentiate them with the sign flipped back
    J_bar = normalize_costs(J, config.eliteness_percentile, config.h, config.eta)
    w = weights(-J_bar, config.eta)

    theta = np.einsum("i,ita->ta", w, samples)
    center = state.theta_hat if config.cov_center == "sampling" else theta
    dev = samples - center[None]
    cov = config.Cmin[None] + np.einsum("i,ita,itb->tab", w, dev, dev)
    cov = 0.5 * (cov + np.swapaxes(cov, -1, -2))

    if config.nesterov:
        alpha = nesterov_alpha(state.alpha)
        theta_hat = theta + (state.alpha - 1.0) * (theta - state.theta) / alpha
    else:
        alpha = state.alpha
        theta_hat = theta.copy()

    _, c_mean, rho_mean = problem.evaluate(theta)
    finite = np.isfinite(J)
    record = IterationRecord(
        k=k, lam=state.lam, min_J=float(J[finite].min()), mean_J=float(J[finite].mean()),
        cost=c_mean, rho=rho_mean, diverged=int((~res.ok).sum()),
    )
    if callback is not None:
        callback(k, res, w)
    return Pi2State(
        theta=theta, theta_hat=theta_hat, cov=cov, alpha=alpha,
        lam=problem.schedule.value(k, config.K), k=k,
        history=state.history + [record],
    )


@dataclass
class RunResult:
    policy: Policy
    state: Pi2State
    initial_cost: float
    initial_rho: float

    @property
    def history(self) -> List[IterationRecord]:
        return self.state.history

    @property
    def final_cost(self) -> float:
        return self.history[-1].cost if self.history else self.initial_cost

    @property
    def final_rho(self) -> float:
        return self.history[-1].rho if self.history else self.initial_rho

    def first_satisfied(self, rho_min: float) -> Optional[int]:
        """Earliest iteration whose mean policy reaches ``rho_min`` (0 = initial policy)."""
        if self.initial_rho >= rho_min:
            return 0
        for rec in self.history:
            if rec.rho >= rho_min:
                return rec.k
        return None


def run(config: Pi2Config, problem: Problem, theta0=None, callback: Callable = None,
        progress: Callable[[IterationRecord], None] = None) -> RunResult:
    """``K`` iterations from ``theta0`` (zeros by default)."""
    state = Pi2State.initial(config, problem, theta0)
    _, c0, rho0 = problem.evaluate(state.theta)
    for _ in range(config.K):
        state = iterate(state, config, problem, callback)
        if progress is not None:
            progress(state.history[-1])
    return RunResult(Policy(problem.base, state.theta.copy()), state, c0, rho0)
