"""Euler-Maruyama simulation of control-affine systems ``dx = (f(x) + g(x) u) dt + noise``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .stl import Trajectory

BaseFn = Callable[[np.ndarray, float, np.ndarray], np.ndarray]


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ZeroDrift:
    n: int

    def __call__(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class LinearDrift:
    """``f(x) = A x``."""
    A: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", np.array(self.A, dtype=float))

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.A.T


@dataclass(frozen=True, eq=False)
class ConstantInputMatrix:
    """``g(x) = G`` for every state."""
    G: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "G", np.array(self.G, dtype=float))

    def __call__(self, x):
        x = np.asarray(x)
        return np.broadcast_to(self.G, x.shape[:-1] + self.G.shape)


InputConstraint = Tuple[Tuple[Tuple[int, ...], float], ...]
NOISE_MODELS = ("diffusion", "rate")


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Dynamics ``x' = f(x) + g(x) u + w`` with ``w ~ N(0, sigma_w)``.

    ``f`` is treated as unknown to the controller: policies are only ever
    handed the state, the time and ``g(x)``. ``noise`` selects how ``w``
    enters a step of length ``dt``: "diffusion" adds ``sqrt(dt) w`` (white
    noise of intensity ``sigma_w``), "rate" adds ``dt w`` (a disturbance on
    the state rate, held over the step).
    """
    n: int
    m: int
    f: Callable[[np.ndarray], np.ndarray]
    g: Callable[[np.ndarray], np.ndarray]
    sigma_w: np.ndarray = None
    input_constraint: InputConstraint = ()
    noise: str = "diffusion"

    def __post_init__(self):
        if self.noise not in NOISE_MODELS:
            raise ValueError(f"noise must be one of {NOISE_MODELS}, got {self.noise!r}")
        sigma = np.zeros((self.n, self.n)) if self.sigma_w is None else np.array(self.sigma_w, dtype=float)
        if sigma.shape != (self.n, self.n):
            raise ValueError(f"sigma_w must be {self.n}x{self.n}")
        if not np.allclose(sigma, sigma.T):
            raise ValueError("sigma_w must be symmetric")
        evals, evecs = np.linalg.eigh(sigma)
        if evals.min() < -1e-12 * max(1.0, abs(evals).max()):
            raise ValueError("sigma_w must be positive semidefinite")
        object.__setattr__(self, "sigma_w", sigma)
        object.__setattr__(self, "_noise_factor", evecs * np.sqrt(np.clip(evals, 0.0, None)))
        groups = []
        for idx, bound in self.input_constraint:
            idx = tuple(int(i) for i in idx)
            if any(i < 0 or i >= self.m for i in idx):
                raise ValueError(f"input group {idx} out of range for m={self.m}")
            if not bound > 0:
                raise ValueError("input bounds must be positive")
            groups.append((idx, float(bound)))
        flat = [i for idx, _ in groups for i in idx]
        if len(flat) != len(set(flat)):
            raise ValueError("input constraint groups must not overlap")
        object.__setattr__(self, "input_constraint", tuple(groups))

    @property
    def noisy(self) -> bool:
        return bool(np.any(self.sigma_w != 0))

    @property
    def noise_factor(self) -> np.ndarray:
        return self._noise_factor


def saturate(u: np.ndarray, constraint: InputConstraint) -> np.ndarray:
    """Scale each input group onto its norm ball; unlisted coordinates pass through."""
    u = np.array(u, dtype=float)
    for idx, bound in constraint:
        idx = list(idx)
        norm = np.linalg.norm(u[..., idx], axis=-1, keepdims=True)
        outside = norm > bound
        scale = np.where(outside, bound / np.where(outside, norm, 1.0), 1.0)
        u[..., idx] = u[..., idx] * scale
    return u


@dataclass(frozen=True, eq=False)
class LinearFeedback:
    """``u_hat = -K x`` with a constant gain or a per-step schedule ``(L, m, n)``."""
    K: np.ndarray
    dt: float = None

    def __post_init__(self):
        K = np.array(self.K, dtype=float)
        if K.ndim == 3 and self.dt is None:
            raise ValueError("a gain schedule needs the step size dt")
        object.__setattr__(self, "K", K)

    def __call__(self, x, t, g_x=None):
        K = self.K
        if K.ndim == 3:
            K = K[min(int(round(t / self.dt)), K.shape[0] - 1)]
        return -np.asarray(x, dtype=float) @ K.T


@dataclass(frozen=True)
class ZeroBase:
    m: int

    def __call__(self, x, t, g_x=None):
        x = np.asarray(x)
        return np.zeros(x.shape[:-1] + (self.m,))


def feedforward(theta: np.ndarray) -> np.ndarray:
    """Running sum ``k_t = sum_{t' <= t} theta_t'`` along the step axis."""
    return np.cumsum(np.asarray(theta, dtype=float), axis=-2)


@dataclass(frozen=True, eq=False)
class Policy:
    """``pi(u | x, t) = base(x, t) + k_t`` with ``k_t`` the running sum of ``theta``."""
    base: BaseFn
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", np.array(self.theta, dtype=float))

    @property
    def steps(self) -> int:
        return self.theta.shape[0]

    def feedforward(self) -> np.ndarray:
        return feedforward(self.theta)


def step_count(T: float, dt: float) -> int:
    L = int(round(T / dt))
    if L < 1 or abs(L * dt - T) > 1e-9:
        raise ValueError(f"T={T} is not an integer multiple of dt={dt}")
    return L


@dataclass
class Rollouts:
    states: np.ndarray      # (N, L+1, n)
    inputs: np.ndarray      # (N, L, m), saturated
    diverged_at: np.ndarray  # (N,), -1 when finite throughout

    @property
    def ok(self) -> np.ndarray:
        return self.diverged_at < 0


def rollout(model: SystemModel, base: BaseFn, ff: np.ndarray, x0, dt: float,
            noise: Optional[np.ndarray] = None) -> Rollouts:
    """Simulate a batch of policies sharing one base law.

    ``ff`` holds per-sample feedforward inputs ``(N, L, m)``; ``noise`` holds
    standard-normal draws ``(N, L, n)`` that are shaped by ``sigma_w``.
    """
    ff = np.asarray(ff, dtype=float)
    N, L, m = ff.shape
    if m != model.m:
        raise ValueError(f"feedforward has {m} inputs, model has {model.m}")
    x = np.broadcast_to(np.asarray(x0, dtype=float), (N, model.n)).copy()
    states = np.empty((N, L + 1, model.n))
    inputs = np.empty((N, L, m))
    states[:, 0] = x
    if noise is not None and model.noisy:
        scale = np.sqrt(dt) if model.noise == "diffusion" else dt
        dw = scale * (np.asarray(noise, dtype=float) @ model.noise_factor.T)
    else:
        dw = None
    diverged_at = np.full(N, -1)
    with np.errstate(all="ignore"):
        for j in range(L):
            g_x = model.g(x)
            u = saturate(base(x, j * dt, g_x) + ff[:, j], model.input_constraint)
            x = x + (model.f(x) + np.einsum("...nm,...m->...n", g_x, u)) * dt
            if dw is not None:
                x = x + dw[:, j]
            bad = ~np.isfinite(x).all(axis=1) & (diverged_at < 0)
            if bad.any():
                diverged_at[bad] = j
            inputs[:, j] = u
            states[:, j + 1] = x
    return Rollouts(states, inputs, diverged_at)


def simulate(model: SystemModel, policy: Policy, x0, T: float, dt: float,
             seed: Optional[int] = None) -> Trajectory:
    """Single trajectory of ``policy`` from ``x0`` over ``[0, T]``.

    A fixed ``seed`` makes the noise reproducible; ``None`` draws fresh entropy.
    """
    L = step_count(T, dt)
    if policy.steps != L:
        raise ValueError(f"policy has {policy.steps} steps, horizon needs {L}")
    noise = None
    if model.noisy:
        noise = np.random.default_rng(seed).standard_normal((1, L, model.n))
    res = rollout(model, policy.base, policy.feedforward()[None], x0, dt, noise)
    if res.diverged_at[0] >= 0:
        raise SimulationError(f"diverged at step {res.diverged_at[0]}")
    return Trajectory(dt=dt, states=res.states[0], inputs=res.inputs[0])
