"""Trajectory costs, the robustness penalty and elitist cost normalization."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .stl import Formula, Trajectory, robustness_signal


@dataclass(frozen=True)
class TimeToReach:
    """First grid time where ``rho_psi >= min(rho_min, max_t rho_psi)``."""
    psi: Formula
    rho_min: float

    def __post_init__(self):
        if self.psi.is_temporal:
            raise ValueError("time-to-reach needs a non-temporal formula")

    def batch(self, states, inputs, dt):
        rho = robustness_signal(self.psi, states, dt)
        target = np.minimum(self.rho_min, np.max(rho, axis=-1, keepdims=True))
        return np.argmax(rho >= target, axis=-1) * dt


@dataclass(frozen=True)
class InputEnergy:
    """``sum_t u_t^T u_t dt`` over the whole input vector."""

    def batch(self, states, inputs, dt):
        inputs = np.asarray(inputs, dtype=float)
        return np.sum(inputs * inputs, axis=(-2, -1)) * dt


CostSpec = Union[TimeToReach, InputEnergy]


def cost(spec, traj: Trajectory) -> float:
    return float(spec.batch(traj.states, traj.inputs, traj.dt))


def penalty(lam, rho, rho_min):
    """``lam (rho_min - rho)^3`` below ``rho_min``; zero otherwise."""
    rho = np.asarray(rho, dtype=float)
    out = np.where(rho >= rho_min, 0.0, lam * (rho_min - rho) ** 3)
    return float(out) if out.ndim == 0 else out


def objective(c, rho, lam, rho_min):
    return c + penalty(lam, rho, rho_min)


def normalize_costs(J, eliteness_percentile: float, h: float = 10.0, eta: float = 1.0) -> np.ndarray:
    """``-h eta (J - min J) / (J_eps - min J)``.

    ``J_eps`` is the linearly interpolated ``eliteness_percentile`` quantile.
    Returns zeros when ``J_eps`` equals the minimum. Non-finite costs (e.g.
    diverged rollouts) map to ``-inf``.
    """
    J = np.asarray(J, dtype=float)
    if J.ndim != 1 or J.size < 2:
        raise ValueError("need at least two costs")
    if not 0 < eliteness_percentile <= 100:
        raise ValueError("eliteness percentile must lie in (0, 100]")
    finite = np.isfinite(J)
    out = np.full(J.shape, -np.inf)
    if not finite.any():
        return out
    Jf = J[finite]
    low = Jf.min()
    j_eps = np.percentile(Jf, eliteness_percentile)
    if j_eps == low:
        out[finite] = 0.0
    else:
        out[finite] = -h * eta * (Jf - low) / (j_eps - low)
    return out


@dataclass(frozen=True)
class PenaltySchedule:
    """Penalty weight ``lambda_k`` for ``k = 0..K``, linear or geometric spacing."""
    lambda0: float
    lambdaK: float
    spacing: str = "logarithmic"
    rho_min: float = 0.0

    def __post_init__(self):
        if not (self.lambda0 > 0 and self.lambdaK > 0):
            raise ValueError("penalty weights must be positive")
        if self.lambdaK < self.lambda0:
            raise ValueError("penalty schedule must be non-decreasing")
        if self.spacing not in ("linear", "logarithmic"):
            raise ValueError(f"unknown spacing {self.spacing!r}")
        if self.rho_min < 0:
            raise ValueError("rho_min must be non-negative")

    def value(self, k: int, K: int) -> float:
        if K <= 0 or k <= 0:
            return float(self.lambda0)
        if k >= K:
            return float(self.lambdaK)
        frac = k / K
        if self.spacing == "linear":
            return float(self.lambda0 + (self.lambdaK - self.lambda0) * frac)
        return float(self.lambda0 * (self.lambdaK / self.lambda0) ** frac)

    def values(self, K: int) -> np.ndarray:
        return np.array([self.value(k, K) for k in range(K + 1)])
