"""Prescribed-performance base control law for conjunctions of STL subtasks.

Each subtask keeps the robustness of a non-temporal formula inside a funnel
``gamma(t) < rho < rho_max``. The normalized position inside the funnel is
mapped through a bounded linear-exponential gain and multiplied with the
input-projected robustness gradient. Only the input matrix ``g(x)`` of the
dynamics is used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .stl import (
    Always, And, Eventually, Formula, FragmentError, Not, Pred, TrueF, conjuncts,
    smooth_robustness,
)


@dataclass(frozen=True)
class Funnel:
    """Upper bound ``rho_max`` and a lower bound ramping linearly until ``t_c``."""
    rho_max: float
    gamma0: float
    gamma_inf: float
    t_c: float

    def __post_init__(self):
        if not self.t_c > 0:
            raise ValueError("funnel ramp time t_c must be positive")
        if not self.gamma0 <= self.gamma_inf < self.rho_max:
            raise ValueError(
                f"funnel needs gamma0 <= gamma_inf < rho_max, got "
                f"{self.gamma0}, {self.gamma_inf}, {self.rho_max}"
            )

    def gamma(self, t):
        t = np.asarray(t, dtype=float)
        ramp = self.gamma0 + (self.gamma_inf - self.gamma0) * np.minimum(t, self.t_c) / self.t_c
        out = np.where(t >= self.t_c, self.gamma_inf, ramp)
        return float(out) if out.ndim == 0 else out


def xi(funnel: Funnel, rho, t):
    """Raw normalized funnel position: 0 at ``rho_max``, 1 at ``gamma(t)``."""
    return (funnel.rho_max - np.asarray(rho, dtype=float)) / (funnel.rho_max - funnel.gamma(t))


class TransformError(ValueError):
    pass


@dataclass(frozen=True)
class TransformFn:
    """Gain ``S`` on [0, 1]: linear up to ``xi_c``, exponential up to ``S(1) = B``.

    Build instances with :func:`solve_transform`; ``m``, ``alpha`` and
    ``kappa`` are derived so value and slope are continuous at ``xi_c``.
    """
    beta: float
    B: float
    xi_c: float
    m: float
    alpha: float
    kappa: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lin = np.maximum(0.0, self.beta / self.xi_c * x)
        with np.errstate(over="ignore"):
            ex = self.m + self.alpha * np.expm1(self.kappa * x)
        out = np.where(x <= self.xi_c, lin, ex)
        return float(out) if out.ndim == 0 else out

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(
            x <= self.xi_c,
            np.where(x > 0, self.beta / self.xi_c, 0.0),
            self.alpha * self.kappa * np.exp(self.kappa * x),
        )
        return float(out) if out.ndim == 0 else out

    def residuals(self) -> dict:
        exp_at_c = self.m + self.alpha * math.expm1(self.kappa * self.xi_c)
        return {
            "S(0)": float(self(0.0)),
            "linear S(xi_c) - beta": self.beta / self.xi_c * self.xi_c - self.beta,
            "exponential S(xi_c) - beta": exp_at_c - self.beta,
            "slope jump at xi_c": self.alpha * self.kappa * math.exp(self.kappa * self.xi_c)
            - self.beta / self.xi_c,
            "S(1) - B": self.m + self.alpha * math.expm1(self.kappa) - self.B,
        }


_KAPPA_BRACKET = (1e-8, 1e3)


def _log_excess(kappa: float, beta: float, B: float, xi_c: float) -> float:
    # S(1) - B after eliminating m and alpha, compared in log space:
    # expm1(kappa (1 - xi_c)) / kappa  vs  (B - beta) xi_c / beta
    y = kappa * (1.0 - xi_c)
    return (y + math.log(-math.expm1(-y)) - math.log(kappa)
            - math.log((B - beta) * xi_c / beta))


def solve_transform(beta: float, B: float, xi_c: float) -> TransformFn:
    """Solve for ``m, alpha, kappa`` by bisection on the reduced equation in kappa."""
    if not 0 < beta < B:
        raise TransformError(f"need 0 < beta < B, got beta={beta}, B={B}")
    if not 0 < xi_c < 1:
        raise TransformError(f"need 0 < xi_c < 1, got {xi_c}")
    lo, hi = _KAPPA_BRACKET
    f_lo, f_hi = _log_excess(lo, beta, B, xi_c), _log_excess(hi, beta, B, xi_c)
    if f_lo > 0 or f_hi < 0:
        probe = _build(beta, B, xi_c, lo if f_lo > 0 else hi)
        raise TransformError(
            f"no kappa in {_KAPPA_BRACKET} joins the pieces (beta={beta}, B={B}, "
            f"xi_c={xi_c}); residuals at the bracket end: {probe.residuals()}"
        )
    # the residual is increasing in kappa; bisect down to float resolution
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _log_excess(mid, beta, B, xi_c) < 0:
            lo = mid
        else:
            hi = mid
    kappa = lo if abs(_log_excess(lo, beta, B, xi_c)) < abs(_log_excess(hi, beta, B, xi_c)) else hi
    return _build(beta, B, xi_c, kappa)


def _build(beta, B, xi_c, kappa):
    alpha = beta / (xi_c * kappa * math.exp(kappa * xi_c))
    m = beta - alpha * math.expm1(kappa * xi_c)
    return TransformFn(beta=float(beta), B=float(B), xi_c=float(xi_c),
                       m=m, alpha=alpha, kappa=kappa)


def check_controllable(psi: Formula) -> None:
    """Reject anything but predicates, negated predicates, true and conjunctions."""
    if isinstance(psi, (Pred, TrueF)):
        return
    if isinstance(psi, Not):
        if isinstance(psi.child, Pred):
            return
        raise FragmentError("negation must apply directly to a predicate")
    if isinstance(psi, And):
        for c in psi.args:
            check_controllable(c)
        return
    raise FragmentError("non-temporal fragment required")


def subtask_body(phi: Formula) -> Formula:
    """Non-temporal body of ``G psi``, ``F psi`` or ``F G psi``."""
    if isinstance(phi, Eventually) and isinstance(phi.child, Always):
        body = phi.child.child
    elif isinstance(phi, (Always, Eventually)):
        body = phi.child
    else:
        raise FragmentError(f"subtask must be G psi, F psi or F G psi, got {phi}")
    check_controllable(body)
    return body


@dataclass(frozen=True)
class SubtaskController:
    psi: Formula
    funnel: Funnel
    transform: TransformFn
    weight: float

    def __post_init__(self):
        check_controllable(self.psi)


def _project(g_x: np.ndarray, grad: np.ndarray) -> np.ndarray:
    # g(x)^T grad for batched g (..., n, m) and grad (..., n)
    return np.einsum("...nm,...n->...m", g_x, grad)


def elementary_control(sub: SubtaskController, g_x: np.ndarray, x: np.ndarray, t: float) -> np.ndarray:
    """``S(clip(xi, 0, 1)) * g(x)^T grad rho_psi(x)``, batched over leading axes of ``x``."""
    x = np.asarray(x, dtype=float)
    rho, grad = smooth_robustness(sub.psi, x)
    e = sub.transform(np.clip(xi(sub.funnel, rho, t), 0.0, 1.0))
    return np.asarray(e)[..., None] * _project(np.asarray(g_x, dtype=float), grad)


@dataclass(frozen=True)
class BaseLaw:
    """Weighted sum of elementary subtask controls."""
    subtasks: Tuple[SubtaskController, ...]

    def __post_init__(self):
        object.__setattr__(self, "subtasks", tuple(self.subtasks))
        if not self.subtasks:
            raise ValueError("base law needs at least one subtask")
        total = sum(s.weight for s in self.subtasks)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"subtask weights must sum to 1, got {total}")

    def __call__(self, x, t, g_x):
        return base_control(self, x, t, g_x)


def base_control(law: BaseLaw, x, t, g_x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    u = None
    for sub in law.subtasks:
        term = sub.weight * elementary_control(sub, g_x, x, t)
        u = term if u is None else u + term
    return u


def build_base_law(task: Formula, funnels: Sequence[Funnel], transforms: Sequence[TransformFn],
                   weights: Sequence[float] = None) -> BaseLaw:
    """One controller per top-level conjunct of ``task``; weights default to 1/M."""
    phis = conjuncts(task)
    if not len(phis) == len(funnels) == len(transforms):
        raise ValueError(
            f"task has {len(phis)} subtasks but {len(funnels)} funnels and "
            f"{len(transforms)} transforms were given"
        )
    if weights is None:
        weights = [1.0 / len(phis)] * len(phis)
    return BaseLaw(tuple(
        SubtaskController(subtask_body(phi), f, s, float(w))
        for phi, f, s, w in zip(phis, funnels, transforms, weights)
    ))


def funnel_bounds(law: BaseLaw, times) -> Tuple[np.ndarray, np.ndarray]:
    """Lower and upper funnel curves per subtask, shape ``(M, len(times))``."""
    lower = np.array([s.funnel.gamma(np.asarray(times)) for s in law.subtasks])
    upper = np.array([np.full(len(times), s.funnel.rho_max) for s in law.subtasks])
    return lower, upper
