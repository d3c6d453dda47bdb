"""Predicate functions h(x) with analytic gradients.

Every predicate works on batched states: ``x`` has shape ``(..., n)`` and the
value comes back with shape ``(...)``, the gradient with shape ``(..., n)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np


def _norm_and_unit(diff: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    dist = np.linalg.norm(diff, axis=-1)
    safe = np.where(dist > 0.0, dist, 1.0)
    unit = np.where((dist > 0.0)[..., None], diff / safe[..., None], 0.0)
    return dist, unit


class Predicate:
    """Base class for a named scalar state function h(x).

    Subclasses implement :meth:`value_and_grad`. The predicate is satisfied
    wherever ``h(x) >= 0``.
    """

    label: str
    dim: int

    def value_and_grad(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def value(self, x: np.ndarray) -> np.ndarray:
        return self.value_and_grad(x)[0]

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.value_and_grad(x)[1]

    def __call__(self, x):
        return self.value(x)


def _check_indices(indices, dim):
    idx = tuple(int(i) for i in indices)
    if any(i < 0 or i >= dim for i in idx):
        raise ValueError(f"indices {idx} out of range for state dimension {dim}")
    return idx


@dataclass(frozen=True)
class BallInside(Predicate):
    """``h(x) = radius - |x[indices] - center|`` (stay inside a disc)."""
    label: str
    dim: int
    indices: Tuple[int, ...]
    center: Tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "indices", _check_indices(self.indices, self.dim))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if len(self.center) != len(self.indices):
            raise ValueError("center and indices must have the same length")

    def value_and_grad(self, x):
        x = np.asarray(x, dtype=float)
        idx = list(self.indices)
        dist, unit = _norm_and_unit(x[..., idx] - np.asarray(self.center))
        grad = np.zeros_like(x)
        grad[..., idx] = -unit
        return self.radius - dist, grad


@dataclass(frozen=True)
class BallOutside(Predicate):
    """``h(x) = |x[indices] - center| - radius`` (keep out of a disc)."""
    label: str
    dim: int
    indices: Tuple[int, ...]
    center: Tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "indices", _check_indices(self.indices, self.dim))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if len(self.center) != len(self.indices):
            raise ValueError("center and indices must have the same length")

    def value_and_grad(self, x):
        x = np.asarray(x, dtype=float)
        idx = list(self.indices)
        dist, unit = _norm_and_unit(x[..., idx] - np.asarray(self.center))
        grad = np.zeros_like(x)
        grad[..., idx] = unit
        return dist - self.radius, grad


@dataclass(frozen=True)
class PairDistanceMax(Predicate):
    """``h(x) = d_max - |x[first] - x[second]|``."""
    label: str
    dim: int
    first: Tuple[int, ...]
    second: Tuple[int, ...]
    distance: float

    def __post_init__(self):
        object.__setattr__(self, "first", _check_indices(self.first, self.dim))
        object.__setattr__(self, "second", _check_indices(self.second, self.dim))
        if len(self.first) != len(self.second):
            raise ValueError("index groups must have the same length")

    def value_and_grad(self, x):
        x = np.asarray(x, dtype=float)
        a, b = list(self.first), list(self.second)
        dist, unit = _norm_and_unit(x[..., a] - x[..., b])
        grad = np.zeros_like(x)
        grad[..., a] -= unit
        grad[..., b] += unit
        return self.distance - dist, grad


@dataclass(frozen=True)
class PairDistanceMin(Predicate):
    """``h(x) = |x[first] - x[second]| - d_min``."""
    label: str
    dim: int
    first: Tuple[int, ...]
    second: Tuple[int, ...]
    distance: float

    def __post_init__(self):
        object.__setattr__(self, "first", _check_indices(self.first, self.dim))
        object.__setattr__(self, "second", _check_indices(self.second, self.dim))
        if len(self.first) != len(self.second):
            raise ValueError("index groups must have the same length")

    def value_and_grad(self, x):
        x = np.asarray(x, dtype=float)
        a, b = list(self.first), list(self.second)
        dist, unit = _norm_and_unit(x[..., a] - x[..., b])
        grad = np.zeros_like(x)
        grad[..., a] += unit
        grad[..., b] -= unit
        return dist - self.distance, grad


@dataclass(frozen=True)
class MidpointBall(Predicate):
    """``h(x) = radius - |(x[first] + x[second]) / 2 - x[follower]|``."""
    label: str
    dim: int
    first: Tuple[int, ...]
    second: Tuple[int, ...]
    follower: Tuple[int, ...]
    radius: float

    def __post_init__(self):
        for name in ("first", "second", "follower"):
            object.__setattr__(self, name, _check_indices(getattr(self, name), self.dim))
        if not len(self.first) == len(self.second) == len(self.follower):
            raise ValueError("index groups must have the same length")

    def value_and_grad(self, x):
        x = np.asarray(x, dtype=float)
        a, b, c = list(self.first), list(self.second), list(self.follower)
        dist, unit = _norm_and_unit(0.5 * (x[..., a] + x[..., b]) - x[..., c])
        grad = np.zeros_like(x)
        grad[..., a] -= 0.5 * unit
        grad[..., b] -= 0.5 * unit
        grad[..., c] += unit
        return self.radius - dist, grad


@dataclass(frozen=True, eq=False)
class FunctionPredicate(Predicate):
    """Predicate from user callables.

    ``h`` and ``grad`` must accept batched states of shape ``(..., n)``.
    Equality is identity, since callables cannot be compared by value.
    """
    label: str
    dim: int
    h: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]

    def value_and_grad(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self.h(x), dtype=float), np.asarray(self.grad(x), dtype=float)


PREDICATE_KINDS = {
    "ball-inside": BallInside,
    "ball-outside": BallOutside,
    "pair-distance-max": PairDistanceMax,
    "pair-distance-min": PairDistanceMin,
    "midpoint-ball": MidpointBall,
}
