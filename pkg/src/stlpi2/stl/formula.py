"""STL abstract syntax tree and sampled trajectories."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Tuple

import numpy as np

from .predicates import Predicate


class Formula:
    """Base class of all STL formula nodes. Nodes are immutable."""

    def children(self) -> Tuple["Formula", ...]:
        return ()

    def walk(self) -> Iterator["Formula"]:
        yield self
        for c in self.children():
            yield from c.walk()

    @property
    def is_temporal(self) -> bool:
        return any(isinstance(node, _TEMPORAL) for node in self.walk())

    def predicates(self) -> Tuple[Predicate, ...]:
        seen = []
        for node in self.walk():
            if isinstance(node, Pred) and node.predicate not in seen:
                seen.append(node.predicate)
        return tuple(seen)

    def __and__(self, other: "Formula") -> "And":
        left = self.args if isinstance(self, And) else (self,)
        right = other.args if isinstance(other, And) else (other,)
        return And(left + right)

    def __invert__(self) -> "Not":
        return Not(self)

    def __str__(self):
        from .parser import to_text
        return to_text(self)


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class Pred(Formula):
    predicate: Predicate

    @property
    def name(self) -> str:
        return self.predicate.label


@dataclass(frozen=True)
class Not(Formula):
    child: Formula

    def children(self):
        return (self.child,)


@dataclass(frozen=True)
class And(Formula):
    args: Tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) < 2:
            raise ValueError("And needs at least two operands")

    def children(self):
        return self.args


def _check_interval(a, b):
    a, b = float(a), float(b)
    if math.isnan(a) or math.isnan(b) or a < 0 or math.isinf(a):
        raise ValueError(f"invalid interval [{a}, {b}]")
    if a > b:
        raise ValueError(f"interval lower bound {a} exceeds upper bound {b}")
    return a, b


@dataclass(frozen=True)
class Eventually(Formula):
    a: float
    b: float
    child: Formula

    def __post_init__(self):
        a, b = _check_interval(self.a, self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def children(self):
        return (self.child,)


@dataclass(frozen=True)
class Always(Formula):
    a: float
    b: float
    child: Formula

    def __post_init__(self):
        a, b = _check_interval(self.a, self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def children(self):
        return (self.child,)


@dataclass(frozen=True)
class Until(Formula):
    a: float
    b: float
    left: Formula
    right: Formula

    def __post_init__(self):
        a, b = _check_interval(self.a, self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def children(self):
        return (self.left, self.right)


_TEMPORAL = (Eventually, Always, Until)


def conjuncts(formula: Formula) -> Tuple[Formula, ...]:
    """Top-level conjunction operands (a lone formula is its own conjunct)."""
    return formula.args if isinstance(formula, And) else (formula,)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States ``x_0..x_L`` and inputs ``u_0..u_{L-1}`` on a uniform grid."""
    dt: float
    states: np.ndarray
    inputs: np.ndarray = field(default=None)
    t0: float = 0.0

    def __post_init__(self):
        states = np.array(self.states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        if states.ndim != 2 or states.shape[0] < 1:
            raise ValueError("states must be a (L+1, n) array")
        if self.inputs is None:
            inputs = np.zeros((states.shape[0] - 1, 0))
        else:
            inputs = np.array(self.inputs, dtype=float)
            if inputs.ndim == 1:
                inputs = inputs[:, None]
        if inputs.ndim != 2 or inputs.shape[0] != states.shape[0] - 1:
            raise ValueError(
                f"expected {states.shape[0] - 1} input rows for {states.shape[0]} states, "
                f"got shape {inputs.shape}"
            )
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        states.setflags(write=False)
        inputs.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "t0", float(self.t0))

    @property
    def steps(self) -> int:
        return self.states.shape[0] - 1

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.steps + 1)

    @property
    def duration(self) -> float:
        return self.steps * self.dt

    def index_of(self, t: float) -> int:
        j = int(round((t - self.t0) / self.dt))
        if j < 0 or j > self.steps or abs(self.t0 + j * self.dt - t) > 0.5 * self.dt:
            raise ValueError(f"time {t} is not on the trajectory grid")
        return j
