"""Spatial robustness of STL formulas over sampled signals.

Three evaluators live here:

* :func:`robustness` -- top-down recursion at a single time point, the
  reference semantics used by the monitor.
* :func:`robustness_batch` -- bottom-up vectorized evaluation over a batch of
  trajectories sharing one grid, used inside the optimizer.
* :func:`smooth_robustness` -- log-sum-exp under-approximation with analytic
  gradient for the non-temporal fragment, used by the base control law.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np

from .formula import (
    Always, And, Eventually, Formula, Not, Pred, Trajectory, TrueF, Until,
)

_EPS = 1e-9


class WindowError(ValueError):
    """A temporal window contains no grid point after clipping."""


class FragmentError(ValueError):
    """A formula falls outside the fragment an operation supports."""


def window_offsets(a: float, b: float, dt: float) -> Tuple[int, float]:
    """Grid offsets ``(lo, hi)`` covering ``[a, b]``; ``hi`` may be ``inf``."""
    lo = int(math.ceil(a / dt - _EPS))
    hi = math.inf if math.isinf(b) else int(math.floor(b / dt + _EPS))
    return lo, hi


def _window(j: int, a: float, b: float, dt: float, last: int) -> range:
    lo, hi = window_offsets(a, b, dt)
    start = j + lo
    stop = last if math.isinf(hi) else min(j + int(hi), last)
    if start > stop:
        raise WindowError("window outside trajectory")
    return range(start, stop + 1)


# ---------------------------------------------------------------------------
# recursive point evaluation

def robustness(formula: Formula, traj: Trajectory, t: float = None) -> float:
    """Exact spatial robustness of ``formula`` on ``traj`` at time ``t``.

    ``t`` defaults to the start of the trajectory. Temporal windows are
    clipped to the trajectory end; an empty window raises :class:`WindowError`.
    """
    j0 = 0 if t is None else traj.index_of(t)
    states, dt, last = traj.states, traj.dt, traj.steps
    pred_cache: Dict[int, np.ndarray] = {}

    def pred_values(p) -> np.ndarray:
        key = id(p)
        if key not in pred_cache:
            pred_cache[key] = np.asarray(p.value(states), dtype=float)
        return pred_cache[key]

    def span(node: Formula, idx: range) -> np.ndarray:
        # values of node at every index of idx
        if isinstance(node, Pred):
            return pred_values(node.predicate)[idx.start: idx.stop]
        if isinstance(node, TrueF):
            return np.full(len(idx), math.inf)
        if isinstance(node, Not) and not node.is_temporal:
            return -span(node.child, idx)
        if isinstance(node, And) and not node.is_temporal:
            return np.min([span(c, idx) for c in node.args], axis=0)
        return np.array([at(node, i) for i in idx])

    @lru_cache(maxsize=None)
    def at(node: Formula, j: int) -> float:
        if isinstance(node, TrueF):
            return math.inf
        if isinstance(node, Pred):
            return float(pred_values(node.predicate)[j])
        if isinstance(node, Not):
            return -at(node.child, j)
        if isinstance(node, And):
            return min(at(c, j) for c in node.args)
        if isinstance(node, Eventually):
            return float(np.max(span(node.child, _window(j, node.a, node.b, dt, last))))
        if isinstance(node, Always):
            return float(np.min(span(node.child, _window(j, node.a, node.b, dt, last))))
        if isinstance(node, Until):
            best = -math.inf
            for j1 in _window(j, node.a, node.b, dt, last):
                hold = float(np.min(span(node.left, range(j, j1 + 1))))
                best = max(best, min(at(node.right, j1), hold))
            return best
        raise TypeError(f"unknown formula node {node!r}")

    return at(formula, j0)


def satisfied(formula: Formula, traj: Trajectory, t: float = None) -> bool:
    """Boolean satisfaction with predicates thresholded at ``h >= 0``."""
    j0 = 0 if t is None else traj.index_of(t)
    states, dt, last = traj.states, traj.dt, traj.steps

    @lru_cache(maxsize=None)
    def sat(node: Formula, j: int) -> bool:
        if isinstance(node, TrueF):
            return True
        if isinstance(node, Pred):
            return bool(node.predicate.value(states[j]) >= 0)
        if isinstance(node, Not):
            return not sat(node.child, j)
        if isinstance(node, And):
            return all(sat(c, j) for c in node.args)
        if isinstance(node, Eventually):
            return any(sat(node.child, i) for i in _window(j, node.a, node.b, dt, last))
        if isinstance(node, Always):
            return all(sat(node.child, i) for i in _window(j, node.a, node.b, dt, last))
        if isinstance(node, Until):
            return any(
                sat(node.right, j1) and all(sat(node.left, j2) for j2 in range(j, j1 + 1))
                for j1 in _window(j, node.a, node.b, dt, last)
            )
        raise TypeError(f"unknown formula node {node!r}")

    return sat(formula, j0)


# ---------------------------------------------------------------------------
# vectorized batch evaluation

def _sliding(values: np.ndarray, lo: int, hi: float, op) -> np.ndarray:
    """``out[..., j] = op(values[..., j+lo : j+hi+1])`` clipped to the grid.

    Empty windows give NaN. Uses a doubling (sparse table) reduction so the
    cost is ``O(L log W)``.
    """
    length = values.shape[-1]
    identity = -np.inf if op is np.maximum else np.inf
    hi_eff = length - 1 if math.isinf(hi) else int(hi)
    width = hi_eff - lo + 1
    out_shape = values.shape
    if width <= 0:
        return np.full(out_shape, np.nan)
    # pad so every window start j + lo and its full width fit
    pad_front = max(0, -lo)
    padded = np.concatenate(
        [np.full(values.shape[:-1] + (pad_front,), identity), values,
         np.full(values.shape[:-1] + (max(lo, 0) + width,), identity)],
        axis=-1,
    )
    table = padded
    span = 1
    while 2 * span <= width:
        table = op(table[..., :-span], table[..., span:])
        span *= 2
    starts = np.arange(length) + lo + pad_front
    out = op(table[..., starts], table[..., starts + width - span])
    empty = np.arange(length) + lo > length - 1
    if empty.any():
        out[..., empty] = np.nan
    return out


def _signal(node: Formula, pred_vals, dt: float) -> np.ndarray:
    if isinstance(node, Pred):
        return pred_vals[id(node.predicate)]
    if isinstance(node, TrueF):
        any_vals = next(iter(pred_vals.values()))
        return np.full(any_vals.shape, np.inf)
    if isinstance(node, Not):
        return -_signal(node.child, pred_vals, dt)
    if isinstance(node, And):
        out = _signal(node.args[0], pred_vals, dt)
        for c in node.args[1:]:
            out = np.minimum(out, _signal(c, pred_vals, dt))
        return out
    if isinstance(node, (Eventually, Always)):
        child = _signal(node.child, pred_vals, dt)
        lo, hi = window_offsets(node.a, node.b, dt)
        op = np.maximum if isinstance(node, Eventually) else np.minimum
        with np.errstate(invalid="ignore"):
            # NaN (undefined) children poison windows that contain them
            return _sliding(child, lo, hi, op)
    if isinstance(node, Until):
        left = _signal(node.left, pred_vals, dt)
        right = _signal(node.right, pred_vals, dt)
        lo, hi = window_offsets(node.a, node.b, dt)
        length = left.shape[-1]
        out = np.full(left.shape, np.nan)
        for j in range(length):
            stop = length - 1 if math.isinf(hi) else min(j + int(hi), length - 1)
            if j + lo > stop:
                continue
            hold = np.minimum.accumulate(left[..., j: stop + 1], axis=-1)
            cand = np.minimum(right[..., j + lo: stop + 1], hold[..., lo:])
            out[..., j] = np.max(cand, axis=-1)
        return out
    raise TypeError(f"unknown formula node {node!r}")


def robustness_signal(formula: Formula, states: np.ndarray, dt: float) -> np.ndarray:
    """Robustness at every grid point for a batch of state sequences.

    ``states`` has shape ``(..., L+1, n)``; the result has shape ``(..., L+1)``
    with NaN where a window is empty.
    """
    states = np.asarray(states, dtype=float)
    pred_vals = {id(p): np.asarray(p.value(states), dtype=float) for p in formula.predicates()}
    if not pred_vals:
        pred_vals = {0: np.zeros(states.shape[:-1])}
    return _signal(formula, pred_vals, dt)


def robustness_batch(formula: Formula, states: np.ndarray, dt: float) -> np.ndarray:
    """Robustness at the first grid point for each trajectory in a batch."""
    values = robustness_signal(formula, states, dt)[..., 0]
    if np.isnan(values).any():
        raise WindowError("window outside trajectory")
    return values


# ---------------------------------------------------------------------------
# smooth non-temporal robustness

def smooth_robustness(formula: Formula, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Smooth robustness value and gradient of a non-temporal formula.

    Conjunctions use ``-log(sum_i exp(-rho_i))`` over all operands, which never
    exceeds the exact minimum and stays within ``log(#operands)`` of it.
    ``x`` may be batched with shape ``(..., n)``.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(formula, Pred):
        return formula.predicate.value_and_grad(x)
    if isinstance(formula, TrueF):
        return np.full(x.shape[:-1], np.inf), np.zeros_like(x)
    if isinstance(formula, Not):
        if not isinstance(formula.child, Pred):
            if formula.child.is_temporal:
                raise FragmentError("non-temporal fragment required")
            raise FragmentError("negation is only supported directly above a predicate")
        v, g = formula.child.predicate.value_and_grad(x)
        return -v, -g
    if isinstance(formula, And):
        parts = [smooth_robustness(c, x) for c in formula.args]
        vals = np.stack([p[0] for p in parts], axis=0)
        grads = np.stack([p[1] for p in parts], axis=0)
        low = np.min(vals, axis=0)
        finite_low = np.where(np.isfinite(low), low, 0.0)
        with np.errstate(over="ignore", invalid="ignore"):
            expo = np.exp(-(vals - finite_low))
        total = np.sum(expo, axis=0)
        value = finite_low - np.log(total)
        value = np.where(np.isfinite(low), value, low)
        share = expo / total
        grad = np.sum(share[..., None] * grads, axis=0)
        return value, grad
    if isinstance(formula, (Eventually, Always, Until)):
        raise FragmentError("non-temporal fragment required")
    raise TypeError(f"unknown formula node {formula!r}")
