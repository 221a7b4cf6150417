"""Differentiable group-heterogeneity objective for soft assignments.

The classical k-group logrank statistic is generalized by replacing indicator
group memberships with row-stochastic probabilities: observed events and risk
sets become probability-weighted sums, while total event counts and risk-set
sizes stay fixed. The statistic, a balance penalty on the batch-mean class
probabilities, and the combined objective all come with exact closed-form
gradients with respect to the probabilities (and, via the softmax Jacobian,
with respect to logits).

Sign convention: the trainer MAXIMIZES ``total = statistic - penalty_weight *
penalty`` (group heterogeneity up, imbalance down); optimizers that minimize
should descend on ``-total``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ._backend import get_backend
from .errors import InvalidInputError, SingularVarianceError
from .records import as_time_event_arrays
from .survival import EventTable

_log = logging.getLogger(__name__)

_ROW_SUM_TOL = 1e-7
_ENTRY_TOL = 1e-9


@dataclass(frozen=True)
class SoftAssignment:
    """Row-stochastic (n, k) matrix of group-membership probabilities."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 2 or p.shape[1] < 1:
            raise InvalidInputError("probs must be a 2-D (n, k) matrix")
        if p.size and (p.min() < -_ENTRY_TOL or p.max() > 1.0 + _ENTRY_TOL):
            raise InvalidInputError("probabilities must lie in [0, 1]")
        if p.size and np.max(np.abs(p.sum(axis=1) - 1.0)) > _ROW_SUM_TOL:
            raise InvalidInputError("each probability row must sum to 1")
        object.__setattr__(self, "probs", p)

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    @property
    def k(self) -> int:
        return self.probs.shape[1]


def as_probs(soft) -> np.ndarray:
    """Coerce a SoftAssignment or raw array to a validated (n, k) ndarray."""
    if isinstance(soft, SoftAssignment):
        return soft.probs
    return SoftAssignment(np.asarray(soft, dtype=np.float64)).probs


def one_hot(labels, k: int) -> np.ndarray:
    """Indicator matrix: the hard-assignment special case of SoftAssignment."""
    labels = np.asarray(labels, dtype=np.int64)
    out = np.zeros((labels.size, k))
    out[np.arange(labels.size), labels] = 1.0
    return out


def row_softmax(logits) -> np.ndarray:
    """Row-wise softmax, shifted by the row max for stability."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class LossConfig:
    """Knobs for the soft objective.

    ``penalty_weight`` scales the balance penalty; ``prob_floor`` clamps the
    class means before the penalty is evaluated (must stay below 1/k);
    ``variance_ridge`` is added to the reduced covariance diagonal before the
    solve to stabilize small batches.
    """

    penalty_weight: float = 0.1
    prob_floor: float = 1e-4
    variance_ridge: float = 1e-8

    def __post_init__(self):
        if self.penalty_weight < 0.0:
            raise InvalidInputError("penalty_weight must be >= 0")
        if not 0.0 < self.prob_floor < 0.5:
            raise InvalidInputError("prob_floor must lie in (0, 0.5)")
        if self.variance_ridge < 0.0:
            raise InvalidInputError("variance_ridge must be >= 0")


@dataclass(frozen=True)
class LossValue:
    """Objective components and the gradient with respect to the probabilities.

    ``total = statistic - penalty_weight * penalty``; ``grad_probs`` is
    d(total)/d(probs), shape (n, k).
    """

    statistic: float
    penalty: float
    total: float
    grad_probs: np.ndarray


def _aggregate(times, events, probs):
    """Sort by time and build per-event-time masses via the active backend."""
    order = np.argsort(times, kind="stable")
    ts, es, ps = times[order], events[order], np.ascontiguousarray(probs[order])
    event_times, d, at_risk, group_events, group_at_risk = get_backend().event_aggregates(
        ts, es, ps
    )
    return order, ts, es, event_times, d, at_risk, group_events, group_at_risk


def partial_event_table(soft, records) -> EventTable:
    """Event table with probability-weighted (possibly fractional) masses.

    With one-hot probabilities this reduces exactly to the hard event table.
    """
    probs = as_probs(soft)
    times, events = as_time_event_arrays(records)
    if probs.shape[0] != times.size:
        raise InvalidInputError("assignment rows must align one-to-one with records")
    if not events.any():
        raise InvalidInputError("cannot build an event table without any observed event")
    _, _, _, event_times, d, at_risk, group_events, group_at_risk = _aggregate(
        times, events, probs
    )
    return EventTable(event_times, d, at_risk, group_events, group_at_risk)


def _statistic_core(times, events, probs, ridge, want_grad):
    """Soft logrank statistic and (optionally) its exact gradient.

    The backward pass differentiates through the observed masses, expected
    masses, and the covariance assembly; only the group masses depend on the
    probabilities (total counts are fixed because rows sum to 1).
    """
    n, k = probs.shape
    order, ts, es, event_times, d, R, O, Rg = _aggregate(times, events, probs)
    if event_times.size == 0:
        return 0.0, (np.zeros((n, k)) if want_grad else None)
    expected = d[:, None] * Rg / R[:, None]
    Z = (O - expected).sum(axis=0)
    c = np.where(R > 1.0, d * (R - d) / np.maximum(R - 1.0, 1.0), 0.0)
    cR = c / R
    cRR = c / (R * R)
    V = np.diag(cR @ Rg) - (Rg * cRR[:, None]).T @ Rg
    W = V[: k - 1, : k - 1].copy()
    W[np.diag_indices_from(W)] += ridge
    try:
        L = np.linalg.cholesky(W)
    except np.linalg.LinAlgError:
        raise SingularVarianceError(
            "reduced soft variance-covariance matrix is not positive definite"
        ) from None
    z = Z[: k - 1]
    y = np.linalg.solve(L.T, np.linalg.solve(L, z))
    statistic = max(float(z @ y), 0.0)
    if not want_grad:
        return statistic, None
    # Adjoints of the quadratic form: dL/dZ_r = 2y, dL/dW = -y y^T.
    gZ = np.zeros(k)
    gZ[: k - 1] = 2.0 * y
    gV = np.zeros((k, k))
    gV[: k - 1, : k - 1] = -np.outer(y, y)
    # Per-time adjoint of the group risk masses; the event masses only enter Z.
    g_risk = (
        -(d / R)[:, None] * gZ[None, :]
        + cR[:, None] * np.diag(gV)[None, :]
        - 2.0 * cRR[:, None] * (Rg @ gV)
    )
    cum_g_risk = np.cumsum(g_risk, axis=0)
    grad_sorted = get_backend().scatter_time_gradient(ts, es, event_times, gZ, cum_g_risk)
    grad = np.empty_like(grad_sorted)
    grad[order] = grad_sorted
    return statistic, grad


def partial_logrank_statistic(soft, records, config: LossConfig | None = None) -> float:
    """Soft-assignment logrank statistic (k-1 reduced quadratic form, ridged)."""
    config = config or LossConfig()
    probs = as_probs(soft)
    times, events = as_time_event_arrays(records)
    if probs.shape[0] != times.size:
        raise InvalidInputError("assignment rows must align one-to-one with records")
    statistic, _ = _statistic_core(times, events, probs, config.variance_ridge, want_grad=False)
    return statistic


def penalty_alpha(k: int) -> float:
    """Exponent that puts the barrier's minimum at class mean 1/k."""
    return math.log(0.5) / math.log(1.0 / k)


def balance_penalty(mean_probs, k: int | None = None) -> float:
    """Barrier on class means: 0 when every mean is 1/k, positive elsewhere.

    Each mean m contributes 1 / (m^a - m^(2a)) with a = ln(1/2)/ln(1/k); the
    average minus 4 vanishes exactly at the uniform point, where m^a = 1/2.
    Means must already lie strictly inside (0, 1) (callers clamp first).
    """
    m = np.asarray(mean_probs, dtype=np.float64)
    if k is None:
        k = m.size
    if k < 2:
        raise InvalidInputError("balance penalty needs k >= 2 groups")
    if m.size != k:
        raise InvalidInputError(f"expected {k} class means, got {m.size}")
    if m.min() <= 0.0 or m.max() >= 1.0:
        raise InvalidInputError("class means must lie strictly inside (0, 1)")
    q = m ** penalty_alpha(k)
    return float(np.mean(1.0 / (q - q * q)) - 4.0)


def _penalty_and_grad(probs: np.ndarray, config: LossConfig):
    n, k = probs.shape
    means = probs.mean(axis=0)
    lo, hi = config.prob_floor, 1.0 - config.prob_floor
    clipped = np.clip(means, lo, hi)
    alpha = penalty_alpha(k)
    q = clipped**alpha
    denom = q - q * q
    penalty = float(np.mean(1.0 / denom) - 4.0)
    # Chain rule through the clamp: zero slope where the clamp is active.
    interior = (means > lo) & (means < hi)
    d_mean = np.where(
        interior,
        -(1.0 - 2.0 * q) / (denom * denom) * alpha * clipped ** (alpha - 1.0) / k,
        0.0,
    )
    grad = np.tile(d_mean / n, (n, 1))
    return penalty, grad


def _objective_core(probs, times, events, config: LossConfig) -> LossValue:
    # Callers guarantee probs is row-stochastic and aligned with the records.
    if not events.any():
        _log.debug("batch of %d subjects has no events; objective defined as 0", times.size)
        return LossValue(0.0, 0.0, 0.0, np.zeros_like(probs))
    statistic, grad_stat = _statistic_core(
        times, events, probs, config.variance_ridge, want_grad=True
    )
    penalty, grad_pen = _penalty_and_grad(probs, config)
    total = statistic - config.penalty_weight * penalty
    grad = grad_stat - config.penalty_weight * grad_pen
    return LossValue(statistic, penalty, total, grad)


def total_objective(soft, records, config: LossConfig | None = None) -> LossValue:
    """Statistic minus weighted balance penalty, with d(total)/d(probs).

    A batch without any observed event carries no logrank information: the
    value and gradient are defined as zero (callers may count such skips).
    """
    config = config or LossConfig()
    probs = as_probs(soft)
    times, events = as_time_event_arrays(records)
    if probs.shape[0] != times.size:
        raise InvalidInputError("assignment rows must align one-to-one with records")
    return _objective_core(probs, times, events, config)


def objective_from_logits(logits, records, config: LossConfig | None = None):
    """LossValue and d(total)/d(logits) for row-softmaxed logits.

    The logits gradient chains grad_probs through the softmax Jacobian, so
    each row sums to zero (adding a constant to a logit row changes nothing).
    Softmax output is row-stochastic by construction, so this path skips the
    assignment re-validation.
    """
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 2:
        raise InvalidInputError("logits must be a 2-D (n, k) matrix")
    times, events = as_time_event_arrays(records)
    if z.shape[0] != times.size:
        raise InvalidInputError("logit rows must align one-to-one with records")
    probs = row_softmax(z)
    value = _objective_core(probs, times, events, config or LossConfig())
    g = value.grad_probs
    grad_logits = probs * (g - (g * probs).sum(axis=1, keepdims=True))
    return value, grad_logits


def gradient_wrt_logits(logits, records, config: LossConfig | None = None) -> np.ndarray:
    """d(total)/d(logits); see :func:`objective_from_logits`."""
    _, grad_logits = objective_from_logits(logits, records, config)
    return grad_logits
