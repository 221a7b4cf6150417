"""Classical hard-label survival statistics.

Event tables, the Kaplan-Meier product-limit estimator with Greenwood bands,
the k-group logrank test, and Harrell's concordance index. Everything is a
pure function of its inputs. The hard logrank here is written as a direct
per-event-time enumeration, deliberately separate from the soft-assignment
path in :mod:`survcluster.loss`, so the two act as cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import get_backend
from .errors import (
    InvalidInputError,
    NoEventsError,
    SingularVarianceError,
    UndefinedCIndexError,
)
from .records import as_time_event_arrays
from .special import chi_square_sf

# Standard normal quantile at 0.975, for two-sided 95% bands.
_Z_95 = 1.959963984540054


@dataclass(frozen=True)
class EventTable:
    """Per-event-time masses: totals and per-group splits.

    ``times`` is strictly increasing; ``group_*`` arrays have shape (J, k).
    Masses may be fractional when built from soft assignments.
    """

    times: np.ndarray
    events_total: np.ndarray
    at_risk_total: np.ndarray
    group_events: np.ndarray
    group_at_risk: np.ndarray

    @property
    def n_groups(self) -> int:
        return self.group_events.shape[1]


@dataclass(frozen=True)
class StepSurvivalCurve:
    """Right-continuous step estimate of S(t) with pointwise 95% bounds."""

    times: np.ndarray
    survival: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray


def _check_labels(labels, n: int, k: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise InvalidInputError("labels must align one-to-one with records")
    if not np.issubdtype(labels.dtype, np.integer):
        if not np.all(labels == np.floor(labels)):
            raise InvalidInputError("labels must be integers")
        labels = labels.astype(np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise InvalidInputError(f"labels must lie in [0, {k})")
    return labels.astype(np.int64)


def build_event_table(records, labels, n_groups: int | None = None) -> EventTable:
    """Tabulate events and risk sets at each distinct event time.

    Censored subjects stay in the risk set through their censoring time
    (ties between censoring and events at the same time keep the censored
    subject at risk), then drop out.
    """
    times, events = as_time_event_arrays(records)
    n = times.size
    k = int(n_groups) if n_groups is not None else int(np.max(labels)) + 1
    labels = _check_labels(labels, n, k)
    event_times = np.unique(times[events])
    if event_times.size == 0:
        raise NoEventsError("cannot build an event table without any observed event")
    J = event_times.size
    d = np.zeros(J)
    at_risk = np.zeros(J)
    group_events = np.zeros((J, k))
    group_at_risk = np.zeros((J, k))
    for j, t in enumerate(event_times):
        risk_mask = times >= t
        ev_mask = (times == t) & events
        d[j] = np.count_nonzero(ev_mask)
        at_risk[j] = np.count_nonzero(risk_mask)
        group_events[j] = np.bincount(labels[ev_mask], minlength=k)
        group_at_risk[j] = np.bincount(labels[risk_mask], minlength=k)
    return EventTable(event_times, d, at_risk, group_events, group_at_risk)


def _km_steps(times: np.ndarray, events: np.ndarray):
    event_times = np.unique(times[events])
    if event_times.size == 0:
        raise NoEventsError("Kaplan-Meier estimate requires at least one event")
    n = times.size
    at_risk = n - np.searchsorted(np.sort(times), event_times, side="left")
    d = np.array([np.count_nonzero((times == t) & events) for t in event_times], dtype=float)
    return event_times, d, at_risk.astype(float)


def kaplan_meier(records) -> StepSurvivalCurve:
    """Product-limit estimate of the survival function.

    The 95% bounds use the Greenwood variance on the log-survival scale,
    clipped to [0, 1]; where the estimate reaches 0 the bounds collapse to 0.
    """
    times, events = as_time_event_arrays(records)
    event_times, d, at_risk = _km_steps(times, events)
    survival = np.cumprod(1.0 - d / at_risk)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(at_risk > d, d / (at_risk * (at_risk - d)), np.inf)
        var_log = np.cumsum(terms)
        sd = np.sqrt(var_log)
        lower = np.clip(survival * np.exp(-_Z_95 * sd), 0.0, 1.0)
        upper = np.clip(survival * np.exp(_Z_95 * sd), 0.0, 1.0)
    dead = survival <= 0.0
    lower[dead] = 0.0
    upper[dead] = 0.0
    return StepSurvivalCurve(event_times, survival, lower, upper)


def score_and_covariance(table: EventTable) -> tuple[np.ndarray, np.ndarray]:
    """Observed-minus-expected vector Z and hypergeometric covariance V.

    At times where the risk set has a single member the variance factor
    (|R|-d)/(|R|-1) is 0/0; that time contributes no variance.
    """
    d = table.events_total
    R = table.at_risk_total
    O = table.group_events
    Rg = table.group_at_risk
    expected = d[:, None] * Rg / R[:, None]
    Z = (O - expected).sum(axis=0)
    c = np.where(R > 1.0, d * (R - d) / np.maximum(R - 1.0, 1.0), 0.0)
    V = np.diag((c / R) @ Rg) - (Rg * (c / (R * R))[:, None]).T @ Rg
    return Z, V


def _reduced_quadratic_form(Z: np.ndarray, V: np.ndarray, ridge: float = 0.0) -> float:
    # Z sums to 0 across groups, so dropping the last component and inverting
    # the leading (k-1) block of V is equivalent to a generalized inverse.
    k = Z.size
    W = V[: k - 1, : k - 1].copy()
    if ridge:
        W[np.diag_indices_from(W)] += ridge
    try:
        L = np.linalg.cholesky(W)
    except np.linalg.LinAlgError:
        raise SingularVarianceError(
            "reduced variance-covariance matrix is not positive definite"
        ) from None
    z = Z[: k - 1]
    y = np.linalg.solve(L.T, np.linalg.solve(L, z))
    return max(float(z @ y), 0.0)


def multivariate_logrank_hard(records, labels, k: int) -> tuple[float, float]:
    """k-group logrank statistic and its chi-square(k-1) p-value."""
    if k < 2:
        raise InvalidInputError(f"logrank test needs k >= 2 groups, got {k}")
    table = build_event_table(records, labels, n_groups=k)
    Z, V = score_and_covariance(table)
    statistic = _reduced_quadratic_form(Z, V)
    return statistic, chi_square_sf(statistic, k - 1)


def concordance_index(risk_scores, records) -> float:
    """Harrell's c: fraction of comparable pairs ranked correctly by risk.

    Higher score means predicted shorter survival. A pair is comparable when
    the observed times differ and the earlier subject had an event; score
    ties count 0.5. Raises if censoring leaves no comparable pair.
    """
    times, events = as_time_event_arrays(records)
    scores = np.asarray(risk_scores, dtype=np.float64)
    if scores.shape != times.shape:
        raise InvalidInputError("risk_scores must align one-to-one with records")
    concordant, comparable = get_backend().concordance_counts(times, events, scores)
    if comparable == 0:
        raise UndefinedCIndexError("no comparable pair; concordance index is undefined")
    return float(concordant) / float(comparable)
