"""Pure-numpy kernels: vectorized fallbacks for the numba-jitted hot paths.

Every function here has a signature-identical twin in ``_kernels_numba``.
Inputs to the aggregation/scatter kernels must already be sorted by time
(ascending, stable).
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def event_aggregates(times, events, probs):
    """Per-event-time masses for soft group assignments.

    Parameters are pre-sorted by time. Returns ``(event_times, d, at_risk,
    group_events, group_at_risk)`` where ``d`` and ``at_risk`` are the total
    event counts and risk-set sizes, and the group arrays are (J, k) sums of
    assignment probabilities over the event set / risk set at each time.
    """
    n, k = probs.shape
    event_times = np.unique(times[events])
    J = event_times.size
    if J == 0:
        z = np.zeros(0, dtype=np.float64)
        return event_times, z, z.copy(), np.zeros((0, k)), np.zeros((0, k))
    # Risk set at t_j = all rows from the first index with time >= t_j.
    suffix = np.cumsum(probs[::-1], axis=0)[::-1]
    first_idx = np.searchsorted(times, event_times, side="left")
    group_at_risk = suffix[first_idx]
    at_risk = (n - first_idx).astype(np.float64)
    ev_probs = probs[events]
    slot = np.searchsorted(event_times, times[events])
    d = np.bincount(slot, minlength=J).astype(np.float64)
    group_events = np.zeros((J, k), dtype=np.float64)
    np.add.at(group_events, slot, ev_probs)
    return event_times, d, at_risk, group_events, group_at_risk


def scatter_time_gradient(times, events, event_times, g_event, cum_g_risk):
    """Spread per-event-time adjoints back onto subjects (sorted order).

    ``g_event`` (k,) is each event subject's own contribution; ``cum_g_risk``
    (J, k) is the running sum over event times of the risk-set adjoint, so a
    subject picks up the prefix ending at the last event time <= its time.
    """
    n = times.size
    k = g_event.size
    grad = np.zeros((n, k), dtype=np.float64)
    pos = np.searchsorted(event_times, times, side="right") - 1
    inside = pos >= 0
    grad[inside] = cum_g_risk[pos[inside]]
    grad[events] += g_event
    return grad


def concordance_counts(times, events, scores):
    """Weighted concordant pairs and comparable pairs for Harrell's c.

    A pair is comparable when the times differ and the earlier subject had an
    event. Higher score predicts shorter survival; score ties count 0.5.
    """
    n = times.size
    concordant = 0.0
    comparable = 0
    for i in range(n - 1):
        tj = times[i + 1 :]
        ej = events[i + 1 :]
        sj = scores[i + 1 :]
        i_first = (times[i] < tj) & events[i]
        j_first = (tj < times[i]) & ej
        ties = sj == scores[i]
        concordant += np.sum(i_first & (scores[i] > sj)) + np.sum(j_first & (sj > scores[i]))
        concordant += 0.5 * np.sum((i_first | j_first) & ties)
        comparable += int(np.sum(i_first)) + int(np.sum(j_first))
    return concordant, comparable
