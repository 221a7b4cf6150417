"""Numba-jitted kernels; signatures mirror ``_kernels_numpy``.

Plain ``@njit`` (no prange): the loops must stay deterministic so repeated
runs with the same seed are bit-identical.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True)
def event_aggregates(times, events, probs):
    n, k = probs.shape
    # First pass: count distinct event times.
    J = 0
    last = -1.0
    seen = False
    for i in range(n):
        if events[i] and (not seen or times[i] != last):
            J += 1
            last = times[i]
            seen = True
    event_times = np.empty(J, dtype=np.float64)
    d = np.zeros(J, dtype=np.float64)
    at_risk = np.zeros(J, dtype=np.float64)
    group_events = np.zeros((J, k), dtype=np.float64)
    group_at_risk = np.zeros((J, k), dtype=np.float64)
    if J == 0:
        return event_times, d, at_risk, group_events, group_at_risk
    # Walk blocks of equal time from the end, keeping suffix sums per group.
    suffix = np.zeros(k, dtype=np.float64)
    j = J - 1
    i = n - 1
    while i >= 0:
        t = times[i]
        b = i
        while b >= 0 and times[b] == t:
            b -= 1
        dcount = 0.0
        for r in range(i, b, -1):
            for g in range(k):
                suffix[g] += probs[r, g]
            if events[r]:
                dcount += 1.0
                for g in range(k):
                    group_events[j, g] += probs[r, g]
        if dcount > 0.0:
            event_times[j] = t
            d[j] = dcount
            at_risk[j] = float(n - b - 1)
            for g in range(k):
                group_at_risk[j, g] = suffix[g]
            j -= 1
        i = b
    return event_times, d, at_risk, group_events, group_at_risk


@njit(cache=True)
def scatter_time_gradient(times, events, event_times, g_event, cum_g_risk):
    n = times.size
    k = g_event.size
    J = event_times.size
    grad = np.zeros((n, k), dtype=np.float64)
    pos = -1
    for i in range(n):
        while pos + 1 < J and event_times[pos + 1] <= times[i]:
            pos += 1
        if pos >= 0:
            for g in range(k):
                grad[i, g] = cum_g_risk[pos, g]
        if events[i]:
            for g in range(k):
                grad[i, g] += g_event[g]
    return grad


@njit(cache=True)
def concordance_counts(times, events, scores):
    n = times.size
    concordant = 0.0
    comparable = 0
    for i in range(n - 1):
        for j in range(i + 1, n):
            if times[i] < times[j] and events[i]:
                early, late = i, j
            elif times[j] < times[i] and events[j]:
                early, late = j, i
            else:
                continue
            comparable += 1
            if scores[early] > scores[late]:
                concordant += 1.0
            elif scores[early] == scores[late]:
                concordant += 0.5
    return concordant, comparable
