"""Survival observations and conversion to packed numpy arrays."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class SurvivalRecord:
    """One subject's follow-up: observed time and whether the event was seen.

    ``event=False`` means the subject was right-censored at ``time``.
    """

    time: float
    event: bool

    def __post_init__(self):
        t = float(self.time)
        if not np.isfinite(t) or t < 0.0:
            raise InvalidInputError(f"time must be finite and >= 0, got {self.time!r}")


def make_records(times: Iterable[float], events: Iterable[bool]) -> list[SurvivalRecord]:
    """Build a record list from parallel time/event sequences."""
    return [SurvivalRecord(float(t), bool(e)) for t, e in zip(times, events, strict=True)]


def as_time_event_arrays(records) -> tuple[np.ndarray, np.ndarray]:
    """Coerce survival input to ``(times, events)`` float64/bool arrays.

    Accepts either a non-empty sequence of :class:`SurvivalRecord` or a
    ``(times, events)`` pair of equal-length array-likes.
    """
    if isinstance(records, tuple) and len(records) == 2:
        times = np.asarray(records[0], dtype=np.float64)
        events = np.asarray(records[1])
        if events.dtype != np.bool_:
            events = events.astype(bool)
    else:
        if not isinstance(records, Sequence):
            records = list(records)
        if len(records) > 0 and not isinstance(records[0], SurvivalRecord):
            raise InvalidInputError(
                "records must be SurvivalRecord instances or a (times, events) pair"
            )
        times = np.array([r.time for r in records], dtype=np.float64)
        events = np.array([r.event for r in records], dtype=bool)
    if times.ndim != 1 or events.ndim != 1 or times.shape != events.shape:
        raise InvalidInputError("times and events must be 1-D and of equal length")
    if times.size == 0:
        raise InvalidInputError("survival input must be non-empty")
    if not np.all(np.isfinite(times)) or np.any(times < 0.0):
        raise InvalidInputError("all times must be finite and >= 0")
    return times, events
