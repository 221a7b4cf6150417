"""File artifacts: cohort/history/curve CSVs and canonical JSON.

All writes are atomic (temp file in the target directory, then rename).
Floats are serialized with ``repr``, the shortest exact round-trip form, so
identical inputs always produce byte-identical artifacts.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import DataError


def atomic_write_text(path, text: str) -> None:
    """Write-temp-then-rename so readers never observe a partial file."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays so json.dumps can emit them."""
    if isinstance(obj, dict):
        return {key: to_jsonable(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(val) for val in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def canonical_json(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> None:
    atomic_write_text(path, canonical_json(obj))


def config_hash(obj) -> str:
    """sha256 of the compact canonical JSON encoding of a config mapping."""
    compact = json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(compact.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CohortData:
    """Parsed cohort CSV: survival columns plus optional truth and features."""

    times: np.ndarray
    events: np.ndarray
    truth: np.ndarray | None
    features: np.ndarray | None
    feature_names: tuple[str, ...]


def write_cohort_csv(path, times, events, features=None, truth=None) -> None:
    """Columns: time,event[,truth][,feature_0..feature_{m-1}]."""
    times = np.asarray(times, dtype=np.float64)
    events = np.asarray(events).astype(bool)
    header = ["time", "event"]
    if truth is not None:
        truth = np.asarray(truth, dtype=np.int64)
        header.append("truth")
    if features is not None:
        features = np.asarray(features, dtype=np.float64)
        header.extend(f"feature_{i}" for i in range(features.shape[1]))
    lines = [",".join(header)]
    for i in range(times.size):
        row = [_fmt(times[i]), _fmt(events[i])]
        if truth is not None:
            row.append(_fmt(truth[i]))
        if features is not None:
            row.extend(_fmt(v) for v in features[i])
        lines.append(",".join(row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_cohort_csv(path) -> CohortData:
    path = os.fspath(path)
    if not os.path.exists(path):
        raise DataError(f"cohort file not found: {path}")
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"cohort file is empty: {path}") from None
        rows = list(reader)
    if header[:2] != ["time", "event"]:
        raise DataError(f"cohort header must start with time,event (got {header[:2]})")
    has_truth = len(header) > 2 and header[2] == "truth"
    feature_names = tuple(name for name in header if name.startswith("feature_"))
    expected = 2 + int(has_truth) + len(feature_names)
    if len(header) != expected:
        raise DataError(f"unrecognized cohort columns: {header}")
    if not rows:
        raise DataError(f"cohort file has no data rows: {path}")
    try:
        data = np.array(rows, dtype=np.float64)
    except ValueError as exc:
        raise DataError(f"malformed cohort row in {path}: {exc}") from None
    if data.shape[1] != expected:
        raise DataError(f"cohort rows do not match the header width in {path}")
    times = data[:, 0]
    events = data[:, 1].astype(bool)
    truth = data[:, 2].astype(np.int64) if has_truth else None
    features = data[:, 2 + int(has_truth) :] if feature_names else None
    return CohortData(times, events, truth, features, feature_names)


def write_history_csv(path, history) -> None:
    """Columns: epoch,objective,statistic,penalty."""
    lines = ["epoch,objective,statistic,penalty"]
    for rec in history:
        lines.append(
            f"{rec.epoch},{_fmt(rec.objective)},{_fmt(rec.statistic)},{_fmt(rec.penalty)}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_km_csv(path, curves) -> None:
    """Per-cluster step curves; ``curves`` maps label -> StepSurvivalCurve."""
    lines = ["cluster,time,survival,ci_lower,ci_upper"]
    for label in sorted(curves):
        curve = curves[label]
        for t, s, lo, hi in zip(curve.times, curve.survival, curve.ci_lower, curve.ci_upper):
            lines.append(f"{int(label)},{_fmt(t)},{_fmt(s)},{_fmt(lo)},{_fmt(hi)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_km_csv(path):
    """Inverse of :func:`write_km_csv`: label -> (times, survival, lower, upper)."""
    path = os.fspath(path)
    if not os.path.exists(path):
        raise DataError(f"curve file not found: {path}")
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["cluster", "time", "survival", "ci_lower", "ci_upper"]:
            raise DataError(f"unexpected curve header in {path}: {header}")
        rows = list(reader)
    if not rows:
        raise DataError(f"curve file has no data rows: {path}")
    data = np.array(rows, dtype=np.float64)
    curves = {}
    for label in np.unique(data[:, 0]).astype(int):
        block = data[data[:, 0] == label]
        curves[int(label)] = (block[:, 1], block[:, 2], block[:, 3], block[:, 4])
    return curves

