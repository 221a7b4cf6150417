"""Synthetic cohort generation.

Subjects are drawn from a weighted mixture of Gaussian feature groups; each
group has its own Weibull event-time law. Observation combines random
right-censoring (exponential) with an administrative horizon. A helper maps
handwritten-digit labels 1-9 onto three risk groups via a seeded permutation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidSpecError
from .records import make_records

_PSD_TOL = 1e-10


@dataclass(frozen=True)
class WeibullGroup:
    """Weibull event-time law: shape rho > 0, scale lam > 0."""

    shape: float
    scale: float

    def __post_init__(self):
        if not (math.isfinite(self.shape) and self.shape > 0.0):
            raise InvalidSpecError(f"Weibull shape must be positive, got {self.shape!r}")
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise InvalidSpecError(f"Weibull scale must be positive, got {self.scale!r}")

    def median(self) -> float:
        return self.scale * math.log(2.0) ** (1.0 / self.shape)


# Three-group preset: short / intermediate / long survival, with exponential
# censoring (mean 10000) and an administrative horizon at 4000 time units.
THREE_GROUP_WEIBULL = (
    WeibullGroup(shape=0.539, scale=3068.812),
    WeibullGroup(shape=0.898, scale=5114.687),
    WeibullGroup(shape=1.257, scale=7160.562),
)
DEFAULT_CENSOR_SCALE = 10_000.0
DEFAULT_ADMIN_HORIZON = 4_000.0

# Default feature mixture: unit-covariance 3-D Gaussians with means on an
# equilateral triangle of side 3.0, giving visible but recoverable overlap.
_TRIANGLE_SIDE = 3.0
DEFAULT_GROUP_MEANS = (
    (0.0, 0.0, 0.0),
    (_TRIANGLE_SIDE, 0.0, 0.0),
    (_TRIANGLE_SIDE / 2.0, _TRIANGLE_SIDE * math.sqrt(3.0) / 2.0, 0.0),
)


@dataclass(frozen=True)
class GroupSpec:
    """One mixture component: survival law, feature Gaussian, and weight."""

    weibull: WeibullGroup
    mean: tuple
    cov: tuple
    weight: float

    def mean_array(self) -> np.ndarray:
        return np.asarray(self.mean, dtype=np.float64)

    def cov_array(self) -> np.ndarray:
        return np.asarray(self.cov, dtype=np.float64)


@dataclass(frozen=True)
class CohortSpec:
    """Generative description of a synthetic cohort."""

    groups: tuple
    n: int
    seed: int
    censor_scale: float = DEFAULT_CENSOR_SCALE
    admin_horizon: float = DEFAULT_ADMIN_HORIZON

    def __post_init__(self):
        if self.n < 1:
            raise InvalidSpecError("cohort size must be >= 1")
        if not self.groups:
            raise InvalidSpecError("at least one group is required")
        if self.censor_scale <= 0.0 or self.admin_horizon <= 0.0:
            raise InvalidSpecError("censor_scale and admin_horizon must be positive")
        weights = np.array([g.weight for g in self.groups], dtype=np.float64)
        if np.any(weights < 0.0) or abs(weights.sum() - 1.0) > 1e-9:
            raise InvalidSpecError("group weights must be non-negative and sum to 1")
        width = self.groups[0].mean_array().size
        for g in self.groups:
            if g.mean_array().shape != (width,) or g.cov_array().shape != (width, width):
                raise InvalidSpecError("group feature means/covariances must share one width")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "censor_scale": self.censor_scale,
            "admin_horizon": self.admin_horizon,
            "groups": [
                {
                    "weibull_shape": g.weibull.shape,
                    "weibull_scale": g.weibull.scale,
                    "mean": list(g.mean),
                    "cov": [list(row) for row in g.cov],
                    "weight": g.weight,
                }
                for g in self.groups
            ],
        }


def three_group_cohort_spec(n: int, seed: int, triangle_side: float | None = None) -> CohortSpec:
    """Preset three-group cohort; ``triangle_side`` rescales the mean spacing."""
    means = DEFAULT_GROUP_MEANS
    if triangle_side is not None:
        scale = triangle_side / _TRIANGLE_SIDE
        means = tuple(tuple(v * scale for v in m) for m in means)
    eye = tuple(tuple(float(i == j) for j in range(3)) for i in range(3))
    groups = tuple(
        GroupSpec(w, m, eye, 1.0 / 3.0) for w, m in zip(THREE_GROUP_WEIBULL, means)
    )
    return CohortSpec(groups=groups, n=n, seed=seed)


def weibull_sample(group: WeibullGroup, u):
    """Inverse-transform sample T = scale * (-ln(1 - u))^(1/shape) for u in (0, 1)."""
    u_arr = np.asarray(u, dtype=np.float64)
    if np.any(u_arr <= 0.0) or np.any(u_arr >= 1.0):
        raise InvalidInputError("u must lie strictly inside (0, 1)")
    out = group.scale * (-np.log1p(-u_arr)) ** (1.0 / group.shape)
    return float(out) if np.isscalar(u) or u_arr.ndim == 0 else out


def _gaussian_factor(cov: np.ndarray) -> np.ndarray:
    # Symmetric PSD factor via the eigendecomposition, so semidefinite
    # covariances are accepted (Cholesky would reject them).
    sym = 0.5 * (cov + cov.T)
    if not np.allclose(cov, cov.T, atol=1e-8):
        raise InvalidSpecError("feature covariance must be symmetric")
    vals, vecs = np.linalg.eigh(sym)
    if vals.min() < -_PSD_TOL * max(1.0, abs(vals.max())):
        raise InvalidSpecError("feature covariance must be positive semi-definite")
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def simulate_survival(truth, weibull_groups, censor_scale, admin_horizon, rng):
    """Observed (times, events) for known group labels.

    Event times come from each group's Weibull; censoring is the minimum of an
    exponential draw and the administrative horizon. The event flag is true
    only when the event time is strictly smallest (a tie counts as censored).
    """
    truth = np.asarray(truth, dtype=np.int64)
    n = truth.size
    u = rng.random(n)
    u = np.clip(u, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
    event_times = np.empty(n)
    for g, wb in enumerate(weibull_groups):
        mask = truth == g
        if mask.any():
            event_times[mask] = weibull_sample(wb, u[mask])
    censor_times = np.minimum(rng.exponential(censor_scale, size=n), admin_horizon)
    observed = np.minimum(event_times, censor_times)
    events = event_times < censor_times
    return observed, events


def generate_cohort(spec: CohortSpec):
    """Draw a full cohort: ``(features, records, truth)``, deterministic per seed."""
    rng = np.random.default_rng(spec.seed)
    k = len(spec.groups)
    weights = np.array([g.weight for g in spec.groups], dtype=np.float64)
    truth = rng.choice(k, size=spec.n, p=weights)
    width = spec.groups[0].mean_array().size
    z = rng.standard_normal((spec.n, width))
    features = np.empty((spec.n, width))
    for g, group in enumerate(spec.groups):
        mask = truth == g
        if mask.any():
            factor = _gaussian_factor(group.cov_array())
            features[mask] = group.mean_array() + z[mask] @ factor.T
    times, events = simulate_survival(
        truth,
        [g.weibull for g in spec.groups],
        spec.censor_scale,
        spec.admin_horizon,
        rng,
    )
    return features, make_records(times, events), truth


def digit_group_map(seed: int | None = None, permutation=None) -> dict[int, int]:
    """Partition digits 1-9 into three blocks of three.

    A seeded shuffle of (1..9) is split into consecutive triples; pass
    ``permutation`` explicitly to pin the layout (the identity permutation
    maps 1-3 to group 0, 4-6 to group 1, 7-9 to group 2).
    """
    if permutation is None:
        digits = np.arange(1, 10)
        if seed is not None:
            digits = np.random.default_rng(seed).permutation(digits)
    else:
        digits = np.asarray(permutation, dtype=np.int64)
        if sorted(digits.tolist()) != list(range(1, 10)):
            raise InvalidInputError("permutation must rearrange the digits 1..9")
    return {int(digit): pos // 3 for pos, digit in enumerate(digits)}


def digits_to_groups(labels, seed: int | None = None, permutation=None) -> np.ndarray:
    """Map digit labels 1-9 to group labels {0, 1, 2}; digit 0 is rejected."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise InvalidInputError("digit labels must be non-empty")
    if np.any(labels == 0):
        raise InvalidInputError("digit 0 is excluded; only digits 1-9 are mapped")
    if labels.min() < 1 or labels.max() > 9:
        raise InvalidInputError("digit labels must lie in 1..9")
    mapping = digit_group_map(seed=seed, permutation=permutation)
    lookup = np.zeros(10, dtype=np.int64)
    for digit, group in mapping.items():
        lookup[digit] = group
    return lookup[labels]
