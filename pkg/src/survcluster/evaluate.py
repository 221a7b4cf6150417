"""Ground-truth recovery metrics and the cross-validation harness.

Cluster labels from an unsupervised model are arbitrary, so evaluation first
finds the accuracy-maximizing permutation onto the truth labels (exhaustive,
k <= 8). In cross-validation the permutation is fit on each fold's TRAINING
partition and applied to the withheld partition, keeping every reported
number a function of unseen subjects only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    InvalidInputError,
    InvalidPlanError,
    NoEventsError,
    UndefinedAUCError,
    UndefinedRowError,
    UnsupportedKError,
)
from .loss import LossConfig, partial_logrank_statistic
from .network import NetworkParams, NetworkSpec, forward
from .records import as_time_event_arrays
from .survival import kaplan_meier, multivariate_logrank_hard, concordance_index
from .training import TrainConfig, train

_MAX_EXHAUSTIVE_K = 8


@dataclass(frozen=True)
class FoldPlan:
    """Partition of [0, n) into shuffled folds with sizes differing by <= 1."""

    n_folds: int
    seed: int
    folds: tuple


def make_fold_plan(n: int, n_folds: int = 5, seed: int = 0) -> FoldPlan:
    if n_folds < 2:
        raise InvalidPlanError("cross-validation needs at least 2 folds")
    if n_folds > n:
        raise InvalidPlanError(f"cannot split {n} subjects into {n_folds} folds")
    perm = np.random.default_rng(seed).permutation(n)
    folds = tuple(np.sort(chunk) for chunk in np.array_split(perm, n_folds))
    return FoldPlan(n_folds=n_folds, seed=seed, folds=folds)


def match_clusters(pred_labels, truth_labels, k: int) -> tuple[int, ...]:
    """Permutation p (predicted -> truth) maximizing agreement.

    Exhaustive over k! candidates; ties break lexicographically. Apply as
    ``matched = perm[pred]``.
    """
    if k > _MAX_EXHAUSTIVE_K:
        raise UnsupportedKError(f"exhaustive matching supports k <= {_MAX_EXHAUSTIVE_K}")
    pred = np.asarray(pred_labels, dtype=np.int64)
    truth = np.asarray(truth_labels, dtype=np.int64)
    if pred.shape != truth.shape:
        raise InvalidInputError("pred and truth labels must have equal length")
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (pred, truth), 1)
    best_perm = None
    best_score = -1
    for perm in itertools.permutations(range(k)):
        score = sum(counts[g, perm[g]] for g in range(k))
        if score > best_score:
            best_score = score
            best_perm = perm
    return best_perm


def apply_matching_labels(pred_labels, perm) -> np.ndarray:
    lookup = np.asarray(perm, dtype=np.int64)
    return lookup[np.asarray(pred_labels, dtype=np.int64)]


def apply_matching_probs(probs, perm) -> np.ndarray:
    """Reorder probability columns so column g is the class matched to truth g."""
    probs = np.asarray(probs, dtype=np.float64)
    out = np.empty_like(probs)
    for g, target in enumerate(perm):
        out[:, target] = probs[:, g]
    return out


def _auc_binary(scores: np.ndarray, positive: np.ndarray) -> float:
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUCError("one-vs-rest split contains a single class")
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(scores.size, dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0  # mid-rank, 1-based
        i = j + 1
    rank_sum = ranks[positive].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def roc_auc_ovr(probs, truth_labels) -> np.ndarray:
    """One-vs-rest AUC per class from matched probability columns.

    Mann-Whitney rank form with mid-rank tie correction (equals trapezoidal
    integration of the ROC curve).
    """
    probs = np.asarray(probs, dtype=np.float64)
    truth = np.asarray(truth_labels, dtype=np.int64)
    if probs.ndim != 2 or probs.shape[0] != truth.size:
        raise InvalidInputError("probs must be (n, k) aligned with truth labels")
    return np.array(
        [_auc_binary(probs[:, g], truth == g) for g in range(probs.shape[1])]
    )


def confusion_matrix(pred_labels, truth_labels, k: int) -> np.ndarray:
    """Row-stochastic confusion matrix: rows = truth, columns = prediction."""
    pred = np.asarray(pred_labels, dtype=np.int64)
    truth = np.asarray(truth_labels, dtype=np.int64)
    if pred.shape != truth.shape:
        raise InvalidInputError("pred and truth labels must have equal length")
    counts = np.zeros((k, k), dtype=np.float64)
    np.add.at(counts, (truth, pred), 1.0)
    row_sums = counts.sum(axis=1)
    empty = np.where(row_sums == 0)[0]
    if empty.size:
        raise UndefinedRowError(f"truth class {int(empty[0])} has no members")
    return counts / row_sums[:, None]


def restricted_mean_survival(times, events) -> float:
    """Area under the KM curve up to the largest observed time.

    Always defined (unlike the median); with no events the curve stays at 1.
    """
    times_arr, events_arr = as_time_event_arrays((times, events))
    horizon = float(times_arr.max())
    if not events_arr.any():
        return horizon
    curve = kaplan_meier((times_arr, events_arr))
    knots = np.concatenate([[0.0], curve.times, [horizon]])
    heights = np.concatenate([[1.0], curve.survival])
    widths = np.diff(knots)
    span = min(heights.size, widths.size)
    return float(np.sum(heights[:span] * widths[:span]))


def cluster_risk_scores(probs, times, events) -> np.ndarray:
    """Per-subject risk: probability-weighted negative restricted mean survival.

    Clusters with shorter restricted mean survival score higher (= riskier);
    empty clusters contribute the cohort-level value.
    """
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.argmax(probs, axis=1)
    overall = restricted_mean_survival(times, events)
    cluster_rmst = np.full(probs.shape[1], overall)
    for g in range(probs.shape[1]):
        mask = labels == g
        if mask.any():
            cluster_rmst[g] = restricted_mean_survival(times[mask], events[mask])
    return -(probs @ cluster_rmst)


def predicted_cluster_logrank_p(labels, times, events) -> float:
    """Logrank p-value across non-empty predicted clusters; 1.0 if fewer than 2."""
    labels = np.asarray(labels, dtype=np.int64)
    present = np.unique(labels)
    if present.size < 2:
        return 1.0
    compact = np.searchsorted(present, labels)
    _, p_value = multivariate_logrank_hard((times, events), compact, int(present.size))
    return p_value


@dataclass(frozen=True)
class RecoveryReport:
    """Metrics for one evaluation slice; recovery fields are None without truth."""

    n: int
    hard_logrank_p: float
    c_index: float
    matching: tuple | None = None
    auc_per_class: tuple | None = None
    confusion: tuple | None = None

    def to_dict(self) -> dict:
        out = {"n": self.n, "hard_logrank_p": self.hard_logrank_p, "c_index": self.c_index}
        if self.matching is not None:
            out["matching"] = list(self.matching)
            out["auc_per_class"] = list(self.auc_per_class)
            out["confusion"] = [list(row) for row in self.confusion]
        return out


@dataclass(frozen=True)
class CVResult:
    """Per-fold and pooled reports plus the aligned pooled predictions."""

    folds: tuple
    pooled: RecoveryReport
    pooled_probs: np.ndarray
    pooled_labels: np.ndarray
    k: int


def fit_standardizer(features: np.ndarray):
    """Column means and scales; constant columns get scale 1 (stay centered)."""
    mean = features.mean(axis=0)
    scale = features.std(axis=0)
    scale = np.where(scale > 0.0, scale, 1.0)
    return mean, scale


def apply_standardizer(features: np.ndarray, mean: np.ndarray, scale: np.ndarray) -> np.ndarray:
    return (features - mean) / scale


def _slice_report(probs, labels, times, events, truth, k) -> RecoveryReport:
    p_value = predicted_cluster_logrank_p(labels, times, events)
    c_index = concordance_index(cluster_risk_scores(probs, times, events), (times, events))
    if truth is None:
        return RecoveryReport(n=labels.size, hard_logrank_p=p_value, c_index=c_index)
    aucs = roc_auc_ovr(probs, truth)
    confusion = confusion_matrix(labels, truth, k)
    return RecoveryReport(
        n=labels.size,
        hard_logrank_p=p_value,
        c_index=c_index,
        matching=tuple(range(k)),
        auc_per_class=tuple(float(a) for a in aucs),
        confusion=tuple(tuple(row) for row in confusion),
    )


def run_cv_experiment(
    features,
    records,
    truth,
    spec: NetworkSpec,
    train_cfg: TrainConfig,
    loss_cfg: LossConfig | None = None,
    fold_plan: FoldPlan | None = None,
    standardize: bool = True,
) -> CVResult:
    """Train per fold, predict on the withheld fold, report per-fold and pooled.

    Standardization statistics (when enabled) come from the training folds
    only. With truth labels available, each fold's cluster-to-truth matching
    is fit on its training partition and applied to the withheld partition;
    pooled metrics concatenate the aligned withheld predictions.
    """
    x = np.asarray(features, dtype=np.float64)
    times, events = as_time_event_arrays(records)
    n = times.size
    if x.ndim != 2 or x.shape[0] != n:
        raise InvalidInputError("features must be a 2-D matrix aligned with records")
    truth_arr = None
    if truth is not None:
        truth_arr = np.asarray(truth, dtype=np.int64)
        if truth_arr.shape != (n,):
            raise InvalidInputError("truth labels must align one-to-one with records")
    if fold_plan is None:
        fold_plan = make_fold_plan(n, seed=train_cfg.seed)
    k = spec.n_groups
    fold_seeds = [
        int(child.generate_state(1)[0])
        for child in np.random.SeedSequence(train_cfg.seed).spawn(fold_plan.n_folds)
    ]

    pooled_probs = np.zeros((n, k))
    pooled_labels = np.zeros(n, dtype=np.int64)
    fold_reports = []
    for f, test_idx in enumerate(fold_plan.folds):
        mask = np.zeros(n, dtype=bool)
        mask[test_idx] = True
        train_idx = np.where(~mask)[0]
        if not events[train_idx].any():
            raise NoEventsError(f"fold {f}: training partition has no events")
        if not events[test_idx].any():
            raise NoEventsError(f"fold {f}: withheld partition has no events")
        x_train, x_test = x[train_idx], x[test_idx]
        if standardize:
            mean, scale = fit_standardizer(x_train)
            x_train = apply_standardizer(x_train, mean, scale)
            x_test = apply_standardizer(x_test, mean, scale)
        fold_train_cfg = replace(train_cfg, seed=fold_seeds[f])
        fold_spec = spec if spec.seed is not None else replace(spec, seed=fold_seeds[f])
        params, _ = train(
            fold_spec,
            (times[train_idx], events[train_idx]),
            x_train,
            fold_train_cfg,
            loss_cfg,
        )
        activation = spec.hidden_activation
        probs_test = forward(params, x_test, activation).probs
        if truth_arr is not None:
            probs_train = forward(params, x_train, activation).probs
            perm = match_clusters(
                np.argmax(probs_train, axis=1), truth_arr[train_idx], k
            )
            probs_test = apply_matching_probs(probs_test, perm)
        else:
            perm = tuple(range(k))
        labels_test = np.argmax(probs_test, axis=1)
        pooled_probs[test_idx] = probs_test
        pooled_labels[test_idx] = labels_test
        fold_truth = truth_arr[test_idx] if truth_arr is not None else None
        report = _slice_report(
            probs_test, labels_test, times[test_idx], events[test_idx], fold_truth, k
        )
        if fold_truth is not None:
            report = replace(report, matching=tuple(int(p) for p in perm))
        fold_reports.append(report)

    pooled = _slice_report(pooled_probs, pooled_labels, times, events, truth_arr, k)
    return CVResult(
        folds=tuple(fold_reports),
        pooled=pooled,
        pooled_probs=pooled_probs,
        pooled_labels=pooled_labels,
        k=k,
    )


def permutation_importance(
    params: NetworkParams,
    features,
    records,
    metric=None,
    n_repeats: int = 10,
    seed: int = 0,
    activation: str = "relu",
) -> np.ndarray:
    """Mean metric degradation when each feature column is shuffled.

    The default metric is the soft logrank statistic of the model's forward
    probabilities (higher = more separated clusters). A feature that is
    constant across subjects scores exactly 0.
    """
    x = np.asarray(features, dtype=np.float64)
    times, events = as_time_event_arrays(records)
    if metric is None:
        cfg = LossConfig()

        def metric(p, feats, te):
            return partial_logrank_statistic(forward(p, feats, activation), te, cfg)

    baseline = metric(params, x, (times, events))
    rng = np.random.default_rng(seed)
    importances = np.zeros(x.shape[1])
    for col in range(x.shape[1]):
        drop = 0.0
        for _ in range(n_repeats):
            shuffled = x.copy()
            shuffled[:, col] = shuffled[rng.permutation(x.shape[0]), col]
            drop += baseline - metric(params, shuffled, (times, events))
        importances[col] = drop / n_repeats
    return importances
