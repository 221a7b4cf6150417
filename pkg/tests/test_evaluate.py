"""Recovery metrics, fold plans, and the cross-validation harness."""

import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from survcluster import (
    InvalidPlanError,
    NetworkSpec,
    NoEventsError,
    TrainConfig,
    UndefinedAUCError,
    UndefinedRowError,
    UnsupportedKError,
    confusion_matrix,
    init_params,
    make_fold_plan,
    match_clusters,
    permutation_importance,
    roc_auc_ovr,
    run_cv_experiment,
)
from survcluster.evaluate import (
    apply_matching_labels,
    apply_matching_probs,
    cluster_risk_scores,
    fit_standardizer,
    predicted_cluster_logrank_p,
    restricted_mean_survival,
)

from conftest import random_survival, three_group_survival


def oracle_trapezoid_auc(scores, positive):
    """AUC by explicit trapezoidal integration of the ROC curve."""
    thresholds = np.unique(scores)[::-1]
    pts = [(0.0, 0.0)]
    n_pos = positive.sum()
    n_neg = (~positive).sum()
    for thr in thresholds:
        called = scores >= thr
        pts.append(((called & ~positive).sum() / n_neg, (called & positive).sum() / n_pos))
    pts.append((1.0, 1.0))
    area = 0.0
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


class TestMatchClusters:
    def test_identity_when_equal(self):
        truth = np.array([0, 1, 2, 0, 1, 2])
        assert match_clusters(truth, truth, 3) == (0, 1, 2)

    def test_cyclic_shift_recovers_inverse(self):
        truth = np.array([0, 1, 2] * 5)
        pred = (truth + 1) % 3
        perm = match_clusters(pred, truth, 3)
        assert perm == (2, 0, 1)
        assert np.array_equal(apply_matching_labels(pred, perm), truth)

    def test_matches_exhaustive_oracle(self, rng):
        pred = rng.integers(0, 3, 30)
        truth = rng.integers(0, 3, 30)
        perm = match_clusters(pred, truth, 3)
        best = max(
            itertools.permutations(range(3)),
            key=lambda p: np.sum(np.asarray(p)[pred] == truth),
        )
        assert np.sum(np.asarray(perm)[pred] == truth) == np.sum(np.asarray(best)[pred] == truth)

    def test_no_transposition_improves_agreement(self, rng):
        pred = rng.integers(0, 4, 60)
        truth = rng.integers(0, 4, 60)
        perm = match_clusters(pred, truth, 4)
        base = np.sum(np.asarray(perm)[pred] == truth)
        for i in range(4):
            for j in range(i + 1, 4):
                swapped = list(perm)
                swapped[i], swapped[j] = swapped[j], swapped[i]
                assert np.sum(np.asarray(swapped)[pred] == truth) <= base

    def test_large_k_rejected(self):
        with pytest.raises(UnsupportedKError):
            match_clusters([0], [0], 9)


class TestRocAuc:
    def test_perfect_separation(self):
        probs = np.array([[0.9, 0.1], [0.8, 0.2], [0.2, 0.8], [0.1, 0.9]])
        truth = np.array([0, 0, 1, 1])
        assert_allclose(roc_auc_ovr(probs, truth), [1.0, 1.0])

    def test_constant_scores_give_half(self):
        probs = np.full((10, 2), 0.5)
        truth = np.array([0, 1] * 5)
        assert_allclose(roc_auc_ovr(probs, truth), [0.5, 0.5])

    def test_matches_trapezoid_oracle_ten_points(self):
        scores = np.array([0.1, 0.4, 0.35, 0.8, 0.65, 0.7, 0.2, 0.9, 0.5, 0.3])
        truth = np.array([0, 1, 0, 1, 1, 0, 0, 1, 1, 0])
        probs = np.column_stack([1.0 - scores, scores])
        auc = roc_auc_ovr(probs, truth)
        assert auc[1] == pytest.approx(oracle_trapezoid_auc(scores, truth == 1), abs=1e-12)
        assert auc[0] == pytest.approx(oracle_trapezoid_auc(1.0 - scores, truth == 0), abs=1e-12)

    def test_ties_handled_like_trapezoid(self, rng):
        scores = rng.integers(0, 4, 50).astype(float) / 3.0
        truth = rng.integers(0, 2, 50)
        probs = np.column_stack([1.0 - scores, scores])
        auc = roc_auc_ovr(probs, truth)
        assert auc[1] == pytest.approx(oracle_trapezoid_auc(scores, truth == 1), abs=1e-12)

    def test_monotone_transform_invariance(self, rng):
        scores = rng.random(40)
        truth = rng.integers(0, 2, 40)
        base = roc_auc_ovr(np.column_stack([1 - scores, scores]), truth)
        warped = np.exp(3.0 * scores)
        warped_probs = np.column_stack([warped.max() * 1.01 - warped, warped])
        warped_probs /= warped_probs.sum(axis=1, keepdims=True)
        again = roc_auc_ovr(warped_probs, truth)
        assert again[1] == pytest.approx(base[1], abs=1e-12)

    def test_single_class_rejected(self):
        with pytest.raises(UndefinedAUCError):
            roc_auc_ovr(np.full((4, 2), 0.5), np.zeros(4, dtype=int))


class TestConfusionMatrix:
    def test_identity_when_equal(self):
        truth = np.array([0, 1, 2, 0, 1, 2])
        assert_allclose(confusion_matrix(truth, truth, 3), np.eye(3))

    def test_constant_prediction_fills_first_column(self):
        truth = np.array([0, 1, 2, 1])
        m = confusion_matrix(np.zeros(4, dtype=int), truth, 3)
        assert_allclose(m[:, 0], 1.0)

    def test_hand_counts_twelve_points(self):
        truth = np.array([0] * 4 + [1] * 4 + [2] * 4)
        pred = np.array([0, 0, 1, 2, 1, 1, 1, 0, 2, 2, 0, 2])
        m = confusion_matrix(pred, truth, 3)
        assert_allclose(m[0], [0.5, 0.25, 0.25])
        assert_allclose(m[1], [0.25, 0.75, 0.0])
        assert_allclose(m[2], [0.25, 0.0, 0.75])

    def test_rows_sum_to_one(self, rng):
        truth = rng.integers(0, 3, 60)
        pred = rng.integers(0, 3, 60)
        m = confusion_matrix(pred, truth, 3)
        assert_allclose(m.sum(axis=1), 1.0, atol=1e-9)

    def test_empty_truth_class_rejected(self):
        with pytest.raises(UndefinedRowError):
            confusion_matrix(np.array([0, 1]), np.array([0, 0]), 2)


class TestFoldPlan:
    def test_partition_with_balanced_sizes(self):
        plan = make_fold_plan(23, n_folds=5, seed=1)
        lengths = [len(f) for f in plan.folds]
        assert sum(lengths) == 23
        assert max(lengths) - min(lengths) <= 1
        assert np.array_equal(np.sort(np.concatenate(plan.folds)), np.arange(23))

    def test_single_fold_rejected(self):
        with pytest.raises(InvalidPlanError):
            make_fold_plan(10, n_folds=1, seed=0)

    def test_more_folds_than_subjects_rejected(self):
        with pytest.raises(InvalidPlanError):
            make_fold_plan(3, n_folds=5, seed=0)


class TestRiskScores:
    def test_restricted_mean_flat_curve(self):
        assert restricted_mean_survival(np.array([2.0, 4.0]), np.zeros(2, bool)) == 4.0

    def test_risky_cluster_scores_higher(self, rng):
        truth = rng.integers(0, 2, 400)
        times, events = three_group_survival(truth * 2, seed=13)  # short vs long groups
        probs = np.zeros((400, 2))
        probs[np.arange(400), truth] = 0.9
        probs[np.arange(400), 1 - truth] = 0.1
        scores = cluster_risk_scores(probs, times, events)
        assert scores[truth == 0].mean() > scores[truth == 1].mean()

    def test_degenerate_single_cluster_p_value(self, rng):
        times, events = random_survival(rng, 20)
        assert predicted_cluster_logrank_p(np.zeros(20, int), times, events) == 1.0


class TestCVExperiment:
    def _cohort(self, rng, n=240):
        truth = rng.integers(0, 3, n)
        x = np.zeros((n, 3))
        x[np.arange(n), truth] = 2.0
        x += 0.6 * rng.standard_normal((n, 3))
        times, events = three_group_survival(truth, seed=21)
        return x, times, events, truth

    def test_deterministic_reports(self, rng):
        x, times, events, truth = self._cohort(rng)
        spec = NetworkSpec((3, 8, 3))
        cfg = TrainConfig(learning_rate=0.01, epochs=8, batch_size=32, seed=5)
        plan = make_fold_plan(len(times), 5, seed=5)
        a = run_cv_experiment(x, (times, events), truth, spec, cfg, fold_plan=plan)
        b = run_cv_experiment(x, (times, events), truth, spec, cfg, fold_plan=plan)
        assert a.pooled == b.pooled
        assert a.folds == b.folds

    def test_fold_reports_have_recovery_metrics(self, rng):
        x, times, events, truth = self._cohort(rng)
        spec = NetworkSpec((3, 8, 3))
        cfg = TrainConfig(learning_rate=0.01, epochs=8, batch_size=32, seed=3)
        result = run_cv_experiment(x, (times, events), truth, spec, cfg)
        assert len(result.folds) == 5
        for report in result.folds:
            assert report.auc_per_class is not None
            assert sorted(report.matching) == [0, 1, 2]
        assert result.pooled.n == len(times)

    def test_truthless_run_omits_recovery_metrics(self, rng):
        x, times, events, _ = self._cohort(rng)
        spec = NetworkSpec((3, 8, 3))
        cfg = TrainConfig(learning_rate=0.01, epochs=5, batch_size=32, seed=3)
        result = run_cv_experiment(x, (times, events), None, spec, cfg)
        assert result.pooled.auc_per_class is None
        assert result.pooled.hard_logrank_p <= 1.0
        assert 0.0 <= result.pooled.c_index <= 1.0

    def test_standardization_uses_train_folds_only(self, rng):
        # Poison one fold with enormous values: if scaling leaked from the
        # test fold, the training features would no longer be standardized.
        x, times, events, truth = self._cohort(rng)
        plan = make_fold_plan(len(times), 4, seed=2)
        poisoned = x.copy()
        poisoned[plan.folds[0]] += 1e6
        for f, fold_idx in enumerate(plan.folds):
            mask = np.zeros(len(times), bool)
            mask[fold_idx] = True
            mean, _ = fit_standardizer(poisoned[~mask])
            if f == 0:
                assert np.abs(mean).max() < 10.0
            else:
                assert np.abs(mean).max() > 1e4

    def test_train_test_disjoint_by_construction(self):
        plan = make_fold_plan(50, 5, seed=9)
        for fold in plan.folds:
            rest = np.setdiff1d(np.arange(50), fold)
            assert np.intersect1d(fold, rest).size == 0

    def test_event_free_test_fold_raises_named_error(self, rng):
        x = rng.standard_normal((40, 2))
        times = np.linspace(1, 40, 40)
        events = np.ones(40, bool)
        events[:8] = False  # fold 0 of the unshuffled plan is all censored
        plan = make_fold_plan(40, 5, seed=0)
        from dataclasses import replace

        plan = replace(plan, folds=tuple(np.arange(i * 8, (i + 1) * 8) for i in range(5)))
        spec = NetworkSpec((2, 2))
        cfg = TrainConfig(epochs=1, batch_size=8, seed=0)
        with pytest.raises(NoEventsError, match="fold 0"):
            run_cv_experiment(x, (times, events), None, spec, cfg, fold_plan=plan)


class TestPermutationImportance:
    def test_constant_feature_scores_zero(self, rng):
        times, events = random_survival(rng, 40)
        x = rng.standard_normal((40, 3))
        x[:, 1] = 7.0
        params = init_params(NetworkSpec((3, 4, 2), seed=1))
        scores = permutation_importance(params, x, (times, events), seed=3)
        assert scores[1] == pytest.approx(0.0, abs=1e-12)

    def test_deterministic(self, rng):
        times, events = random_survival(rng, 30)
        x = rng.standard_normal((30, 2))
        params = init_params(NetworkSpec((2, 3, 2), seed=4))
        a = permutation_importance(params, x, (times, events), seed=11)
        b = permutation_importance(params, x, (times, events), seed=11)
        assert np.array_equal(a, b)

    def test_duplicated_feature_dilutes_importance(self, rng):
        # An informative feature duplicated across two columns: each copy's
        # importance is below the importance of the single original column.
        truth = rng.integers(0, 2, 300)
        times, events = three_group_survival(truth * 2, seed=31)
        signal = truth + 0.1 * rng.standard_normal(300)
        noise = rng.standard_normal(300)

        x_single = np.column_stack([signal, noise])
        spec1 = NetworkSpec((2, 6, 2))
        cfg = TrainConfig(learning_rate=0.02, epochs=20, batch_size=50, seed=1)
        from survcluster import train

        params1, _ = train(spec1, (times, events), x_single, cfg)
        imp_single = permutation_importance(params1, x_single, (times, events), seed=5)

        x_dup = np.column_stack([signal, signal, noise])
        spec2 = NetworkSpec((3, 6, 2))
        params2, _ = train(spec2, (times, events), x_dup, cfg)
        imp_dup = permutation_importance(params2, x_dup, (times, events), seed=5)

        assert imp_dup[0] < imp_single[0]
        assert imp_dup[1] < imp_single[0]
