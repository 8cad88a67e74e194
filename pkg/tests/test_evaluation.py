import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.stats import mannwhitneyu

from models.errors import EvaluationError
from models.group import Label
from prediction.evaluation import (
    agreement_curve,
    cross_validate,
    evaluate,
    evaluate_scores,
    fold_seed,
    roc_auc,
    stratified_folds,
)
from prediction.features import FEATURE_NAMES, FeatureTable, ScoreResult
from prediction.forest import ForestConfig


def test_auc_perfect_and_inverted():
    assert roc_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]).auc == 1.0
    assert roc_auc([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0]).auc == 0.0


def test_auc_six_point_fixture():
    # positive-over-negative pairs: 0.9 beats 3, 0.7 beats 2, 0.6 beats 2 -> 7 of 9
    roc = roc_auc([0.9, 0.8, 0.7, 0.6, 0.5, 0.4], [1, 0, 1, 1, 0, 0])
    assert roc.auc == pytest.approx(7 / 9)
    assert roc.fpr[0] == 0.0 and roc.tpr[0] == 0.0
    assert roc.fpr[-1] == 1.0 and roc.tpr[-1] == 1.0


def test_auc_all_tied_is_one_half():
    assert roc_auc([0.5] * 6, [1, 0, 1, 0, 1, 0]).auc == pytest.approx(0.5)


def test_auc_needs_both_classes():
    with pytest.raises(EvaluationError):
        roc_auc([0.1, 0.2], [1, 1])


@settings(max_examples=100, deadline=None)
@given(
    st.lists(
        st.tuples(st.floats(-100, 100, allow_nan=False), st.integers(0, 1)),
        min_size=2,
        max_size=50,
    )
)
def test_auc_equals_normalized_mann_whitney_u(points):
    values = [v for v, _ in points]
    y = [c for _, c in points]
    assume(0 < sum(y) < len(y))
    positives = [v for v, c in points if c == 1]
    negatives = [v for v, c in points if c == 0]
    u = mannwhitneyu(positives, negatives, alternative="two-sided").statistic
    assert roc_auc(values, y).auc == pytest.approx(u / (len(positives) * len(negatives)), abs=1e-12)


def test_leave_one_out_folds():
    y = np.array([1, 0] * 5)
    folds = stratified_folds(y, 10, seed=3)
    assert sorted(folds.tolist()) == list(range(10))


def test_stratified_folds_balance_classes():
    y = np.array([1] * 6 + [0] * 6)
    folds = stratified_folds(y, 3, seed=8)
    for fold in range(3):
        assert int(np.sum((folds == fold) & (y == 1))) == 2
        assert int(np.sum((folds == fold) & (y == 0))) == 2


def test_fold_count_bounds():
    y = np.array([1, 0, 1, 0])
    with pytest.raises(EvaluationError):
        stratified_folds(y, 1, seed=0)
    with pytest.raises(EvaluationError):
        stratified_folds(y, 5, seed=0)


def test_fold_seed_is_stable_and_distinct():
    assert fold_seed(42, 0) == fold_seed(42, 0)
    assert len({fold_seed(42, f) for f in range(10)}) == 10


def _separable(n: int = 24) -> tuple[FeatureTable, np.ndarray]:
    rng = np.random.default_rng(1)
    y = np.array([1, 0] * (n // 2))
    matrix = np.column_stack([y * 4.0 + rng.normal(0, 0.5, n), rng.normal(size=n)])
    return FeatureTable([f"g{i:02d}" for i in range(n)], ("signal", "noise"), matrix), y


def test_cross_validation_on_separable_data():
    table, y = _separable()
    report = cross_validate(table, y, seed=5, k=4, config=ForestConfig(trees=20), threads=1)
    assert report.accuracy >= 0.9
    assert report.auc >= 0.9
    assert len(report.folds) == 4
    assert sum(f.size for f in report.folds) == len(y)


def test_cross_validation_pooled_accuracy_matches_folds():
    table, y = _separable()
    report = cross_validate(table, y, seed=2, k=3, config=ForestConfig(trees=10), threads=1)
    pooled = sum(f.accuracy * f.size for f in report.folds) / len(y)
    assert report.accuracy == pytest.approx(pooled)


def test_cross_validation_is_deterministic_across_threads():
    table, y = _separable()
    one = cross_validate(table, y, seed=9, k=4, config=ForestConfig(trees=8), threads=1)
    many = cross_validate(table, y, seed=9, k=4, config=ForestConfig(trees=8), threads=4)
    assert one.to_dict() == many.to_dict()


def test_cross_validation_needs_two_groups_per_class():
    table, _ = _separable(4)
    with pytest.raises(EvaluationError):
        cross_validate(table, np.array([1, 0, 0, 0]), seed=1, k=2)


@pytest.mark.parametrize("seed", range(4))
def test_random_labels_give_chance_auc(seed):
    rng = np.random.default_rng(seed)
    n = 200
    table = FeatureTable([f"g{i:03d}" for i in range(n)], ("a", "b"), rng.normal(size=(n, 2)))
    y = rng.integers(0, 2, size=n)
    report = cross_validate(table, y, seed=seed, k=5, config=ForestConfig(trees=30), threads=2)
    assert 0.35 <= report.auc <= 0.65


def _scores(values: dict[str, float]) -> list[ScoreResult]:
    return [ScoreResult(gid, v, {}) for gid, v in sorted(values.items())]


def test_evaluate_scores_threshold_accuracy():
    scores = _scores({"a": 1.0, "b": 0.5, "c": -0.2, "d": -1.0, "e": 3.0})
    labels = {"a": Label.SOCIAL, "b": Label.TOPICAL, "c": Label.TOPICAL, "d": Label.TOPICAL, "e": Label.UNKNOWN}
    report = evaluate_scores(scores, labels, threshold=0.0)
    assert report.group_ids == ["a", "b", "c", "d"]
    assert report.accuracy == pytest.approx(0.75)
    assert report.auc == 1.0


def test_agreement_curve_flags_empty_bins():
    scores = _scores({"a": 0.0, "b": 0.05, "c": 1.0})
    labels = {"a": Label.TOPICAL, "b": Label.TOPICAL, "c": Label.SOCIAL}
    perfect = {"score": dict(labels)}
    curve = agreement_curve(scores, perfect, labels, bins=10)

    assert [row["bin"] for row in curve.rows] == [0, 9]
    assert curve.empty_bins == list(range(1, 9))
    assert all(row["accuracy"]["score"] == 1.0 for row in curve.rows)
    assert curve.rows[1]["social_fraction"] == 1.0


def test_agreement_curve_second_labeler():
    scores = _scores({"a": 0.0, "b": 1.0})
    labels = {"a": Label.TOPICAL, "b": Label.SOCIAL}
    second = {"a": Label.SOCIAL, "b": Label.SOCIAL}
    curve = agreement_curve(scores, {"score": labels}, labels, bins=1, second_labels=second)
    assert curve.rows[0]["labeler_agreement"] == 0.5


def _feature_table(n: int, seed: int) -> tuple[FeatureTable, dict[str, Label]]:
    rng = np.random.default_rng(seed)
    y = np.array([1, 0] * (n // 2))
    matrix = rng.normal(size=(n, len(FEATURE_NAMES)))
    for name in ("comment_t", "comment_u", "comment_h"):
        matrix[:, FEATURE_NAMES.index(name)] += 3.0 * y
    ids = [f"g{i:03d}" for i in range(n)]
    labels = {gid: Label.SOCIAL if c else Label.TOPICAL for gid, c in zip(ids, y)}
    return FeatureTable(ids, FEATURE_NAMES, matrix), labels


def test_evaluate_compares_three_methods():
    table, labels = _feature_table(80, seed=2)
    evaluation = evaluate(table, labels, seed=1, k=4, top_k=3, config=ForestConfig(trees=15), threads=1)

    assert list(evaluation.summary()) == ["score", "classifier", "classifier_chi2_top3"]
    assert {r.feature for r in evaluation.ranking[:3]} == {"comment_t", "comment_u", "comment_h"}
    restricted = evaluation.reports[2]
    assert set(restricted.features) == {"comment_t", "comment_u", "comment_h"}
    report = evaluation.to_dict()
    assert set(report) == {"seed", "summary", "methods", "feature_ranking", "agreement_curve"}


def test_evaluate_without_labels_fails():
    table, _ = _feature_table(10, seed=1)
    with pytest.raises(EvaluationError):
        evaluate(table, {}, seed=1)
