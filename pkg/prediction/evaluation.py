"""ROC/AUC, stratified cross-validation and score-vs-classifier evaluation."""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from config.settings import AGREEMENT_BINS, CHI2_BINS, CV_FOLDS, SCORE_THRESHOLD, THREADS, TOP_K_FEATURES
from models.errors import EvaluationError
from models.group import Label
from prediction.features import FeatureTable, ScoreResult, labeled_rows, predict_by_threshold, score
from prediction.forest import ForestConfig, train
from prediction.selection import FeatureRank, chi_square_rank, top_features
from utils.parallel import parallel_map

logger = logging.getLogger(__name__)


@dataclass
class RocCurve:
    """ROC points from a descending threshold sweep, and the area under them."""

    fpr: list[float]
    tpr: list[float]
    thresholds: list[Optional[float]]
    auc: float

    def points(self) -> list[dict]:
        return [
            {"fpr": f, "tpr": t, "threshold": th} for f, t, th in zip(self.fpr, self.tpr, self.thresholds)
        ]


def roc_auc(values: Sequence[float], y: Sequence[int]) -> RocCurve:
    """ROC curve and trapezoidal AUC of scores against 0/1 targets (1 = social).

    Tied scores form a single threshold step, which makes the AUC equal to
    the Mann-Whitney U statistic over (positives x negatives).

    Args:
        values: Score or probability per group, higher = more social
        y: Targets

    Returns:
        RocCurve: Points from (0, 0) to (1, 1)

    Raises:
        EvaluationError: If only one class is present
    """
    values = np.asarray(values, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    positives = int(y.sum())
    negatives = len(y) - positives
    if positives == 0 or negatives == 0:
        raise EvaluationError("ROC needs both social and topical groups")

    order = np.argsort(-values, kind="stable")
    values, y = values[order], y[order]
    # last index of each run of equal scores
    steps = np.r_[np.flatnonzero(np.diff(values)), len(values) - 1]
    tp = np.cumsum(y)[steps]
    fp = (steps + 1) - tp

    fpr = np.r_[0.0, fp / negatives]
    tpr = np.r_[0.0, tp / positives]
    area = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2))
    return RocCurve(
        fpr=[float(v) for v in fpr],
        tpr=[float(v) for v in tpr],
        thresholds=[None] + [float(values[i]) for i in steps],
        auc=area,
    )


def confusion(predicted: Sequence[int], y: Sequence[int]) -> dict[str, int]:
    predicted = np.asarray(predicted)
    y = np.asarray(y)
    return {
        "true_social": int(np.sum((predicted == 1) & (y == 1))),
        "false_social": int(np.sum((predicted == 1) & (y == 0))),
        "true_topical": int(np.sum((predicted == 0) & (y == 0))),
        "false_topical": int(np.sum((predicted == 0) & (y == 1))),
    }


@dataclass
class FoldResult:
    fold: int
    size: int
    seed: int
    accuracy: float
    auc: Optional[float]

    def to_dict(self) -> dict:
        return {"fold": self.fold, "size": self.size, "seed": self.seed, "accuracy": self.accuracy, "auc": self.auc}


@dataclass
class EvalReport:
    """Accuracy, AUC and ROC of one prediction method over the labeled groups."""

    method: str
    group_ids: list[str]
    y: np.ndarray
    values: np.ndarray
    predicted: np.ndarray
    roc: RocCurve
    folds: list[FoldResult] = field(default_factory=list)
    features: tuple[str, ...] = ()

    @property
    def accuracy(self) -> float:
        return float(np.mean(self.predicted == self.y))

    @property
    def auc(self) -> float:
        return self.roc.auc

    def predictions(self) -> dict[str, Label]:
        return {
            gid: Label.SOCIAL if p == 1 else Label.TOPICAL for gid, p in zip(self.group_ids, self.predicted)
        }

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "groups": len(self.group_ids),
            "accuracy": self.accuracy,
            "auc": self.auc,
            "confusion": confusion(self.predicted, self.y),
            "roc": self.roc.points(),
            "folds": [f.to_dict() for f in self.folds],
            "features": list(self.features),
        }


def stratified_folds(y: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Fold index per row; each class is shuffled and dealt round-robin.

    Dealing continues across classes, so fold sizes differ by at most one.
    """
    y = np.asarray(y, dtype=np.int64)
    if k < 2:
        raise EvaluationError(f"k must be >= 2, got {k}")
    if k > len(y):
        raise EvaluationError(f"k={k} exceeds the {len(y)} labeled group(s)")
    rng = np.random.default_rng(seed)
    folds = np.empty(len(y), dtype=np.int64)
    position = 0
    for cls in (1, 0):
        members = np.flatnonzero(y == cls)
        for i in rng.permutation(members):
            folds[i] = position % k
            position += 1
    return folds


def fold_seed(seed: int, fold: int) -> int:
    """Training seed of one fold, derived from the run seed."""
    return int(np.random.SeedSequence([seed, fold]).generate_state(1)[0])


def cross_validate(
    table: FeatureTable,
    y: np.ndarray,
    seed: int,
    k: int = CV_FOLDS,
    config: Optional[ForestConfig] = None,
    threads: int = THREADS,
    method: str = "classifier",
) -> EvalReport:
    """k-fold cross-validation of the tree ensemble with stratified folds.

    Out-of-fold probabilities are pooled for accuracy, ROC and AUC; each fold
    also reports its own accuracy and, when both classes are in it, its AUC.

    Args:
        table: Feature table of labeled groups
        y: Targets aligned with the rows
        seed: Seed of the fold assignment and of every fold's model
        k: Number of folds
        config: Ensemble settings
        threads: Worker count (folds run in parallel)
        method: Method name written to the report

    Returns:
        EvalReport: Pooled out-of-fold evaluation

    Raises:
        EvaluationError: If k is out of range or a class has fewer than 2 groups
    """
    y = np.asarray(y, dtype=np.int64)
    for cls, name in ((1, "social"), (0, "topical")):
        if int(np.sum(y == cls)) < 2:
            raise EvaluationError(f"cross-validation needs at least 2 {name} groups")
    folds = stratified_folds(y, k, seed)

    def run(fold: int) -> tuple[np.ndarray, np.ndarray, int]:
        test = np.flatnonzero(folds == fold)
        train_rows = np.flatnonzero(folds != fold)
        model_seed = fold_seed(seed, fold)
        training = FeatureTable([table.group_ids[i] for i in train_rows], table.names, table.matrix[train_rows])
        model = train(training, y[train_rows], model_seed, config, threads=1)
        testing = FeatureTable([table.group_ids[i] for i in test], table.names, table.matrix[test])
        return test, model.predict_proba(testing), model_seed

    proba = np.empty(len(y))
    fold_results = []
    for fold, (test, p, model_seed) in enumerate(parallel_map(run, range(k), threads)):
        proba[test] = p
        predicted = (p > 0.5).astype(np.int64)
        both = len(np.unique(y[test])) == 2
        fold_results.append(
            FoldResult(
                fold=fold,
                size=len(test),
                seed=model_seed,
                accuracy=float(np.mean(predicted == y[test])),
                auc=roc_auc(p, y[test]).auc if both else None,
            )
        )

    report = EvalReport(
        method=method,
        group_ids=list(table.group_ids),
        y=y,
        values=proba,
        predicted=(proba > 0.5).astype(np.int64),
        roc=roc_auc(proba, y),
        folds=fold_results,
        features=tuple(table.names),
    )
    logger.info(f"{method}: {k}-fold accuracy {report.accuracy:.3f}, AUC {report.auc:.3f}")
    return report


def evaluate_scores(
    scores: Sequence[ScoreResult],
    labels: dict[str, Label],
    threshold: float = SCORE_THRESHOLD,
) -> EvalReport:
    """Accuracy of threshold prediction and ROC of S_g over the labeled groups."""
    labeled = [s for s in scores if labels.get(s.group_id) in (Label.SOCIAL, Label.TOPICAL)]
    y = np.array([1 if labels[s.group_id] is Label.SOCIAL else 0 for s in labeled], dtype=np.int64)
    values = np.array([s.score for s in labeled])
    predictions = predict_by_threshold(labeled, threshold)
    predicted = np.array([1 if predictions[s.group_id] is Label.SOCIAL else 0 for s in labeled], dtype=np.int64)
    return EvalReport(
        method="score",
        group_ids=[s.group_id for s in labeled],
        y=y,
        values=values,
        predicted=predicted,
        roc=roc_auc(values, y),
    )


@dataclass
class AgreementCurve:
    """Accuracy of each method per equal-width S_g bin."""

    edges: list[float]
    rows: list[dict]
    empty_bins: list[int]

    def to_dict(self) -> dict:
        return {"edges": self.edges, "bins": self.rows, "empty_bins": self.empty_bins}


def agreement_curve(
    scores: Sequence[ScoreResult],
    predictions: dict[str, dict[str, Label]],
    labels: dict[str, Label],
    bins: int = AGREEMENT_BINS,
    second_labels: Optional[dict[str, Label]] = None,
) -> AgreementCurve:
    """Accuracy of every prediction method across equal-width S_g bins.

    Empty bins are left out of ``rows`` and listed in ``empty_bins``. With a
    second labeling, each row also reports how often the two labelings agree.

    Args:
        scores: S_g per group
        predictions: Method name -> predicted label per group id
        labels: Ground truth
        bins: Number of bins over the labeled groups' S_g range
        second_labels: Optional independent labeling of the same groups

    Returns:
        AgreementCurve: Per-bin accuracies
    """
    if bins < 1:
        raise EvaluationError(f"bins must be >= 1, got {bins}")
    labeled = [s for s in scores if labels.get(s.group_id) in (Label.SOCIAL, Label.TOPICAL)]
    if not labeled:
        return AgreementCurve(edges=[], rows=[], empty_bins=list(range(bins)))

    values = np.array([s.score for s in labeled])
    low, high = float(values.min()), float(values.max())
    edges = np.linspace(low, high, bins + 1) if high > low else np.array([low] * bins + [high])
    # right-closed last bin
    index = np.clip(np.searchsorted(edges, values, side="right") - 1, 0, bins - 1)

    rows, empty = [], []
    for b in range(bins):
        members = [s.group_id for s, i in zip(labeled, index) if i == b]
        if not members:
            empty.append(b)
            continue
        row = {
            "bin": b,
            "lower": float(edges[b]),
            "upper": float(edges[b + 1]),
            "groups": len(members),
            "social_fraction": sum(labels[g] is Label.SOCIAL for g in members) / len(members),
            "accuracy": {
                method: sum(predicted.get(g) is labels[g] for g in members) / len(members)
                for method, predicted in sorted(predictions.items())
            },
        }
        if second_labels is not None:
            both = [g for g in members if second_labels.get(g) in (Label.SOCIAL, Label.TOPICAL)]
            row["labeler_agreement"] = (
                sum(second_labels[g] is labels[g] for g in both) / len(both) if both else None
            )
        rows.append(row)
    return AgreementCurve(edges=[float(e) for e in edges], rows=rows, empty_bins=empty)


@dataclass
class Evaluation:
    """Score, classifier and top-k classifier compared on the same labeled groups."""

    seed: int
    reports: list[EvalReport]
    ranking: list[FeatureRank]
    agreement: AgreementCurve
    scores: list[ScoreResult]

    def summary(self) -> dict[str, dict[str, float]]:
        return {r.method: {"accuracy": r.accuracy, "auc": r.auc} for r in self.reports}

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "summary": self.summary(),
            "methods": {r.method: r.to_dict() for r in self.reports},
            "feature_ranking": [r.to_dict() for r in self.ranking],
            "agreement_curve": self.agreement.to_dict(),
        }


def evaluate(
    table: FeatureTable,
    labels: dict[str, Label],
    seed: int,
    k: int = CV_FOLDS,
    top_k: int = TOP_K_FEATURES,
    chi2_bins: int = CHI2_BINS,
    agreement_bins: int = AGREEMENT_BINS,
    threshold: float = SCORE_THRESHOLD,
    config: Optional[ForestConfig] = None,
    threads: int = THREADS,
    score_labeled_only: bool = False,
    second_labels: Optional[dict[str, Label]] = None,
) -> Evaluation:
    """Compare the threshold score with the cross-validated classifier.

    S_g is z-scored over every group in ``table`` unless
    ``score_labeled_only`` restricts the statistics to labeled groups.

    Args:
        table: 22-feature table
        labels: Ground truth (unknown labels are ignored)
        seed: Seed of folds and models
        k: Folds
        top_k: Features kept for the chi-square restricted classifier
        chi2_bins: Quantile bins of the chi-square ranking
        agreement_bins: S_g bins of the agreement curve
        threshold: Score threshold
        config: Ensemble settings
        threads: Worker count
        score_labeled_only: z-score over labeled groups only
        second_labels: Optional second labeling for labeler agreement

    Returns:
        Evaluation: Reports of the three methods plus ranking and agreement curve
    """
    train_table, y = labeled_rows(table, labels)
    if len(y) == 0:
        raise EvaluationError("no social or topical labels among the groups")

    scores = score(table, restrict_to=train_table.group_ids if score_labeled_only else None)
    score_report = evaluate_scores(scores, labels, threshold)
    classifier = cross_validate(train_table, y, seed, k, config, threads)

    ranking = chi_square_rank(train_table, y, chi2_bins)
    chosen = top_features(ranking, top_k)
    restricted = cross_validate(
        train_table.select(chosen), y, seed, k, config, threads, method=f"classifier_chi2_top{top_k}"
    )

    curve = agreement_curve(
        scores,
        {r.method: r.predictions() for r in (score_report, classifier)},
        labels,
        agreement_bins,
        second_labels,
    )
    return Evaluation(
        seed=seed,
        reports=[score_report, classifier, restricted],
        ranking=ranking,
        agreement=curve,
        scores=scores,
    )
