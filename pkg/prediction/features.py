"""Feature vectors, z-scoring and the evenly weighted sociality score."""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from config.settings import SCORE_THRESHOLD
from models.errors import EvaluationError
from models.group import Label, TERM_CHANNELS
from models.interaction import INTERACTION_TYPES
from models.metrics import GroupMetrics, as_float

logger = logging.getLogger(__name__)

KIND_FEATURES = ("E_int", "a", "b", "t", "u")
CHANNEL_FEATURES = ("H", "h")

# 22 columns, in model order
FEATURE_NAMES: tuple[str, ...] = (
    ("s_g",)
    + tuple(f"{kind.value}_{f}" for kind in INTERACTION_TYPES for f in KIND_FEATURES)
    + tuple(f"{channel.value}_{f}" for channel in TERM_CHANNELS for f in CHANNEL_FEATURES)
)

# t and u per kind, h per channel
SCORE_FEATURES: tuple[str, ...] = tuple(
    f"{kind.value}_{f}" for kind in INTERACTION_TYPES for f in ("t", "u")
) + tuple(f"{channel.value}_h" for channel in TERM_CHANNELS)


@dataclass(frozen=True)
class FeatureVector:
    """One group's features; undefined values are NaN with ``defined`` False."""

    group_id: str
    values: tuple[float, ...]
    defined: tuple[bool, ...]

    def get(self, name: str) -> float:
        return self.values[FEATURE_NAMES.index(name)]


@dataclass
class FeatureTable:
    """Feature matrix over a set of groups, rows ordered by group id."""

    group_ids: list[str]
    names: tuple[str, ...]
    matrix: np.ndarray

    def __len__(self) -> int:
        return len(self.group_ids)

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.matrix)

    def column(self, name: str) -> np.ndarray:
        return self.matrix[:, self.names.index(name)]

    def select(self, names: Sequence[str]) -> "FeatureTable":
        """Restrict to the given columns, in the given order."""
        unknown = [n for n in names if n not in self.names]
        if unknown:
            raise EvaluationError(f"unknown feature(s): {', '.join(unknown)}")
        idx = [self.names.index(n) for n in names]
        return FeatureTable(list(self.group_ids), tuple(names), self.matrix[:, idx])

    def subset(self, group_ids: Iterable[str]) -> "FeatureTable":
        """Restrict to the given groups, keeping id order."""
        wanted = set(group_ids)
        rows = [i for i, gid in enumerate(self.group_ids) if gid in wanted]
        return FeatureTable([self.group_ids[i] for i in rows], self.names, self.matrix[rows, :])

    def vectors(self) -> list[FeatureVector]:
        return [
            FeatureVector(gid, tuple(float(v) for v in row), tuple(bool(d) for d in ~np.isnan(row)))
            for gid, row in zip(self.group_ids, self.matrix)
        ]


def features_from_metrics(metrics: Iterable[GroupMetrics]) -> FeatureTable:
    """Build the 22-feature table from metric records.

    Args:
        metrics: Metric records

    Returns:
        FeatureTable: Rows ordered by group id, NaN where a metric is undefined
    """
    records = sorted(metrics, key=lambda m: m.group_id)
    matrix = np.array(
        [[as_float(m.get(name)) for name in FEATURE_NAMES] for m in records],
        dtype=np.float64,
    ).reshape(len(records), len(FEATURE_NAMES))
    return FeatureTable([m.group_id for m in records], FEATURE_NAMES, matrix)


@dataclass
class ZScores:
    """z-transformed features plus the statistics used and the imputation mask."""

    table: FeatureTable
    means: np.ndarray
    stds: np.ndarray
    imputed: np.ndarray
    zero_variance: list[str] = field(default_factory=list)


def zscore(table: FeatureTable, subset: Optional[Sequence[str]] = None) -> ZScores:
    """Subtract the mean and divide by the population standard deviation, per feature.

    Statistics are taken over defined entries only. Undefined entries are
    imputed at the mean (z = 0) and flagged. A feature with zero variance, or
    fewer than two defined entries, becomes all zeros with a warning.

    Args:
        table: Feature table
        subset: Feature names to transform (defaults to all columns)

    Returns:
        ZScores: Transformed table and its statistics

    Raises:
        EvaluationError: If the table holds fewer than 2 groups
    """
    if len(table) < 2:
        raise EvaluationError(f"z-scoring needs at least 2 groups, got {len(table)}")
    if subset is not None:
        table = table.select(subset)

    x = table.matrix
    defined = ~np.isnan(x)
    n_columns = x.shape[1]
    means = np.zeros(n_columns)
    stds = np.zeros(n_columns)
    z = np.zeros_like(x)
    flat: list[str] = []

    for j, name in enumerate(table.names):
        values = x[defined[:, j], j]
        if values.size < 2:
            logger.warning(f"feature {name} has {values.size} defined value(s); z-scores set to 0")
            means[j] = float(values.mean()) if values.size else 0.0
            flat.append(name)
            continue
        means[j] = float(values.mean())
        stds[j] = float(values.std())
        if stds[j] == 0:
            logger.warning(f"feature {name} is constant; z-scores set to 0")
            flat.append(name)
            continue
        column = (x[:, j] - means[j]) / stds[j]
        z[:, j] = np.where(defined[:, j], column, 0.0)

    return ZScores(
        table=FeatureTable(list(table.group_ids), table.names, z),
        means=means,
        stds=stds,
        imputed=~defined,
        zero_variance=flat,
    )


@dataclass(frozen=True)
class ScoreResult:
    """S_g of one group with its component z-scores."""

    group_id: str
    score: float
    components: dict[str, float]
    imputed: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "group_id": self.group_id,
            "score": self.score,
            "components": dict(self.components),
            "imputed": list(self.imputed),
        }


def score(table: FeatureTable, restrict_to: Optional[Iterable[str]] = None) -> list[ScoreResult]:
    """Evenly weighted mean of the 9 z-scored sociality features.

    Higher scores mean a group is more likely social.

    Args:
        table: Feature table holding at least the score features
        restrict_to: Group ids whose statistics define the z-scores; every
            group in ``table`` is still scored. Defaults to the whole table.

    Returns:
        list: One ScoreResult per group, ordered by group id
    """
    features = table.select(SCORE_FEATURES)
    if restrict_to is None:
        z = zscore(features)
        matrix, imputed = z.table.matrix, z.imputed
    else:
        reference = zscore(features.subset(restrict_to))
        raw = features.matrix
        imputed = np.isnan(raw)
        flat = reference.stds == 0
        matrix = (raw - reference.means) / np.where(flat, 1.0, reference.stds)
        matrix[:, flat] = 0.0
        matrix[imputed] = 0.0

    results = []
    for i, gid in enumerate(features.group_ids):
        row = matrix[i]
        results.append(
            ScoreResult(
                group_id=gid,
                score=float(row.sum() / len(SCORE_FEATURES)),
                components={name: float(v) for name, v in zip(SCORE_FEATURES, row)},
                imputed=tuple(name for name, flag in zip(SCORE_FEATURES, imputed[i]) if flag),
            )
        )
    return results


def predict_by_threshold(scores: Iterable[ScoreResult], threshold: float = SCORE_THRESHOLD) -> dict[str, Label]:
    """Social when S_g is above the threshold, topical otherwise."""
    return {s.group_id: Label.SOCIAL if s.score > threshold else Label.TOPICAL for s in scores}


def labeled_rows(table: FeatureTable, labels: dict[str, Label]) -> tuple[FeatureTable, np.ndarray]:
    """Rows of groups labeled social or topical, with a 0/1 target (1 = social).

    Unknown labels and unlabeled groups are dropped.
    """
    keep = [gid for gid in table.group_ids if labels.get(gid) in (Label.SOCIAL, Label.TOPICAL)]
    sub = table.subset(keep)
    y = np.array([1 if labels[gid] is Label.SOCIAL else 0 for gid in sub.group_ids], dtype=np.int64)
    return sub, y
