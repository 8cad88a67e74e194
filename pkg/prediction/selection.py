"""Chi-square ranking of features against the social/topical label."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2_contingency, rankdata

from config.settings import CHI2_BINS
from models.errors import EvaluationError
from prediction.features import FeatureTable

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureRank:
    rank: int
    feature: str
    statistic: float
    p_value: float
    bins: int

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "feature": self.feature,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "bins": self.bins,
        }


def quantile_bins(values: np.ndarray, bins: int = CHI2_BINS) -> np.ndarray:
    """Rank-based quantile bin of every value; NaN gets bin ``bins``.

    Tied values share the bin of their lowest rank, so any strictly
    increasing transform of the column yields the same bins.
    """
    out = np.full(values.shape[0], bins, dtype=np.int64)
    defined = ~np.isnan(values)
    n = int(defined.sum())
    if n:
        ranks = rankdata(values[defined], method="min").astype(np.int64) - 1
        out[defined] = ranks * bins // n
    return out


def chi_square_statistic(values: np.ndarray, y: np.ndarray, bins: int = CHI2_BINS) -> tuple[float, float, int]:
    """Chi-square statistic, p-value and populated bin count of one feature."""
    assigned = quantile_bins(values, bins)
    present = np.unique(assigned)
    if present.size < 2:
        return 0.0, 1.0, int(present.size)
    table = np.array([[np.sum((assigned == b) & (y == c)) for c in (0, 1)] for b in present])
    statistic, p_value, _, _ = chi2_contingency(table, correction=False)
    return float(statistic), float(p_value), int(present.size)


def chi_square_rank(table: FeatureTable, y: np.ndarray, bins: int = CHI2_BINS) -> list[FeatureRank]:
    """Rank features by their chi-square statistic against the label, descending.

    Args:
        table: Feature table of labeled groups
        y: Targets (1 = social, 0 = topical) aligned with the rows
        bins: Quantile bins per feature

    Returns:
        list: FeatureRank per feature; ties ordered by feature name

    Raises:
        EvaluationError: If only one class is present
    """
    y = np.asarray(y, dtype=np.int64)
    if len(np.unique(y)) < 2:
        raise EvaluationError("chi-square ranking needs both social and topical groups")
    if bins < 2:
        raise EvaluationError(f"bins must be >= 2, got {bins}")

    scored = []
    for name in table.names:
        statistic, p_value, used = chi_square_statistic(table.column(name), y, bins)
        if used < 2:
            logger.debug(f"feature {name} falls into a single bin; statistic 0")
        scored.append((name, statistic, p_value, used))

    scored.sort(key=lambda item: (-item[1], item[0]))
    return [
        FeatureRank(rank=i + 1, feature=name, statistic=statistic, p_value=p_value, bins=used)
        for i, (name, statistic, p_value, used) in enumerate(scored)
    ]


def top_features(ranking: list[FeatureRank], k: int) -> list[str]:
    """Names of the ``k`` best-ranked features."""
    if k < 1:
        raise EvaluationError(f"top-k must be >= 1, got {k}")
    return [r.feature for r in ranking[:k]]
