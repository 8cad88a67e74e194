"""Size profiles, label contrasts and correlations of metric columns."""

import logging
import math
from collections import defaultdict
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.stats import mannwhitneyu, spearmanr

from config.settings import CHI2_BINS, OVERLAP_BIN_BASE
from metrics.entropy import size_bin
from models.errors import EvaluationError
from models.group import GroupOrigin, Label
from models.metrics import GroupMetrics, is_defined
from prediction.selection import quantile_bins

logger = logging.getLogger(__name__)

# columns compared between social and topical groups by default
CONTRAST_FIELDS = (
    "s_g",
    "comment_r_int",
    "comment_t",
    "comment_u",
    "comment_a",
    "comment_b",
    "favorite_r_int",
    "contact_r_int",
    "pool_h",
    "comment_h",
    "favorite_h",
)


def _defined_values(metrics: Iterable[GroupMetrics], field: str) -> list[tuple[GroupMetrics, float]]:
    values = []
    for m in metrics:
        try:
            value = m.get(field)
        except KeyError:
            raise EvaluationError(f"unknown metric column {field!r}")
        if is_defined(value) and not math.isnan(value):
            values.append((m, float(value)))
    return values


def size_profile(metrics: Sequence[GroupMetrics], field: str, bin_base: int = OVERLAP_BIN_BASE) -> list[dict]:
    """Count, mean and median of one metric per origin and group-size bin.

    Args:
        metrics: Metric records
        field: Metric column, e.g. ``comment_r_int``
        bin_base: Size bin base; bin k covers [base^k, base^(k+1)) members

    Returns:
        list: Rows ordered by origin then bin
    """
    cells: dict[tuple[GroupOrigin, int], list[float]] = defaultdict(list)
    totals: dict[tuple[GroupOrigin, int], int] = defaultdict(int)
    for m in metrics:
        totals[(m.origin, size_bin(m.size, bin_base))] += 1
    for m, value in _defined_values(metrics, field):
        cells[(m.origin, size_bin(m.size, bin_base))].append(value)

    rows = []
    for origin, k in sorted(totals, key=lambda key: (key[0].value, key[1])):
        values = cells.get((origin, k), [])
        rows.append(
            {
                "origin": origin.value,
                "bin": k,
                "lower": bin_base**k,
                "upper": bin_base ** (k + 1),
                "groups": totals[(origin, k)],
                "defined": len(values),
                "mean": float(np.mean(values)) if values else None,
                "median": float(np.median(values)) if values else None,
            }
        )
    return rows


def social_ratio_curve(values: Mapping[str, float], labels: Mapping[str, Label], bins: int = CHI2_BINS) -> list[dict]:
    """Fraction of social groups per quantile bin of a numeric column.

    Only groups labeled social or topical with a finite value take part.

    Args:
        values: Value per group id (a metric column, or S_g)
        labels: Ground truth
        bins: Number of quantile bins

    Returns:
        list: One row per populated bin, in increasing value order
    """
    ids = sorted(
        gid
        for gid, v in values.items()
        if labels.get(gid) in (Label.SOCIAL, Label.TOPICAL) and v is not None and not math.isnan(v)
    )
    if not ids:
        return []
    column = np.array([values[gid] for gid in ids], dtype=np.float64)
    assigned = quantile_bins(column, bins)

    rows = []
    for b in np.unique(assigned):
        in_bin = assigned == b
        members = [gid for gid, flag in zip(ids, in_bin) if flag]
        rows.append(
            {
                "bin": int(b),
                "lower": float(column[in_bin].min()),
                "upper": float(column[in_bin].max()),
                "groups": len(members),
                "social_fraction": sum(labels[g] is Label.SOCIAL for g in members) / len(members),
            }
        )
    return rows


def label_contrast(
    metrics: Sequence[GroupMetrics],
    labels: Mapping[str, Label],
    fields: Sequence[str] = CONTRAST_FIELDS,
) -> list[dict]:
    """Social vs topical mean of each field, their ratio and a Mann-Whitney p-value."""
    rows = []
    for field in fields:
        social, topical = [], []
        for m, value in _defined_values(metrics, field):
            label = labels.get(m.group_id)
            if label is Label.SOCIAL:
                social.append(value)
            elif label is Label.TOPICAL:
                topical.append(value)

        row = {
            "field": field,
            "social": {"groups": len(social), "mean": float(np.mean(social)) if social else None},
            "topical": {"groups": len(topical), "mean": float(np.mean(topical)) if topical else None},
            "ratio": None,
            "p_value": None,
        }
        if social and topical:
            if row["topical"]["mean"]:
                row["ratio"] = row["social"]["mean"] / row["topical"]["mean"]
            if len(set(social) | set(topical)) > 1:
                row["p_value"] = float(mannwhitneyu(social, topical, alternative="two-sided").pvalue)
        rows.append(row)
    return rows


def metric_correlation(metrics: Sequence[GroupMetrics], x: str, y: str, origin: Optional[GroupOrigin] = None) -> dict:
    """Spearman rank correlation of two metric columns over groups where both are defined."""
    xs, ys = [], []
    y_values = {m.group_id: v for m, v in _defined_values(metrics, y)}
    for m, value in _defined_values(metrics, x):
        if m.group_id in y_values and (origin is None or m.origin is origin):
            xs.append(value)
            ys.append(y_values[m.group_id])

    result = {"x": x, "y": y, "origin": origin.value if origin else "all", "groups": len(xs), "rho": None, "p_value": None}
    if len(xs) >= 3 and len(set(xs)) > 1 and len(set(ys)) > 1:
        rho, p_value = spearmanr(xs, ys)
        result["rho"], result["p_value"] = float(rho), float(p_value)
    else:
        logger.debug(f"correlation {x} vs {y}: too few varying values ({len(xs)} group(s))")
    return result


def analysis_report(
    metrics: Sequence[GroupMetrics],
    labels: Mapping[str, Label],
    scores: Optional[Mapping[str, float]] = None,
    bins: int = CHI2_BINS,
    bin_base: int = OVERLAP_BIN_BASE,
) -> dict:
    """Size profiles, label contrasts, per-feature social-ratio curves and correlations."""
    report = {
        "groups": len(metrics),
        "size_profiles": {
            field: size_profile(metrics, field, bin_base)
            for field in ("comment_r_int", "comment_a", "comment_b", "comment_h", "favorite_h")
        },
        "correlations": [
            metric_correlation(metrics, "comment_r_int", "comment_h"),
            metric_correlation(metrics, "comment_r_int", "pool_h"),
            metric_correlation(metrics, "comment_a", "comment_b"),
        ],
    }
    if labels:
        report["label_contrast"] = label_contrast(metrics, labels)
        curves = {}
        for field in CONTRAST_FIELDS:
            column = {m.group_id: v for m, v in _defined_values(metrics, field)}
            curves[field] = social_ratio_curve(column, labels, bins)
        if scores is not None:
            curves["S_g"] = social_ratio_curve(scores, labels, bins)
        report["social_ratio_curves"] = curves
    return report
