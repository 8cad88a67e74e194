"""Declared-vs-detected comparison against the member-shuffle null."""

import logging
from dataclasses import dataclass
from typing import Sequence

from config.settings import OVERLAP_BIN_BASE, OVERLAP_PERCENTILES, THREADS
from models.group import Group
from overlap.shuffle import ShuffleResult, shuffle_members
from overlap.similarity import (
    BestMatchResult,
    PercentileRow,
    SimilarityMap,
    best_matches,
    percentile_curves,
    similarity_map,
)

logger = logging.getLogger(__name__)


@dataclass
class OverlapAnalysis:
    """Real and shuffled best matches with their maps and percentile tables."""

    seed: int
    real: BestMatchResult
    shuffled: BestMatchResult
    shuffle: ShuffleResult
    real_map: SimilarityMap
    shuffled_map: SimilarityMap
    real_percentiles: list[PercentileRow]
    shuffled_percentiles: list[PercentileRow]
    declared_count: int

    @property
    def difference_map(self) -> SimilarityMap:
        return self.real_map.subtract(self.shuffled_map)

    def to_dict(self) -> dict:
        size = max(self.real_map.size(), self.shuffled_map.size())
        return {
            "seed": self.seed,
            "groups": {"detected": self.real.detected_count, "declared": self.declared_count},
            "mean_best_match": {
                "real": self.real.mean_similarity,
                "shuffled": self.shuffled.mean_similarity,
            },
            "matched": {"real": len(self.real.matches), "shuffled": len(self.shuffled.matches)},
            "collisions": self.shuffle.collisions,
            "substitutions": self.shuffle.substitutions,
            "similarity_maps": {
                "real": self.real_map.to_dict(size),
                "shuffled": self.shuffled_map.to_dict(size),
                "difference": self.difference_map.to_dict(size),
            },
            "percentiles": {
                "real": [row.to_dict() for row in self.real_percentiles],
                "shuffled": [row.to_dict() for row in self.shuffled_percentiles],
            },
            "notes": {
                "maps": "cell means exclude detected groups whose best similarity is 0",
                "percentiles": "nearest rank over all detected groups; unmatched groups count as 0",
                "difference": "real minus shuffled; a cell empty on one side counts as 0 there",
            },
        }


def analyze_overlap(
    detected: Sequence[Group],
    declared: Sequence[Group],
    seed: int,
    percentiles: Sequence[float] = tuple(OVERLAP_PERCENTILES),
    bin_base: int = OVERLAP_BIN_BASE,
    threads: int = THREADS,
) -> OverlapAnalysis:
    """Compare detected groups with declared ones, and with a shuffled copy of themselves.

    Args:
        detected: Detected groups
        declared: Declared groups
        seed: Seed of the member shuffle
        percentiles: Percentiles for the per-size curves
        bin_base: Size bin base
        threads: Worker count

    Returns:
        OverlapAnalysis: Everything overlap_report.json needs
    """
    if not detected or not declared:
        raise ValueError("overlap analysis needs at least one detected and one declared group")

    universe = set()
    for group in list(detected) + list(declared):
        universe.update(group.members)

    real = best_matches(detected, declared, threads)
    shuffle = shuffle_members(detected, seed, universe)
    shuffled = best_matches(shuffle.groups, declared, threads)
    logger.info(
        f"mean best-match similarity {real.mean_similarity:.4f} (real) vs {shuffled.mean_similarity:.4f} (shuffled)"
    )

    return OverlapAnalysis(
        seed=seed,
        real=real,
        shuffled=shuffled,
        shuffle=shuffle,
        real_map=similarity_map(real, bin_base),
        shuffled_map=similarity_map(shuffled, bin_base),
        real_percentiles=percentile_curves(real, detected, percentiles, bin_base),
        shuffled_percentiles=percentile_curves(shuffled, shuffle.groups, percentiles, bin_base),
        declared_count=len(declared),
    )
