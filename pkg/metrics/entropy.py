"""Tag entropy and its size-binned normalization."""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from config.settings import ENTROPY_BIN_BASE, ENTROPY_BIN_MIN_GROUPS
from models.group import TermBag
from models.metrics import Metric, Undefined, is_defined

logger = logging.getLogger(__name__)


def entropy(bag: TermBag) -> Metric:
    """H: Shannon entropy in bits of the bag's occurrence distribution.

    Args:
        bag: Term bag (multiset semantics: p(t) = count(t) / |T(g)|)

    Returns:
        Metric: Entropy, undefined for an empty bag
    """
    if bag.total == 0:
        return Undefined("empty term bag")
    counts = np.fromiter(bag.counts.values(), dtype=np.float64, count=bag.distinct)
    p = counts / counts.sum()
    h = float(-(p * np.log2(p)).sum())
    return h if h > 0 else 0.0


def size_bin(total: int, base: int = ENTROPY_BIN_BASE) -> int:
    """Bin index k such that base^k <= total < base^(k+1)."""
    if total < 1:
        raise ValueError(f"total must be >= 1, got {total}")
    k = 0
    while total >= base:
        total //= base
        k += 1
    return k


@dataclass
class EntropyBaseline:
    """Mean entropy per |T(g)| size bin, with sparse bins merged upward.

    Bins holding fewer than ``min_groups`` bags are merged into the nearest
    larger bin; a sparse tail at the top is merged into the bin below it.
    """

    base: int = ENTROPY_BIN_BASE
    min_groups: int = ENTROPY_BIN_MIN_GROUPS
    means: dict[int, float] = field(default_factory=dict)
    buckets: list[dict] = field(default_factory=list)

    @classmethod
    def build(
        cls,
        bags: Iterable[TermBag],
        base: int = ENTROPY_BIN_BASE,
        min_groups: int = ENTROPY_BIN_MIN_GROUPS,
    ) -> "EntropyBaseline":
        """Build the baseline from one channel of one corpus.

        Args:
            bags: Term bags of one channel
            base: Bin width as a power base
            min_groups: Minimum bags per merged bin

        Returns:
            EntropyBaseline: Baseline table
        """
        by_bin: dict[int, list[float]] = defaultdict(list)
        for bag in bags:
            h = entropy(bag)
            if is_defined(h):
                by_bin[size_bin(bag.total, base)].append(h)

        merged: list[tuple[list[int], list[float]]] = []
        pending_bins: list[int] = []
        pending_values: list[float] = []
        for k in sorted(by_bin):
            pending_bins.append(k)
            pending_values.extend(by_bin[k])
            if len(pending_values) >= min_groups:
                merged.append((pending_bins, pending_values))
                pending_bins, pending_values = [], []
        if pending_bins:
            if merged:
                merged[-1][0].extend(pending_bins)
                merged[-1][1].extend(pending_values)
            else:
                merged.append((pending_bins, pending_values))

        baseline = cls(base=base, min_groups=min_groups)
        for bins, values in merged:
            mean = float(np.mean(values))
            for k in bins:
                baseline.means[k] = mean
            baseline.buckets.append(
                {
                    "bins": list(bins),
                    "lower": base ** min(bins),
                    "upper": base ** (max(bins) + 1),
                    "groups": len(values),
                    "mean_entropy": mean,
                }
            )
        return baseline

    def mean_for(self, total: int) -> Metric:
        """Mean entropy of the bin that ``total`` term occurrences fall in."""
        if not self.means:
            return Undefined("empty entropy baseline")
        k = size_bin(total, self.base)
        if k not in self.means:
            # nearest populated bin, preferring the larger one on ties
            k = min(self.means, key=lambda b: (abs(b - k), -b))
        return self.means[k]


def normalized_entropy(bag: TermBag, baseline: EntropyBaseline) -> Metric:
    """h: entropy over the mean entropy of bags with a similar number of terms.

    Args:
        bag: Term bag of one group and channel
        baseline: Baseline over the same corpus and channel

    Returns:
        Metric: Normalized entropy
    """
    h = entropy(bag)
    if not is_defined(h):
        return h
    mean = baseline.mean_for(bag.total)
    if not is_defined(mean):
        return mean
    if mean == 0:
        return Undefined("bin mean entropy is 0")
    return h / mean
