"""Best-match Jaccard similarity between detected and declared groups."""

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from config.settings import OVERLAP_BIN_BASE, OVERLAP_PERCENTILES, THREADS
from metrics.entropy import size_bin
from models.group import Group
from utils.parallel import chunked, parallel_map


def jaccard(a: frozenset | set, b: frozenset | set) -> float:
    """|a & b| / |a | b| of two non-empty member sets."""
    if not a or not b:
        raise ValueError("jaccard similarity needs two non-empty sets")
    inter = len(a & b)
    return inter / (len(a) + len(b) - inter)


@dataclass(frozen=True)
class BestMatch:
    """The declared group most similar to one detected group."""

    detected_id: str
    declared_id: str
    similarity: float
    detected_size: int
    declared_size: int


@dataclass
class BestMatchResult:
    """Best matches of every detected group with any positive similarity."""

    matches: list[BestMatch] = field(default_factory=list)
    detected_count: int = 0

    @property
    def mean_similarity(self) -> float:
        """Mean best-match similarity; zero similarities are excluded."""
        if not self.matches:
            return 0.0
        return sum(m.similarity for m in self.matches) / len(self.matches)

    @property
    def unmatched(self) -> int:
        return self.detected_count - len(self.matches)

    def by_detected(self) -> dict[str, BestMatch]:
        return {m.detected_id: m for m in self.matches}


class DeclaredIndex:
    """Inverted index member -> declared group ids, built once and read-only."""

    def __init__(self, declared: Iterable[Group]):
        self.groups = {g.id: g for g in declared}
        index: dict[str, list[str]] = defaultdict(list)
        for gid in sorted(self.groups):
            for member in self.groups[gid].members:
                index[member].append(gid)
        self.index = dict(index)

    def best_match(self, group: Group) -> Optional[BestMatch]:
        """Declared group of maximal Jaccard similarity; ties go to the smallest id."""
        overlaps: Counter = Counter()
        for member in group.members:
            overlaps.update(self.index.get(member, ()))
        if not overlaps:
            return None

        best_id, best_sim = None, 0.0
        for gid, inter in overlaps.items():
            sim = inter / (group.size + self.groups[gid].size - inter)
            if sim > best_sim or (sim == best_sim and best_id is not None and gid < best_id):
                best_id, best_sim = gid, sim
        if best_id is None or best_sim <= 0:
            return None
        return BestMatch(group.id, best_id, best_sim, group.size, self.groups[best_id].size)


def best_matches(
    detected: Iterable[Group],
    declared: Iterable[Group],
    threads: int = THREADS,
) -> BestMatchResult:
    """For each detected group, select the declared group with the highest similarity.

    Args:
        detected: Detected groups
        declared: Declared groups
        threads: Worker count

    Returns:
        BestMatchResult: One match per detected group with positive similarity
    """
    detected = sorted(detected, key=lambda g: g.id)
    index = DeclaredIndex(declared)

    def run(batch: Sequence[Group]) -> list[Optional[BestMatch]]:
        return [index.best_match(g) for g in batch]

    results = [m for batch in parallel_map(run, chunked(detected, threads * 4), threads) for m in batch]
    return BestMatchResult(matches=[m for m in results if m is not None], detected_count=len(detected))


@dataclass
class SimilarityMap:
    """Mean best-match similarity on a (detected size bin, declared size bin) grid."""

    bin_base: int = OVERLAP_BIN_BASE
    cells: dict[tuple[int, int], tuple[float, int]] = field(default_factory=dict)

    def mean(self, detected_bin: int, declared_bin: int) -> Optional[float]:
        cell = self.cells.get((detected_bin, declared_bin))
        return cell[0] if cell else None

    def count(self, detected_bin: int, declared_bin: int) -> int:
        cell = self.cells.get((detected_bin, declared_bin))
        return cell[1] if cell else 0

    def subtract(self, other: "SimilarityMap") -> "SimilarityMap":
        """Cell-wise ``self - other``; a cell empty on one side counts as 0 there."""
        diff = SimilarityMap(bin_base=self.bin_base)
        for key in sorted(set(self.cells) | set(other.cells)):
            mine = self.cells.get(key, (0.0, 0))
            theirs = other.cells.get(key, (0.0, 0))
            diff.cells[key] = (mine[0] - theirs[0], mine[1] + theirs[1])
        return diff

    def size(self) -> int:
        if not self.cells:
            return 0
        return max(max(i, j) for i, j in self.cells) + 1

    def to_dict(self, size: Optional[int] = None) -> dict:
        size = size if size is not None else self.size()
        edges = [self.bin_base**k for k in range(size + 1)]
        grid = [[self.mean(i, j) for j in range(size)] for i in range(size)]
        counts = [[self.count(i, j) for j in range(size)] for i in range(size)]
        return {"bin_edges": edges, "mean": grid, "count": counts, "rows": "detected size", "columns": "declared size"}


def similarity_map(matches: BestMatchResult, bin_base: int = OVERLAP_BIN_BASE) -> SimilarityMap:
    """Average best-match similarity per size-bin cell (zero similarities excluded).

    Args:
        matches: Best matches of the detected groups
        bin_base: Size bin base; bin k covers [base^k, base^(k+1)) members

    Returns:
        SimilarityMap: Mean similarity and count per populated cell
    """
    sums: dict[tuple[int, int], list[float]] = defaultdict(list)
    for m in matches.matches:
        key = (size_bin(m.detected_size, bin_base), size_bin(m.declared_size, bin_base))
        sums[key].append(m.similarity)
    result = SimilarityMap(bin_base=bin_base)
    for key in sorted(sums):
        values = sums[key]
        result.cells[key] = (sum(values) / len(values), len(values))
    return result


def nearest_rank(values_desc: Sequence[float], percentile: float) -> float:
    """Nearest-rank percentile on a descending-sorted list.

    The p-th percentile is the value at rank ceil((100 - p) / 100 * n), so
    that (100 - p)% of the values are at or above it.
    """
    n = len(values_desc)
    if n == 0:
        raise ValueError("percentile of an empty list")
    share = (Fraction(100) - Fraction(str(percentile))) / 100
    rank = min(n, max(1, math.ceil(share * n)))
    return values_desc[rank - 1]


@dataclass(frozen=True)
class PercentileRow:
    bin: int
    lower: int
    upper: int
    groups: int
    percentiles: dict[float, float]

    def to_dict(self) -> dict:
        return {
            "bin": self.bin,
            "lower": self.lower,
            "upper": self.upper,
            "groups": self.groups,
            "percentiles": {format(p, "g"): v for p, v in self.percentiles.items()},
        }


def percentile_curves(
    matches: BestMatchResult,
    detected: Iterable[Group],
    percentiles: Sequence[float] = tuple(OVERLAP_PERCENTILES),
    bin_base: int = OVERLAP_BIN_BASE,
) -> list[PercentileRow]:
    """Percentiles of best-match similarity per detected-size bin.

    Detected groups without a positive match count as similarity 0 here.

    Args:
        matches: Best matches
        detected: All detected groups
        percentiles: Percentiles to report, e.g. (91, 99)
        bin_base: Size bin base

    Returns:
        list: One row per populated detected-size bin
    """
    by_id = matches.by_detected()
    per_bin: dict[int, list[float]] = defaultdict(list)
    for group in detected:
        match = by_id.get(group.id)
        per_bin[size_bin(group.size, bin_base)].append(match.similarity if match else 0.0)

    rows = []
    for k in sorted(per_bin):
        values = sorted(per_bin[k], reverse=True)
        rows.append(
            PercentileRow(
                bin=k,
                lower=bin_base**k,
                upper=bin_base ** (k + 1),
                groups=len(values),
                percentiles={float(p): nearest_rank(values, p) for p in percentiles},
            )
        )
    return rows
