"""Compute the full metric record of every group in a corpus."""

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional

from config.settings import (
    ENTROPY_BIN_BASE,
    ENTROPY_BIN_MIN_GROUPS,
    LABEL_MIN_ACTIVITY,
    LABEL_MIN_COMMENTS,
    LABEL_MIN_MEMBERS,
    MEAN_UNIVERSE,
    MEAN_UNIVERSES,
    THREADS,
)
from graph.partition import partition_edges
from ingest.corpus import Corpus
from metrics.activity import relative_activity_a, relative_activity_b
from metrics.entropy import EntropyBaseline, entropy, normalized_entropy
from metrics.reciprocity import (
    inter_reciprocity,
    intra_reciprocity,
    mean_defined,
    normalized_reciprocity,
    relative_reciprocity,
)
from models.group import Group, GroupOrigin, TERM_CHANNELS, TermChannel
from models.interaction import INTERACTION_TYPES, InteractionType
from models.metrics import ChannelMetrics, GroupMetrics, KindMetrics, Metric, Undefined, is_defined
from utils.parallel import chunked, parallel_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class _RawKind:
    e_int: int
    r_int: Metric
    r_ext: Metric
    u: Metric
    a: Metric
    b: Metric


@dataclass(frozen=True)
class _RawGroup:
    group: Group
    kinds: dict[InteractionType, _RawKind]


def _raw_metrics(corpus: Corpus, group: Group) -> _RawGroup:
    graph = corpus.graph
    n = graph.node_count()
    kinds = {}
    for kind in INTERACTION_TYPES:
        part = partition_edges(graph, group, kind)
        r_int = intra_reciprocity(part)
        r_ext = inter_reciprocity(part)
        kinds[kind] = _RawKind(
            e_int=part.internal_arcs,
            r_int=r_int,
            r_ext=r_ext,
            u=relative_reciprocity(r_int, r_ext),
            a=relative_activity_a(part, graph.arc_count(kind)),
            b=relative_activity_b(part, n),
        )
    return _RawGroup(group=group, kinds=kinds)


def _is_candidate(
    size: int,
    comment: _RawKind | KindMetrics,
    min_members: int,
    min_comments: int,
    min_activity: float,
) -> bool:
    if size <= min_members or comment.e_int <= min_comments:
        return False
    if not is_defined(comment.a) or not is_defined(comment.b):
        return False
    return comment.a > min_activity and comment.b > min_activity


def labeling_candidates(
    metrics: Iterable[GroupMetrics],
    min_members: int = LABEL_MIN_MEMBERS,
    min_comments: int = LABEL_MIN_COMMENTS,
    min_activity: float = LABEL_MIN_ACTIVITY,
) -> list[str]:
    """Select groups active enough to be worth labeling.

    A group qualifies with more than ``min_members`` members, more than
    ``min_comments`` internal comments, and comment activities a and b both
    above ``min_activity``. Undefined a or b excludes the group.

    Args:
        metrics: Metric records with the comment kind computed
        min_members: Member threshold (exclusive)
        min_comments: Internal comment threshold (exclusive)
        min_activity: Relative activity threshold (exclusive)

    Returns:
        list: Selected group ids, sorted
    """
    selected = [
        m.group_id
        for m in metrics
        if _is_candidate(m.size, m.kind(InteractionType.COMMENT), min_members, min_comments, min_activity)
    ]
    return sorted(selected)


def _universe_key(group: Group, universe: str) -> str:
    return "all" if universe == "pooled" else group.origin.value


def compute_all(
    corpus: Corpus,
    universe: str = MEAN_UNIVERSE,
    bin_base: int = ENTROPY_BIN_BASE,
    bin_min_groups: int = ENTROPY_BIN_MIN_GROUPS,
    threads: int = THREADS,
    min_members: int = LABEL_MIN_MEMBERS,
    min_comments: int = LABEL_MIN_COMMENTS,
    min_activity: float = LABEL_MIN_ACTIVITY,
) -> list[GroupMetrics]:
    """Compute one GroupMetrics record per group.

    Per-group partitions run on the worker pool; the corpus-level
    normalizations (mean intra-reciprocity, entropy baselines) are computed
    sequentially afterwards, so the output does not depend on ``threads``.

    Args:
        corpus: Loaded corpus
        universe: Averaging universe: "origin", "pooled" or "candidates"
        bin_base: Entropy baseline bin base
        bin_min_groups: Minimum bags per entropy bin
        threads: Worker count
        min_members: Candidate member threshold, used by the "candidates" universe
        min_comments: Candidate internal comment threshold
        min_activity: Candidate relative activity threshold

    Returns:
        list: Metric records ordered by group id
    """
    if universe not in MEAN_UNIVERSES:
        raise ValueError(f"unknown averaging universe {universe!r}; expected one of {MEAN_UNIVERSES}")

    groups = list(corpus.groups.values())
    if not groups:
        return []

    batches = chunked(groups, threads * 4)
    raw: list[_RawGroup] = [
        record
        for batch in parallel_map(lambda b: [_raw_metrics(corpus, g) for g in b], batches, threads)
        for record in batch
    ]

    # Averaging universe membership
    if universe == "candidates":
        in_universe = {
            r.group.id
            for r in raw
            if _is_candidate(r.group.size, r.kinds[InteractionType.COMMENT], min_members, min_comments, min_activity)
        }
        if not in_universe:
            logger.warning("no labeling candidates; normalizations fall back to per-origin universes")
            in_universe = {r.group.id for r in raw}
    else:
        in_universe = {r.group.id for r in raw}

    r_values: dict[tuple[str, InteractionType], list[Metric]] = defaultdict(list)
    bags_by_key: dict[tuple[str, TermChannel], list] = defaultdict(list)
    for r in raw:
        if r.group.id not in in_universe:
            continue
        key = _universe_key(r.group, universe)
        for kind in INTERACTION_TYPES:
            r_values[(key, kind)].append(r.kinds[kind].r_int)
        for channel in TERM_CHANNELS:
            bag = corpus.bag(r.group.id, channel)
            if bag is not None:
                bags_by_key[(key, channel)].append(bag)

    r_means = {key: mean_defined(values) for key, values in r_values.items()}
    baselines = {
        key: EntropyBaseline.build(bags, base=bin_base, min_groups=bin_min_groups)
        for key, bags in bags_by_key.items()
    }
    for (key, kind), mean in sorted(r_means.items(), key=lambda item: (item[0][0], item[0][1].value)):
        if not is_defined(mean) or mean == 0:
            logger.warning(f"mean {kind} intra-reciprocity over {key} groups is undefined or 0; t undefined")

    records = []
    for r in raw:
        key = _universe_key(r.group, universe)
        kinds = {}
        for kind in INTERACTION_TYPES:
            rk = r.kinds[kind]
            mean = r_means.get((key, kind), Undefined("group outside averaging universe"))
            kinds[kind] = KindMetrics(
                e_int=rk.e_int,
                r_int=rk.r_int,
                r_ext=rk.r_ext,
                t=normalized_reciprocity(rk.r_int, mean),
                u=rk.u,
                a=rk.a,
                b=rk.b,
            )

        channels = {}
        for channel in TERM_CHANNELS:
            bag = corpus.bag(r.group.id, channel)
            if bag is None or bag.total == 0:
                reason = "no term bag" if bag is None else "empty term bag"
                channels[channel] = ChannelMetrics(terms=0, H=Undefined(reason), h=Undefined(reason))
                continue
            baseline: Optional[EntropyBaseline] = baselines.get((key, channel))
            channels[channel] = ChannelMetrics(
                terms=bag.total,
                H=entropy(bag),
                h=normalized_entropy(bag, baseline) if baseline else Undefined("no baseline for channel"),
            )

        records.append(
            GroupMetrics(
                group_id=r.group.id,
                origin=r.group.origin,
                size=r.group.size,
                kinds=kinds,
                channels=channels,
            )
        )

    records.sort(key=lambda m: m.group_id)
    logger.info(f"computed metrics for {len(records)} group(s)")
    return records


def origin_counts(metrics: Iterable[GroupMetrics]) -> dict[str, int]:
    counts = {origin.value: 0 for origin in GroupOrigin}
    for m in metrics:
        counts[m.origin.value] += 1
    return counts
