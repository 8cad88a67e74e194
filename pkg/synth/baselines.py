"""Randomization baselines: term shuffling, random groups, configuration graphs."""

import dataclasses
import logging
from collections import Counter
from pathlib import Path
from typing import Optional, Sequence

import networkx as nx
import numpy as np

from ingest.corpus import Corpus
from models.errors import InfeasibleConfigError
from models.group import Group, GroupOrigin, TERM_CHANNELS, TermBag, TermChannel
from models.interaction import Interaction, InteractionGraph, InteractionType

logger = logging.getLogger(__name__)

TermIndex = dict[tuple[str, TermChannel], TermBag]


def shuffle_terms(terms: TermIndex, seed: int) -> TermIndex:
    """Permute tag occurrences across groups, channel by channel.

    Every bag keeps its total number of occurrences and every channel keeps
    its global tag multiset; only which group holds which occurrence changes.

    Args:
        terms: Term bags keyed by (group id, channel)
        seed: Random seed

    Returns:
        dict: Shuffled bags with the same keys
    """
    rng = np.random.default_rng(seed)
    shuffled: TermIndex = {}
    for channel in TERM_CHANNELS:
        keys = sorted(k for k in terms if k[1] is channel)
        if not keys:
            continue
        occurrences = [tag for key in keys for tag, count in terms[key].counts.items() for _ in range(count)]
        order = rng.permutation(len(occurrences))
        position = 0
        for key in keys:
            total = terms[key].total
            counts = Counter(occurrences[i] for i in order[position : position + total])
            position += total
            shuffled[key] = TermBag(key[0], channel, dict(counts))
    return dict(sorted(shuffled.items(), key=lambda item: (item[0][0], item[0][1].value)))


def shuffle_corpus_terms(corpus: Corpus, seed: int) -> Corpus:
    """The corpus with its term bags shuffled (graph and groups untouched)."""
    return dataclasses.replace(corpus, terms=shuffle_terms(corpus.terms, seed))


def write_terms(terms: TermIndex, path: Path) -> None:
    """Write term bags as terms.tsv rows, ordered by group, channel and tag."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        for (group_id, channel), bag in sorted(terms.items(), key=lambda item: (item[0][0], item[0][1].value)):
            for tag, count in bag.counts.items():
                f.write(f"{group_id}\t{channel.value}\t{tag}\t{count}\n")


def random_groups(
    graph: InteractionGraph,
    sizes: Sequence[int],
    seed: int,
    origin: GroupOrigin = GroupOrigin.DETECTED,
    prefix: str = "r",
) -> list[Group]:
    """Groups of the given sizes with members drawn uniformly from the graph's nodes.

    Args:
        graph: Graph whose nodes are sampled
        sizes: One size per group
        seed: Random seed
        origin: Origin stamped on the groups
        prefix: Group id prefix

    Returns:
        list: Groups ``{prefix}0001``, ... in size-sequence order

    Raises:
        InfeasibleConfigError: If a size is below 1 or above the node count
    """
    nodes = sorted(graph.nodes)
    n = len(nodes)
    for size in sizes:
        if size < 1 or size > n:
            raise InfeasibleConfigError(f"group size {size} outside [1, {n}]")
    rng = np.random.default_rng(seed)
    width = max(4, len(str(len(sizes))))
    groups = []
    for index, size in enumerate(sizes):
        picked = rng.choice(n, size=int(size), replace=False)
        groups.append(Group(f"{prefix}{index + 1:0{width}d}", origin, frozenset(nodes[i] for i in picked)))
    return groups


def configuration_graph(
    out_degrees: Sequence[int],
    seed: int,
    in_degrees: Optional[Sequence[int]] = None,
    kind: InteractionType = InteractionType.COMMENT,
) -> InteractionGraph:
    """Directed configuration-model graph over nodes ``n0``, ``n1``, ...

    Self-loops are dropped. Parallel arcs stay as multiplicities, except for
    contacts, which collapse to one. Without ``in_degrees`` the in-degree
    sequence is a seeded permutation of the out-degrees.

    Args:
        out_degrees: Out-degree per node
        seed: Random seed
        in_degrees: In-degree per node (must sum like ``out_degrees``)
        kind: Interaction kind of every arc

    Returns:
        InteractionGraph: Frozen graph with every node present
    """
    out_degrees = [int(d) for d in out_degrees]
    if in_degrees is None:
        rng = np.random.default_rng(seed)
        in_degrees = [out_degrees[i] for i in rng.permutation(len(out_degrees))]
    in_degrees = [int(d) for d in in_degrees]
    if len(in_degrees) != len(out_degrees) or sum(in_degrees) != sum(out_degrees):
        raise InfeasibleConfigError("in- and out-degree sequences must have equal length and sum")

    multigraph = nx.directed_configuration_model(in_degrees, out_degrees, seed=seed)
    graph = InteractionGraph()
    width = len(str(max(len(out_degrees) - 1, 0)))
    names = [f"n{i:0{width}d}" for i in range(len(out_degrees))]
    for name in names:
        graph.add_node(name)
    loops = 0
    for u, v in multigraph.edges():
        if u == v:
            loops += 1
            continue
        graph.add_interaction(Interaction(names[u], names[v], kind))
    if loops:
        logger.debug(f"configuration graph: dropped {loops} self-loop(s)")
    return graph.freeze()
