"""Corpus assembly: graph, groups, term bags and labels loaded together."""

import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ingest.reader import CorpusReader, IngestReport
from models.group import Group, GroupOrigin, Label, TermBag, TermChannel
from models.interaction import InteractionGraph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Corpus:
    """Immutable, fully loaded corpus shared by every downstream stage."""

    graph: InteractionGraph
    groups: dict[str, Group]
    terms: dict[tuple[str, TermChannel], TermBag] = field(default_factory=dict)
    reports: tuple[IngestReport, ...] = ()

    @property
    def labels(self) -> dict[str, Label]:
        return {gid: g.label for gid, g in self.groups.items() if g.label is not None}

    def bag(self, group_id: str, channel: TermChannel) -> Optional[TermBag]:
        return self.terms.get((group_id, channel))

    def groups_of(self, origin: GroupOrigin) -> list[Group]:
        return [g for g in self.groups.values() if g.origin is origin]

    def summary(self) -> dict:
        """Dataset summary: interaction totals and group counts per origin."""
        summary = self.graph.summary()
        summary["groups"] = {
            origin.value: len(self.groups_of(origin)) for origin in GroupOrigin
        }
        summary["labels"] = {
            label.value: sum(1 for g in self.groups.values() if g.label is label) for label in Label
        }
        summary["term_bags"] = {
            channel.value: sum(1 for (_, ch) in self.terms if ch is channel) for channel in TermChannel
        }
        return summary


def build_corpus(
    graph: InteractionGraph,
    groups: dict[str, Group],
    terms: Optional[dict[tuple[str, TermChannel], TermBag]] = None,
    labels: Optional[dict[str, Label]] = None,
    reports: tuple[IngestReport, ...] = (),
) -> Corpus:
    """Assemble a corpus from already-loaded parts.

    Group members missing from the interaction data are kept as isolated
    nodes so that s_g and N reflect the input.

    Args:
        graph: Interaction graph
        groups: Groups keyed by id
        terms: Term bags keyed by (group id, channel)
        labels: Ground-truth labels keyed by group id

    Returns:
        Corpus: Frozen corpus
    """
    labels = labels or {}
    if labels:
        groups = {
            gid: dataclasses.replace(g, label=labels[gid]) if gid in labels else g
            for gid, g in groups.items()
        }

    members = set()
    for group in groups.values():
        members.update(group.members)
    isolated = members - graph.nodes
    if isolated:
        logger.info(f"{len(isolated)} group member(s) have no interactions; kept as isolated nodes")

    return Corpus(
        graph=graph.with_nodes(isolated),
        groups=dict(sorted(groups.items())),
        terms=dict(terms or {}),
        reports=tuple(reports),
    )


def load_corpus(
    interactions: Path,
    groups: Path,
    terms: Optional[Path] = None,
    labels: Optional[Path] = None,
    strict: bool = False,
) -> Corpus:
    """Load a corpus from its TSV files.

    Args:
        interactions: interactions.tsv
        groups: groups.tsv
        terms: terms.tsv (optional)
        labels: labels.tsv (optional)
        strict: Abort on the first malformed row

    Returns:
        Corpus: Frozen corpus
    """
    reader = CorpusReader(strict=strict)
    graph = reader.read_interactions(interactions)
    group_map = reader.read_groups(groups)
    bags = reader.read_terms(terms, group_map) if terms else {}
    label_map = reader.read_labels(labels, group_map) if labels else {}
    return build_corpus(graph, group_map, bags, label_map, tuple(reader.reports))
