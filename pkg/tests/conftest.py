"""Shared fixtures: tiny TSV corpora and metric-record builders."""

from pathlib import Path
from typing import Iterable

import pytest

from models.group import GroupOrigin, TERM_CHANNELS
from models.interaction import INTERACTION_TYPES, Interaction, InteractionGraph, InteractionType
from models.metrics import ChannelMetrics, GroupMetrics, KindMetrics, Undefined
from synth.config import SynthConfig


def write_tsv(path: Path, rows: Iterable[Iterable]) -> Path:
    path.write_text("".join("\t".join(str(f) for f in row) + "\n" for row in rows), encoding="utf-8")
    return path


def build_graph(arcs: Iterable[tuple[str, str]], kind: InteractionType = InteractionType.COMMENT) -> InteractionGraph:
    graph = InteractionGraph()
    for src, dst in arcs:
        graph.add_interaction(Interaction(src, dst, kind))
    return graph.freeze()


def group_metrics(group_id: str, size: int = 5, origin: GroupOrigin = GroupOrigin.DECLARED, **values) -> GroupMetrics:
    """Metric record with every value undefined except the given columns (``comment_r_int=0.5``)."""
    missing = Undefined("not set")
    kinds = {}
    for kind in INTERACTION_TYPES:
        p = kind.value
        kinds[kind] = KindMetrics(
            e_int=int(values.get(f"{p}_E_int", 0)),
            r_int=values.get(f"{p}_r_int", missing),
            r_ext=values.get(f"{p}_r_ext", missing),
            t=values.get(f"{p}_t", missing),
            u=values.get(f"{p}_u", missing),
            a=values.get(f"{p}_a", missing),
            b=values.get(f"{p}_b", missing),
        )
    channels = {
        channel: ChannelMetrics(
            terms=0,
            H=values.get(f"{channel.value}_H", missing),
            h=values.get(f"{channel.value}_h", missing),
        )
        for channel in TERM_CHANNELS
    }
    return GroupMetrics(group_id=group_id, origin=origin, size=size, kinds=kinds, channels=channels)


@pytest.fixture
def corpus_files(tmp_path) -> dict[str, Path]:
    """Clean four-file corpus: two declared groups, one detected group, labels for the declared ones."""
    interactions = write_tsv(
        tmp_path / "interactions.tsv",
        [
            ("a", "b", "comment", "p1", "100"),
            ("b", "a", "comment", "p2", "101"),
            ("b", "c", "comment", "p3", "102"),
            ("c", "d", "comment", "p4", "103"),
            ("d", "e", "comment", "p5", "104"),
            ("e", "d", "comment", "p6", "105"),
            ("a", "b", "favorite", "p1", "106"),
            ("d", "e", "favorite", "p5", "107"),
            ("a", "b", "contact", "-", "108"),
            ("e", "f", "contact", "-", "-"),
        ],
    )
    groups = write_tsv(
        tmp_path / "groups.tsv",
        [
            ("g1", "declared", "a"),
            ("g1", "declared", "b"),
            ("g1", "declared", "c"),
            ("g2", "declared", "d"),
            ("g2", "declared", "e"),
            ("g2", "declared", "f"),
            ("d1", "detected", "a"),
            ("d1", "detected", "b"),
        ],
    )
    terms = write_tsv(
        tmp_path / "terms.tsv",
        [
            ("g1", "pool", "sunset", "3"),
            ("g1", "pool", "beach", "1"),
            ("g1", "comment", "party", "2"),
            ("g2", "pool", "macro", "4"),
            ("g2", "favorite", "bug", "1"),
            ("d1", "comment", "party", "1"),
        ],
    )
    labels = write_tsv(tmp_path / "labels.tsv", [("g1", "social"), ("g2", "topical")])
    return {"interactions": interactions, "groups": groups, "terms": terms, "labels": labels}


@pytest.fixture
def small_synth_config() -> SynthConfig:
    """A corpus small enough for end-to-end tests, with both labels and both origins."""
    return SynthConfig(
        seed=7,
        users=300,
        social_groups=12,
        topical_groups=12,
        social_mean_size=6.0,
        topical_mean_size=12.0,
        detected_groups=10,
        vocabulary=200,
        terms_min=20,
        terms_max=120,
        background_degree=3.0,
    )
