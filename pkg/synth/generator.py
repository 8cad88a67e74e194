"""Seeded generator of synthetic corpora with planted social and topical groups."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from models.group import GroupOrigin, Label, TermChannel
from ingest.reader import ABSENT
from models.interaction import InteractionType
from synth.config import SynthConfig, sample_sizes

logger = logging.getLogger(__name__)

SOCIAL = "social"
TOPICAL = "topical"
MIXED = "mixed"

_TIME_START = 1_200_000_000
_TIME_SPAN = 200_000_000
_PHOTOS_PER_USER = 20


@dataclass
class GroupPlan:
    """What to plant in one group: its members, its generative type and tag profile."""

    id: str
    origin: GroupOrigin
    kind: str
    members: np.ndarray
    tag_profile: np.ndarray
    label: Optional[Label] = None
    source: Optional[str] = None


@dataclass
class SyntheticCorpus:
    """Rows of the four corpus files, in emission order."""

    config: SynthConfig
    interactions: list[tuple[str, str, str, str, str]] = field(default_factory=list)
    memberships: list[tuple[str, str, str]] = field(default_factory=list)
    terms: list[tuple[str, str, str, int]] = field(default_factory=list)
    labels: list[tuple[str, str]] = field(default_factory=list)
    plans: list[GroupPlan] = field(default_factory=list)

    def kinds(self) -> dict[str, str]:
        """Generative type of every declared group (social, topical or mixed)."""
        return {p.id: p.kind for p in self.plans if p.origin is GroupOrigin.DECLARED}

    def write(self, out_dir: Path) -> dict[str, Path]:
        """Write interactions.tsv, groups.tsv, terms.tsv and labels.tsv.

        Returns:
            dict: File role -> path
        """
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = {
            "interactions": out_dir / "interactions.tsv",
            "groups": out_dir / "groups.tsv",
            "terms": out_dir / "terms.tsv",
            "labels": out_dir / "labels.tsv",
        }
        _write_rows(paths["interactions"], self.interactions)
        _write_rows(paths["groups"], self.memberships)
        _write_rows(paths["terms"], self.terms)
        _write_rows(paths["labels"], self.labels)
        logger.info(
            f"wrote {len(self.interactions)} interaction(s), {len(self.plans)} group(s) "
            f"and {len(self.labels)} label(s) to {out_dir}"
        )
        return paths


def _write_rows(path: Path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        for row in rows:
            f.write("\t".join(str(v) for v in row))
            f.write("\n")


def user_id(index: int) -> str:
    return f"u{index:06d}"


def tag_id(index: int) -> str:
    return f"t{index:05d}"


class _Emitter:
    """Turns directed arcs into comment and favorite rows, and contact arcs into contact rows."""

    def __init__(self, corpus: SyntheticCorpus, rng: np.random.Generator):
        self.corpus = corpus
        self.config = corpus.config
        self.rng = rng
        self.contacts: set[tuple[int, int]] = set()

    def _photo(self, owner: int) -> str:
        return f"p{owner:06d}-{int(self.rng.integers(_PHOTOS_PER_USER)):02d}"

    def _time(self) -> str:
        return str(_TIME_START + int(self.rng.integers(_TIME_SPAN)))

    def arc(self, src: int, dst: int, comment_rate: float):
        if src == dst:
            return
        rows = self.corpus.interactions
        comments = 1 + int(self.rng.poisson(comment_rate - 1.0))
        for _ in range(comments):
            rows.append((user_id(src), user_id(dst), InteractionType.COMMENT.value, self._photo(dst), self._time()))
        if self.rng.random() < self.config.favorite_probability:
            rows.append((user_id(src), user_id(dst), InteractionType.FAVORITE.value, self._photo(dst), self._time()))

    def contact(self, src: int, dst: int):
        if src == dst or (src, dst) in self.contacts:
            return
        self.contacts.add((src, dst))
        self.corpus.interactions.append(
            (user_id(src), user_id(dst), InteractionType.CONTACT.value, ABSENT, self._time())
        )

    def contact_pair(self, u: int, v: int):
        self.contact(u, v)
        if self.rng.random() < self.config.contact_reciprocity:
            self.contact(v, u)

    def pair(self, u: int, v: int, reciprocity: float, comment_rate: float):
        """One arc u->v, answered by v->u with probability ``reciprocity``."""
        self.arc(u, v, comment_rate)
        if self.rng.random() < reciprocity:
            self.arc(v, u, comment_rate)


def _mix(config: SynthConfig, kind: str) -> tuple[float, float, float]:
    """(reciprocity, comment rate, tag concentration) of a group type."""
    social = (
        config.social_reciprocity,
        config.comment_rate * config.social_comment_multiplier,
        config.social_concentration,
    )
    topical = (config.topical_reciprocity, config.comment_rate, config.topical_concentration)
    if kind == SOCIAL:
        return social
    if kind == TOPICAL:
        return topical
    return (
        (social[0] + topical[0]) / 2,
        max(1.0, (social[1] + topical[1]) / 2),
        float(np.sqrt(social[2] * topical[2])),
    )


def _tag_profile(rng: np.random.Generator, vocabulary: int, concentration: float) -> np.ndarray:
    # symmetric Dirichlet through normalized gamma draws
    weights = rng.gamma(concentration, size=vocabulary)
    total = weights.sum()
    if total <= 0:
        weights = np.zeros(vocabulary)
        weights[int(rng.integers(vocabulary))] = 1.0
        return weights
    return weights / total


def _member_pairs(rng: np.random.Generator, members: np.ndarray, degree: float):
    """Yield member pairs in random orientation, each pair kept with probability degree / (s - 1)."""
    s = len(members)
    if s < 2:
        return
    p = min(1.0, degree / (s - 1))
    rows, cols = np.triu_indices(s, k=1)
    for i in np.flatnonzero(rng.random(rows.size) < p):
        u, v = int(members[rows[i]]), int(members[cols[i]])
        if rng.random() < 0.5:
            u, v = v, u
        yield u, v


def _social_interactions(emitter: _Emitter, members: np.ndarray, reciprocity: float, rate: float):
    for u, v in _member_pairs(emitter.rng, members, emitter.config.social_degree):
        emitter.pair(u, v, reciprocity, rate)


def _group_contacts(emitter: _Emitter, members: np.ndarray):
    for u, v in _member_pairs(emitter.rng, members, emitter.config.contact_degree):
        emitter.contact_pair(u, v)


def _topical_interactions(emitter: _Emitter, members: np.ndarray, reciprocity: float, rate: float):
    config, rng = emitter.config, emitter.rng
    s = len(members)
    hubs = max(1, int(round(config.topical_hub_fraction * s)))
    hub_ids = members[:hubs]
    for follower in members[hubs:]:
        arcs = int(rng.poisson(config.topical_degree))
        if arcs == 0:
            continue
        targets = np.unique(rng.choice(hub_ids, size=arcs, replace=True))
        for hub in targets:
            emitter.pair(int(follower), int(hub), reciprocity, rate)


def _random_arcs(rng: np.random.Generator, users: int, degree: float):
    arcs = int(round(degree * users))
    src = rng.integers(users, size=arcs)
    dst = rng.integers(users - 1, size=arcs)
    dst = np.where(dst >= src, dst + 1, dst)
    return [(int(u), int(v)) for u, v in zip(src, dst)]


def _background(emitter: _Emitter, users: int):
    config, rng = emitter.config, emitter.rng
    if users < 2:
        return
    for u, v in _random_arcs(rng, users, config.background_degree):
        emitter.pair(u, v, config.background_reciprocity, config.comment_rate)
    for u, v in _random_arcs(rng, users, config.background_contact_degree):
        emitter.contact_pair(u, v)


def _emit_terms(corpus: SyntheticCorpus, rng: np.random.Generator, plan: GroupPlan, channels):
    config = corpus.config
    for channel in channels:
        total = int(rng.integers(config.terms_min, config.terms_max + 1))
        counts = rng.multinomial(total, plan.tag_profile)
        for tag in np.flatnonzero(counts):
            corpus.terms.append((plan.id, channel.value, tag_id(int(tag)), int(counts[tag])))


def _group_id(prefix: str, index: int, count: int) -> str:
    return f"{prefix}{index + 1:0{max(4, len(str(count)))}d}"


def _declared_plans(config: SynthConfig, rng: np.random.Generator) -> list[GroupPlan]:
    base = [SOCIAL] * config.social_groups + [TOPICAL] * config.topical_groups
    base = [base[i] for i in rng.permutation(len(base))]
    social_sizes = iter(
        sample_sizes(rng, config.social_groups, config.social_mean_size, config.min_size, config.max_size)
    )
    topical_sizes = iter(
        sample_sizes(rng, config.topical_groups, config.topical_mean_size, config.min_size, config.max_size)
    )
    sizes = [int(next(social_sizes) if kind == SOCIAL else next(topical_sizes)) for kind in base]
    # mixed groups keep the size drawn for the type they replace
    n_mixed = int(round(config.mixed_fraction * len(base)))
    mixed = {int(i) for i in rng.permutation(len(base))[:n_mixed]}

    plans = []
    for index, (kind, size) in enumerate(zip(base, sizes)):
        if index in mixed:
            kind = MIXED
            label = Label.SOCIAL if rng.random() < 0.5 else Label.TOPICAL
        else:
            label = Label(kind)
        members = rng.choice(config.users, size=size, replace=False)
        _, _, concentration = _mix(config, kind)
        plans.append(
            GroupPlan(
                id=_group_id("g", index, len(base)),
                origin=GroupOrigin.DECLARED,
                kind=kind,
                members=members,
                tag_profile=_tag_profile(rng, config.vocabulary, concentration),
                label=label,
            )
        )
    return plans


def _detected_plans(config: SynthConfig, rng: np.random.Generator, declared: list[GroupPlan]) -> list[GroupPlan]:
    """Detected groups: perturbed copies of declared groups, plus random member sets."""
    planted = int(round(config.detected_planted_fraction * config.detected_groups)) if declared else 0
    kinds = [k for k, count in ((SOCIAL, config.social_groups), (TOPICAL, config.topical_groups)) if count] or [
        SOCIAL,
        TOPICAL,
    ]
    plans = []
    for index in range(config.detected_groups):
        gid = _group_id("d", index, config.detected_groups)
        if index < planted:
            source = declared[int(rng.integers(len(declared)))]
            kept = source.members[rng.random(len(source.members)) < config.detected_keep]
            missing = len(source.members) - len(kept)
            if missing:
                pool = np.setdiff1d(np.arange(config.users), kept)
                kept = np.concatenate([kept, rng.choice(pool, size=missing, replace=False)])
            plans.append(
                GroupPlan(
                    id=gid,
                    origin=GroupOrigin.DETECTED,
                    kind=source.kind,
                    members=kept,
                    tag_profile=source.tag_profile,
                    source=source.id,
                )
            )
            continue

        kind = kinds[int(rng.integers(len(kinds)))]
        mean = config.social_mean_size if kind == SOCIAL else config.topical_mean_size
        size = int(sample_sizes(rng, 1, mean, config.min_size, config.max_size)[0])
        _, _, concentration = _mix(config, kind)
        plans.append(
            GroupPlan(
                id=gid,
                origin=GroupOrigin.DETECTED,
                kind=kind,
                members=rng.choice(config.users, size=size, replace=False),
                tag_profile=_tag_profile(rng, config.vocabulary, concentration),
            )
        )
    return plans


def generate(config: SynthConfig) -> SyntheticCorpus:
    """Generate a corpus; identical configs (seed included) give identical rows.

    Declared groups are planted as social, topical or mixed; detected groups
    are noisy copies of declared ones or random member sets. A random
    background network connects all users.

    Args:
        config: Generator configuration with a seed

    Returns:
        SyntheticCorpus: Rows ready to be written

    Raises:
        InfeasibleConfigError: If the configuration cannot be realized
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    corpus = SyntheticCorpus(config=config)

    declared = _declared_plans(config, rng)
    detected = _detected_plans(config, rng, declared)
    corpus.plans = declared + detected

    emitter = _Emitter(corpus, rng)
    for plan in declared:
        reciprocity, rate, _ = _mix(config, plan.kind)
        if plan.kind == TOPICAL:
            _topical_interactions(emitter, plan.members, reciprocity, rate)
        else:
            _social_interactions(emitter, plan.members, reciprocity, rate)
        _group_contacts(emitter, plan.members)
    _background(emitter, config.users)

    for plan in corpus.plans:
        for member in sorted(int(m) for m in plan.members):
            corpus.memberships.append((plan.id, plan.origin.value, user_id(member)))
        channels = (
            (TermChannel.POOL, TermChannel.COMMENT, TermChannel.FAVORITE)
            if plan.origin is GroupOrigin.DECLARED
            else (TermChannel.COMMENT, TermChannel.FAVORITE)
        )
        _emit_terms(corpus, rng, plan, channels)
        if plan.label is not None:
            corpus.labels.append((plan.id, plan.label.value))

    logger.info(
        f"generated {len(declared)} declared and {len(detected)} detected group(s), "
        f"{len(corpus.interactions)} interaction row(s)"
    )
    return corpus
