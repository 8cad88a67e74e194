"""Interaction data model: typed, directed user-to-user interactions."""

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Optional

from models.errors import SchemaError


class InteractionType(str, Enum):
    """The three kinds of pairwise, directed interactions."""

    COMMENT = "comment"
    FAVORITE = "favorite"
    CONTACT = "contact"

    def __str__(self) -> str:
        return self.value


INTERACTION_TYPES = tuple(InteractionType)


@dataclass(frozen=True)
class Interaction:
    """One directed interaction from ``src`` to ``dst``."""

    src: str
    dst: str
    kind: InteractionType
    photo: Optional[str] = None
    timestamp: Optional[int] = None

    def __post_init__(self):
        if not self.src or not self.dst:
            raise SchemaError("user ids must be non-empty")
        if any(c.isspace() for c in self.src + self.dst):
            raise SchemaError(f"user ids must not contain whitespace: {self.src!r} -> {self.dst!r}")
        if self.kind is InteractionType.CONTACT and self.photo is not None:
            raise SchemaError(f"contact interaction {self.src} -> {self.dst} carries photo {self.photo!r}")

    @property
    def is_self_loop(self) -> bool:
        return self.src == self.dst


class InteractionGraph:
    """Typed directed multigraph with a per-kind directed-dyad index.

    Arcs are stored as dyad multiplicities: ``dyads[kind][(u, v)]`` is the
    number of ``kind`` interactions from ``u`` to ``v``. Contact dyads never
    exceed multiplicity 1. Once frozen the graph is read-only and can be
    shared between threads.
    """

    def __init__(self):
        self._nodes: set[str] = set()
        self._dyads: dict[InteractionType, dict[tuple[str, str], int]] = {
            kind: {} for kind in INTERACTION_TYPES
        }
        self._out: dict[InteractionType, dict[str, set[str]]] = {kind: {} for kind in INTERACTION_TYPES}
        self._in: dict[InteractionType, dict[str, set[str]]] = {kind: {} for kind in INTERACTION_TYPES}
        self._out_degree: dict[InteractionType, Counter] = {kind: Counter() for kind in INTERACTION_TYPES}
        self._in_degree: dict[InteractionType, Counter] = {kind: Counter() for kind in INTERACTION_TYPES}
        self._arcs: Counter = Counter()
        self._frozen = False

    # -- construction -----------------------------------------------------

    def _check_mutable(self):
        if self._frozen:
            raise RuntimeError("InteractionGraph is frozen")

    def add_node(self, user: str):
        """Add a (possibly isolated) user."""
        self._check_mutable()
        self._nodes.add(user)

    def add_interaction(self, interaction: Interaction) -> bool:
        """Add one interaction.

        Args:
            interaction: Interaction to add (self-loops must be filtered by the caller)

        Returns:
            bool: False if the interaction was a duplicate contact and was collapsed
        """
        self._check_mutable()
        if interaction.is_self_loop:
            raise ValueError(f"self-loop {interaction.src} -> {interaction.src} is not allowed")

        kind = interaction.kind
        key = (interaction.src, interaction.dst)
        dyads = self._dyads[kind]

        if kind is InteractionType.CONTACT and key in dyads:
            return False

        self._nodes.add(interaction.src)
        self._nodes.add(interaction.dst)
        if key not in dyads:
            self._out[kind].setdefault(interaction.src, set()).add(interaction.dst)
            self._in[kind].setdefault(interaction.dst, set()).add(interaction.src)
        dyads[key] = dyads.get(key, 0) + 1
        self._out_degree[kind][interaction.src] += 1
        self._in_degree[kind][interaction.dst] += 1
        self._arcs[kind] += 1
        return True

    def freeze(self) -> "InteractionGraph":
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def with_nodes(self, users: Iterable[str]) -> "InteractionGraph":
        """Return a frozen copy that also contains ``users`` as (isolated) nodes.

        Arc indexes are shared with this graph, which is safe because both
        graphs are read-only.
        """
        extra = set(users) - self._nodes
        if not extra and self._frozen:
            return self
        clone = InteractionGraph.__new__(InteractionGraph)
        clone.__dict__.update(self.__dict__)
        clone._nodes = self._nodes | extra
        clone._frozen = True
        return clone

    def without_kind(self, kind: InteractionType) -> "InteractionGraph":
        """Return a frozen copy with every arc of ``kind`` removed (nodes kept)."""
        clone = InteractionGraph()
        clone._nodes = set(self._nodes)
        for other in INTERACTION_TYPES:
            if other is kind:
                continue
            clone._dyads[other] = self._dyads[other]
            clone._out[other] = self._out[other]
            clone._in[other] = self._in[other]
            clone._out_degree[other] = self._out_degree[other]
            clone._in_degree[other] = self._in_degree[other]
            clone._arcs[other] = self._arcs[other]
        return clone.freeze()

    # -- queries ----------------------------------------------------------

    @property
    def nodes(self) -> frozenset[str]:
        return frozenset(self._nodes)

    def has_node(self, user: str) -> bool:
        return user in self._nodes

    def node_count(self) -> int:
        """N: number of users in the corpus."""
        return len(self._nodes)

    def arc_count(self, kind: InteractionType) -> int:
        """E: number of arcs (interactions, multiplicities included) of ``kind``."""
        return self._arcs[kind]

    def dyad_count(self, kind: InteractionType) -> int:
        """Number of distinct directed dyads of ``kind``."""
        return len(self._dyads[kind])

    def multiplicity(self, kind: InteractionType, src: str, dst: str) -> int:
        return self._dyads[kind].get((src, dst), 0)

    def has_dyad(self, kind: InteractionType, src: str, dst: str) -> bool:
        return (src, dst) in self._dyads[kind]

    def dyads(self, kind: InteractionType) -> Iterator[tuple[tuple[str, str], int]]:
        """Iterate ``((src, dst), multiplicity)`` pairs of ``kind``."""
        return iter(self._dyads[kind].items())

    def out_degree(self, kind: InteractionType, user: str) -> int:
        """D_out of one user: interactions of ``kind`` it originated."""
        return self._out_degree[kind][user]

    def in_degree(self, kind: InteractionType, user: str) -> int:
        """D_in of one user: interactions of ``kind`` targeted at it."""
        return self._in_degree[kind][user]

    # Raw neighbor sets for hot loops; callers must not mutate them.
    def _successor_sets(self, kind: InteractionType) -> dict[str, set[str]]:
        return self._out[kind]

    def _predecessor_sets(self, kind: InteractionType) -> dict[str, set[str]]:
        return self._in[kind]

    def summary(self) -> dict:
        """Totals per kind, in the shape of a dataset summary table."""
        return {
            "nodes": self.node_count(),
            "arcs": {kind.value: self.arc_count(kind) for kind in INTERACTION_TYPES},
            "dyads": {kind.value: self.dyad_count(kind) for kind in INTERACTION_TYPES},
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, InteractionGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._dyads == other._dyads

    def __repr__(self) -> str:
        arcs = ", ".join(f"{kind.value}={self._arcs[kind]}" for kind in INTERACTION_TYPES)
        return f"InteractionGraph(N={len(self._nodes)}, {arcs})"
