"""Group and term-bag data models."""

from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Mapping, Optional

from models.errors import SchemaError


class GroupOrigin(str, Enum):
    """Where a group comes from: created by users, or found by an algorithm."""

    DECLARED = "declared"
    DETECTED = "detected"

    def __str__(self) -> str:
        return self.value


class Label(str, Enum):
    """Ground-truth group type."""

    SOCIAL = "social"
    TOPICAL = "topical"
    UNKNOWN = "unknown"

    def __str__(self) -> str:
        return self.value


class TermChannel(str, Enum):
    """Source of a group's terms: its photo pool, or photos commented/favorited between members."""

    POOL = "pool"
    COMMENT = "comment"
    FAVORITE = "favorite"

    def __str__(self) -> str:
        return self.value


TERM_CHANNELS = tuple(TermChannel)


@dataclass(frozen=True)
class Group:
    """A declared or detected group of users."""

    id: str
    origin: GroupOrigin
    members: frozenset[str]
    label: Optional[Label] = None

    def __post_init__(self):
        if not self.members:
            raise SchemaError(f"group {self.id!r} has no members")

    @property
    def size(self) -> int:
        """s_g: member count."""
        return len(self.members)

    def __str__(self) -> str:
        label = f", {self.label}" if self.label else ""
        return f"{self.id} ({self.origin}, {self.size} members{label})"


@dataclass(frozen=True)
class TermBag:
    """Multiset of tags attached to one group through one channel."""

    group_id: str
    channel: TermChannel
    counts: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for tag, count in self.counts.items():
            if count < 1:
                raise SchemaError(
                    f"tag {tag!r} of group {self.group_id!r} ({self.channel}) has nonpositive count {count}"
                )
        object.__setattr__(self, "counts", MappingProxyType(dict(sorted(self.counts.items()))))

    @property
    def total(self) -> int:
        """|T(g)|: total term occurrences."""
        return sum(self.counts.values())

    @property
    def distinct(self) -> int:
        return len(self.counts)

    def __len__(self) -> int:
        return self.total
