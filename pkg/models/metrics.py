"""Per-group metric records."""

from dataclasses import dataclass, field
from typing import Union

from models.group import GroupOrigin, TermChannel, TERM_CHANNELS
from models.interaction import InteractionType, INTERACTION_TYPES


@dataclass(frozen=True)
class Undefined:
    """A metric value that cannot be computed, with the reason why."""

    reason: str

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        return f"undefined ({self.reason})"


Metric = Union[float, Undefined]


def is_defined(value) -> bool:
    """True if ``value`` is a number rather than an :class:`Undefined`."""
    return not isinstance(value, Undefined)


def as_float(value: Metric) -> float:
    """Numeric value, NaN for undefined."""
    return float("nan") if isinstance(value, Undefined) else float(value)


@dataclass(frozen=True)
class EdgePartition:
    """Dyad- and arc-level counts of one group for one interaction kind.

    Dyad counts feed reciprocity; arc counts (multiplicities included) feed
    the activity metrics.
    """

    group_id: str
    kind: InteractionType
    size: int
    internal_reciprocated: int = 0
    internal_nonreciprocated: int = 0
    internal_arcs: int = 0
    boundary_reciprocated: int = 0
    boundary_nonreciprocated: int = 0
    boundary_arcs: int = 0
    volume_in: int = 0
    volume_out: int = 0

    @property
    def internal_dyads(self) -> int:
        return self.internal_reciprocated + self.internal_nonreciprocated

    @property
    def boundary_dyads(self) -> int:
        return self.boundary_reciprocated + self.boundary_nonreciprocated


@dataclass(frozen=True)
class KindMetrics:
    """Metrics of one group for one interaction kind."""

    e_int: int
    r_int: Metric
    r_ext: Metric
    t: Metric
    u: Metric
    a: Metric
    b: Metric


@dataclass(frozen=True)
class ChannelMetrics:
    """Metrics of one group for one term channel."""

    terms: int
    H: Metric
    h: Metric


@dataclass(frozen=True)
class GroupMetrics:
    """Full metric record of one group."""

    group_id: str
    origin: GroupOrigin
    size: int
    kinds: dict[InteractionType, KindMetrics] = field(default_factory=dict)
    channels: dict[TermChannel, ChannelMetrics] = field(default_factory=dict)

    def kind(self, kind: InteractionType) -> KindMetrics:
        return self.kinds[kind]

    def channel(self, channel: TermChannel) -> ChannelMetrics:
        return self.channels[channel]

    def get(self, name: str) -> Metric:
        """Look up a metric by its column name, e.g. ``comment_t`` or ``pool_h``."""
        if name == "s_g":
            return float(self.size)
        prefix, _, attr = name.partition("_")
        for kind in INTERACTION_TYPES:
            if prefix == kind.value and attr in KIND_FIELDS:
                value = getattr(self.kinds[kind], KIND_FIELDS[attr])
                return float(value) if attr == "E_int" else value
        for channel in TERM_CHANNELS:
            if prefix == channel.value and attr in CHANNEL_FIELDS:
                return getattr(self.channels[channel], CHANNEL_FIELDS[attr])
        raise KeyError(name)


# column suffix -> dataclass attribute
KIND_FIELDS = {"E_int": "e_int", "r_int": "r_int", "r_ext": "r_ext", "t": "t", "u": "u", "a": "a", "b": "b"}
CHANNEL_FIELDS = {"H": "H", "h": "h"}


def metric_columns() -> list[str]:
    """Metric column names in metrics.csv order (after group_id, origin)."""
    columns = ["s_g"]
    for kind in INTERACTION_TYPES:
        columns.extend(f"{kind.value}_{suffix}" for suffix in KIND_FIELDS)
    for channel in TERM_CHANNELS:
        columns.extend(f"{channel.value}_{suffix}" for suffix in CHANNEL_FIELDS)
    return columns
