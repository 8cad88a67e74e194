"""Read the four corpus TSV files into validated models."""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Container, Iterator, Optional

from models.errors import SchemaError
from models.group import Group, GroupOrigin, Label, TermBag, TermChannel
from models.interaction import Interaction, InteractionGraph, InteractionType

logger = logging.getLogger(__name__)

ABSENT = "-"


@dataclass
class IngestReport:
    """Row tallies and warnings collected while reading one file."""

    path: str
    rows: int = 0
    accepted: int = 0
    skipped: int = 0
    self_loops: int = 0
    duplicate_contacts: int = 0
    duplicate_rows: int = 0
    warnings: list[str] = field(default_factory=list)

    def warn(self, message: str):
        self.warnings.append(message)
        logger.warning(message)

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "rows": self.rows,
            "accepted": self.accepted,
            "skipped": self.skipped,
            "self_loops": self.self_loops,
            "duplicate_contacts": self.duplicate_contacts,
            "duplicate_rows": self.duplicate_rows,
            "warnings": list(self.warnings),
        }


def _optional(value: str) -> Optional[str]:
    return None if value in ("", ABSENT) else value


class CorpusReader:
    """Read corpus files, in strict or lenient mode.

    In strict mode the first malformed row aborts with a :class:`SchemaError`
    naming the file and row. In lenient mode malformed rows are skipped and
    tallied. Schema violations that make the data meaningless (a contact with
    a photo, a pool bag on a detected group) abort in both modes.
    """

    def __init__(self, strict: bool = False):
        """Initialize reader.

        Args:
            strict: Abort on the first malformed row
        """
        self.strict = strict
        self.reports: list[IngestReport] = []

    def _reject(self, report: IngestReport, message: str, row: int):
        if self.strict:
            raise SchemaError(message, path=report.path, row=row)
        report.skipped += 1
        report.warn(f"{report.path}:{row}: skipped: {message}")

    def _rows(self, path: Path, report: IngestReport) -> Iterator[tuple[int, list[str]]]:
        """Yield ``(row_number, fields)`` for every data line; row numbers are 1-based file lines.

        Lines that are not valid UTF-8 count as rows and go through :meth:`_reject`.
        """
        with open(path, "rb") as f:
            for number, raw in enumerate(f, start=1):
                try:
                    line = raw.decode("utf-8").rstrip("\r\n")
                except UnicodeDecodeError as e:
                    report.rows += 1
                    self._reject(report, f"invalid UTF-8 at byte {e.start}", number)
                    continue
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                yield number, [part.strip() for part in line.split("\t")]

    def read_interactions(self, path: Path) -> InteractionGraph:
        """Read interactions.tsv.

        Args:
            path: File with ``src dst kind photo timestamp`` rows

        Returns:
            InteractionGraph: Frozen graph; self-loops dropped, duplicate contacts collapsed
        """
        report = IngestReport(path=str(path))
        self.reports.append(report)
        graph = InteractionGraph()

        for row, fields in self._rows(Path(path), report):
            report.rows += 1
            if len(fields) != 5:
                self._reject(report, f"expected 5 fields, got {len(fields)}", row)
                continue

            src, dst, kind_token, photo_token, ts_token = fields
            try:
                kind = InteractionType(kind_token)
            except ValueError:
                self._reject(report, f"unknown interaction kind {kind_token!r}", row)
                continue

            timestamp = None
            if _optional(ts_token) is not None:
                try:
                    timestamp = int(ts_token)
                except ValueError:
                    self._reject(report, f"timestamp {ts_token!r} is not an integer", row)
                    continue

            photo = _optional(photo_token)
            if kind is InteractionType.CONTACT and photo is not None:
                raise SchemaError(f"contact row carries photo id {photo!r}", path=report.path, row=row)

            try:
                interaction = Interaction(src, dst, kind, photo, timestamp)
            except SchemaError as e:
                self._reject(report, str(e), row)
                continue

            if interaction.is_self_loop:
                report.self_loops += 1
                continue

            if not graph.add_interaction(interaction):
                report.duplicate_contacts += 1
                continue
            report.accepted += 1

        if report.self_loops:
            logger.info(f"{path}: dropped {report.self_loops} self-interaction(s)")
        if report.duplicate_contacts:
            report.warn(f"{path}: collapsed {report.duplicate_contacts} duplicate contact row(s)")

        return graph.freeze()

    def read_groups(self, path: Path) -> dict[str, Group]:
        """Read groups.tsv.

        Args:
            path: File with ``group_id origin member_id`` rows

        Returns:
            dict: Groups keyed by id, in id order
        """
        report = IngestReport(path=str(path))
        self.reports.append(report)
        origins: dict[str, GroupOrigin] = {}
        members: dict[str, set[str]] = defaultdict(set)

        for row, fields in self._rows(Path(path), report):
            report.rows += 1
            if len(fields) != 3:
                self._reject(report, f"expected 3 fields, got {len(fields)}", row)
                continue

            group_id, origin_token, member = fields
            try:
                origin = GroupOrigin(origin_token)
            except ValueError:
                raise SchemaError(f"unknown group origin {origin_token!r}", path=report.path, row=row)

            if origins.setdefault(group_id, origin) is not origin:
                raise SchemaError(
                    f"group {group_id!r} declared as both {origins[group_id]} and {origin}",
                    path=report.path,
                    row=row,
                )

            if _optional(member) is None:
                # group listed without a member; caught below if it stays empty
                members.setdefault(group_id, set())
                continue
            if any(c.isspace() for c in member):
                self._reject(report, f"member id {member!r} contains whitespace", row)
                continue

            if member in members[group_id]:
                report.duplicate_rows += 1
                continue
            members[group_id].add(member)
            report.accepted += 1

        groups = {}
        for group_id in sorted(origins):
            if not members[group_id]:
                raise SchemaError(f"group {group_id!r} has no members", path=report.path)
            groups[group_id] = Group(group_id, origins[group_id], frozenset(members[group_id]))

        if report.duplicate_rows:
            report.warn(f"{path}: collapsed {report.duplicate_rows} duplicate membership row(s)")
        return groups

    def read_terms(self, path: Path, groups: dict[str, Group]) -> dict[tuple[str, TermChannel], TermBag]:
        """Read terms.tsv.

        Args:
            path: File with ``group_id channel tag count`` rows
            groups: Groups the rows must refer to

        Returns:
            dict: One TermBag per (group id, channel) present in the file
        """
        report = IngestReport(path=str(path))
        self.reports.append(report)
        counts: dict[tuple[str, TermChannel], dict[str, int]] = defaultdict(dict)

        for row, fields in self._rows(Path(path), report):
            report.rows += 1
            if len(fields) != 4:
                self._reject(report, f"expected 4 fields, got {len(fields)}", row)
                continue

            group_id, channel_token, tag, count_token = fields
            group = groups.get(group_id)
            if group is None:
                self._reject(report, f"unknown group {group_id!r}", row)
                continue

            try:
                channel = TermChannel(channel_token)
            except ValueError:
                self._reject(report, f"unknown term channel {channel_token!r}", row)
                continue

            if channel is TermChannel.POOL and group.origin is GroupOrigin.DETECTED:
                raise SchemaError(
                    f"pool channel attached to detected group {group_id!r}", path=report.path, row=row
                )

            try:
                count = int(count_token)
            except ValueError:
                self._reject(report, f"count {count_token!r} is not an integer", row)
                continue
            if count < 1:
                raise SchemaError(f"nonpositive count {count} for tag {tag!r}", path=report.path, row=row)
            if not tag:
                self._reject(report, "empty tag", row)
                continue

            bag = counts[(group_id, channel)]
            if tag in bag:
                report.duplicate_rows += 1
            bag[tag] = bag.get(tag, 0) + count
            report.accepted += 1

        return {
            key: TermBag(key[0], key[1], bag)
            for key, bag in sorted(counts.items(), key=lambda item: (item[0][0], item[0][1].value))
        }

    def read_labels(self, path: Path, groups: Container[str]) -> dict[str, Label]:
        """Read labels.tsv.

        Args:
            path: File with ``group_id label`` rows
            groups: Group ids (or groups keyed by id) the labels must refer to

        Returns:
            dict: Label per group id
        """
        report = IngestReport(path=str(path))
        self.reports.append(report)
        labels: dict[str, Label] = {}

        for row, fields in self._rows(Path(path), report):
            report.rows += 1
            if len(fields) != 2:
                self._reject(report, f"expected 2 fields, got {len(fields)}", row)
                continue

            group_id, label_token = fields
            try:
                label = Label(label_token)
            except ValueError:
                self._reject(report, f"unknown label {label_token!r}", row)
                continue
            if group_id not in groups:
                self._reject(report, f"label for unknown group {group_id!r}", row)
                continue
            if group_id in labels and labels[group_id] is not label:
                self._reject(report, f"conflicting labels for group {group_id!r}", row)
                continue

            labels[group_id] = label
            report.accepted += 1

        return dict(sorted(labels.items()))

    def warning_count(self) -> int:
        return sum(len(report.warnings) for report in self.reports)


def ingest_interactions(path: Path, strict: bool = False) -> InteractionGraph:
    """Read interactions.tsv into a frozen InteractionGraph."""
    return CorpusReader(strict=strict).read_interactions(path)


def ingest_groups(path: Path, strict: bool = False) -> dict[str, Group]:
    """Read groups.tsv into groups keyed by id."""
    return CorpusReader(strict=strict).read_groups(path)


def ingest_terms(path: Path, groups: dict[str, Group], strict: bool = False) -> dict[tuple[str, TermChannel], TermBag]:
    """Read terms.tsv into one TermBag per (group, channel)."""
    return CorpusReader(strict=strict).read_terms(path, groups)


def ingest_labels(path: Path, groups: Container[str], strict: bool = False) -> dict[str, Label]:
    """Read labels.tsv into a label per group id."""
    return CorpusReader(strict=strict).read_labels(path, groups)
