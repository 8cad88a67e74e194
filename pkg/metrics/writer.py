"""metrics.csv: one row per group, fixed header."""

import csv
from pathlib import Path
from typing import Iterable

from models.errors import SchemaError
from models.group import GroupOrigin, TERM_CHANNELS
from models.interaction import INTERACTION_TYPES
from models.metrics import ChannelMetrics, GroupMetrics, KindMetrics, Undefined, metric_columns
from utils.formatting import format_number, parse_number

HEADER = ["group_id", "origin"] + metric_columns()


def metrics_rows(metrics: Iterable[GroupMetrics]) -> list[list[str]]:
    """Format metric records as CSV rows (undefined -> empty field)."""
    rows = []
    for m in metrics:
        row = [m.group_id, m.origin.value, format_number(m.size)]
        for kind in INTERACTION_TYPES:
            k = m.kinds[kind]
            row.extend(format_number(v) for v in (k.e_int, k.r_int, k.r_ext, k.t, k.u, k.a, k.b))
        for channel in TERM_CHANNELS:
            c = m.channels[channel]
            row.extend(format_number(v) for v in (c.H, c.h))
        rows.append(row)
    return rows


def write_metrics_csv(metrics: Iterable[GroupMetrics], path: Path) -> None:
    """Write metrics.csv deterministically (LF line endings, records in the given order).

    Args:
        metrics: Metric records, already ordered by group id
        path: Output path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(HEADER)
        writer.writerows(metrics_rows(metrics))


def _value(text: str, column: str):
    value = parse_number(text)
    return Undefined(f"{column} empty in metrics file") if value is None else value


def read_metrics_csv(path: Path) -> list[GroupMetrics]:
    """Read metrics.csv back into metric records.

    Term counts per channel are not part of the file and come back as 0.

    Args:
        path: metrics.csv written by :func:`write_metrics_csv`

    Returns:
        list: Metric records in file order
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != HEADER:
            raise SchemaError("unexpected metrics.csv header", path=str(path), row=1)

        records = []
        for row_number, row in enumerate(reader, start=2):
            if len(row) != len(HEADER):
                raise SchemaError(f"expected {len(HEADER)} fields, got {len(row)}", path=str(path), row=row_number)
            fields = dict(zip(HEADER, row))
            try:
                origin = GroupOrigin(fields["origin"])
                size = int(float(fields["s_g"]))
            except ValueError as e:
                raise SchemaError(str(e), path=str(path), row=row_number)

            kinds = {}
            for kind in INTERACTION_TYPES:
                p = kind.value
                e_int = parse_number(fields[f"{p}_E_int"])
                kinds[kind] = KindMetrics(
                    e_int=int(e_int or 0),
                    r_int=_value(fields[f"{p}_r_int"], f"{p}_r_int"),
                    r_ext=_value(fields[f"{p}_r_ext"], f"{p}_r_ext"),
                    t=_value(fields[f"{p}_t"], f"{p}_t"),
                    u=_value(fields[f"{p}_u"], f"{p}_u"),
                    a=_value(fields[f"{p}_a"], f"{p}_a"),
                    b=_value(fields[f"{p}_b"], f"{p}_b"),
                )
            channels = {
                channel: ChannelMetrics(
                    terms=0,
                    H=_value(fields[f"{channel.value}_H"], f"{channel.value}_H"),
                    h=_value(fields[f"{channel.value}_h"], f"{channel.value}_h"),
                )
                for channel in TERM_CHANNELS
            }
            records.append(
                GroupMetrics(group_id=fields["group_id"], origin=origin, size=size, kinds=kinds, channels=channels)
            )
    return records
