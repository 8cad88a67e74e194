"""Number formatting, digests and JSON output helpers."""

import hashlib
import json
import math
from pathlib import Path
from typing import Any

from models.metrics import Undefined


def format_number(value) -> str:
    """Shortest round-trip decimal form; empty string for undefined values.

    Args:
        value: int, float or Undefined

    Returns:
        str: Formatted value
    """
    if value is None or isinstance(value, Undefined):
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return ""
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def parse_number(text: str):
    """Inverse of :func:`format_number`: empty -> None, otherwise float."""
    text = text.strip()
    if not text:
        return None
    return float(text)


def file_digest(path: Path) -> str:
    """SHA-256 hex digest of a file's contents."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def to_jsonable(value: Any) -> Any:
    """Convert report values to JSON-safe types (NaN/Undefined -> None)."""
    if isinstance(value, Undefined):
        return None
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, "tolist"):
        return to_jsonable(value.tolist())
    if isinstance(value, float) and (math.isnan(value) or math.isinf(value)):
        return None
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


def write_json(path: Path, payload: dict) -> None:
    """Write a report deterministically (sorted keys, fixed indent, trailing newline)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(to_jsonable(payload), f, indent=2, sort_keys=True)
        f.write("\n")
