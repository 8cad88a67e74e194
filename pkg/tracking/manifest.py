"""Run manifests: what a report was computed from."""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from config.settings import TOOL_NAME, TOOL_VERSION
from utils.formatting import file_digest, to_jsonable, write_json

logger = logging.getLogger(__name__)


@dataclass
class RunManifest:
    """Command, inputs, configuration and seed of one run.

    The manifest embedded in a report holds no timing or thread count, so
    identical manifests go with byte-identical reports. Wall time and
    threads are written next to the report instead (see :meth:`write_sidecar`).
    """

    command: str
    seed: Optional[int] = None
    config: dict[str, Any] = field(default_factory=dict)
    inputs: dict[str, str] = field(default_factory=dict)
    threads: int = 1
    started: float = field(default_factory=time.perf_counter)

    def add_input(self, role: str, path: Optional[Path]):
        """Record the SHA-256 digest of an input file (skipped when absent)."""
        if path is None:
            return
        path = Path(path)
        self.inputs[role] = file_digest(path)
        logger.debug(f"input {role}: {path} sha256={self.inputs[role][:12]}")

    def set_config(self, **values):
        self.config.update(to_jsonable(values))

    @property
    def wall_time(self) -> float:
        return time.perf_counter() - self.started

    def to_dict(self) -> dict:
        return {
            "tool": TOOL_NAME,
            "tool_version": TOOL_VERSION,
            "command": self.command,
            "seed": self.seed,
            "config": dict(sorted(self.config.items())),
            "inputs": dict(sorted(self.inputs.items())),
        }

    def embed(self, report: dict) -> dict:
        """The report with this manifest under the ``manifest`` key."""
        return {**report, "manifest": self.to_dict()}

    def write_sidecar(self, report_path: Path) -> Path:
        """Write ``<report>.manifest.json`` with the manifest plus wall time and threads."""
        report_path = Path(report_path)
        sidecar = report_path.with_name(report_path.name + ".manifest.json")
        payload = self.to_dict()
        payload["wall_time_seconds"] = round(self.wall_time, 3)
        payload["threads"] = self.threads
        write_json(sidecar, payload)
        return sidecar
