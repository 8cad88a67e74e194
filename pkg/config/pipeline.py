"""Pipeline run configuration, read from a key=value file."""

import dataclasses
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from dotenv import dotenv_values

from config.settings import (
    CHI2_BINS,
    CV_FOLDS,
    DEFAULT_CONFIG_PATH,
    FOREST_MAX_DEPTH,
    FOREST_TREES,
    MEAN_UNIVERSE,
    MEAN_UNIVERSES,
    OVERLAP_PERCENTILES,
    THREADS,
    TOP_K_FEATURES,
)
from models.errors import DataError

logger = logging.getLogger(__name__)

_PATH_KEYS = ("interactions", "groups", "terms", "labels", "out")
_TRUE = ("1", "true", "yes", "on")
_FALSE = ("0", "false", "no", "off")


@dataclass
class PipelineConfig:
    """Inputs, output directory and settings of a full pipeline run.

    Relative paths in the file resolve against the file's own directory.
    """

    interactions: Optional[Path] = None
    groups: Optional[Path] = None
    terms: Optional[Path] = None
    labels: Optional[Path] = None
    out: Path = Path("out")
    seed: Optional[int] = None
    universe: str = MEAN_UNIVERSE
    folds: int = CV_FOLDS
    top_k: int = TOP_K_FEATURES
    chi2_bins: int = CHI2_BINS
    trees: int = FOREST_TREES
    max_depth: int = FOREST_MAX_DEPTH
    percentiles: list[float] = field(default_factory=lambda: list(OVERLAP_PERCENTILES))
    threads: int = THREADS
    strict: bool = False

    def validate(self):
        """Raises:
        DataError: If a required input is missing or a value is out of range
        """
        if self.interactions is None or self.groups is None:
            raise DataError("pipeline config needs at least 'interactions' and 'groups'")
        if self.universe not in MEAN_UNIVERSES:
            raise DataError(f"universe must be one of {', '.join(MEAN_UNIVERSES)}, got {self.universe!r}")
        if self.folds < 2:
            raise DataError(f"folds must be >= 2, got {self.folds}")
        if self.top_k < 1:
            raise DataError(f"top_k must be >= 1, got {self.top_k}")
        if any(not 0 < p < 100 for p in self.percentiles):
            raise DataError("percentiles must lie strictly between 0 and 100")

    def to_dict(self) -> dict:
        data = dataclasses.asdict(self)
        for key in _PATH_KEYS:
            if data[key] is not None:
                data[key] = str(data[key])
        return data


def _parse(key: str, text: str, base: Path):
    try:
        if key in _PATH_KEYS:
            path = Path(text).expanduser()
            return path if path.is_absolute() else base / path
        if key in ("seed", "folds", "top_k", "chi2_bins", "trees", "max_depth", "threads"):
            return int(text)
        if key == "percentiles":
            return [float(p) for p in text.split(",") if p.strip()]
        if key == "strict":
            lowered = text.lower()
            if lowered not in _TRUE + _FALSE:
                raise ValueError(f"expected a boolean, got {text!r}")
            return lowered in _TRUE
        return text.lower()
    except ValueError as e:
        raise DataError(f"pipeline config key {key}: {e}")


def load_pipeline_config(path: Optional[Path] = None) -> PipelineConfig:
    """Read the pipeline config from ``path``, or from GROUPTYPE_CONFIG when omitted.

    Args:
        path: key=value config file

    Returns:
        PipelineConfig: Parsed configuration (not yet validated)
    """
    if path is None:
        default = os.getenv("GROUPTYPE_CONFIG", DEFAULT_CONFIG_PATH)
        if not default:
            raise DataError("no pipeline config given and GROUPTYPE_CONFIG is not set")
        path = Path(default)
    path = Path(path)
    if not path.exists():
        raise DataError(f"pipeline config not found: {path}")

    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    values = {}
    for key, text in dotenv_values(path).items():
        name = key.strip().lower()
        if name not in known:
            raise DataError(f"unknown pipeline config key {key!r}")
        if text is None or not text.strip():
            continue
        values[name] = _parse(name, text.strip(), path.parent)
    logger.debug(f"pipeline config from {path}: {sorted(values)}")
    return PipelineConfig(**values)
