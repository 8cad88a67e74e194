"""Synthetic corpus configuration, read from key=value files."""

import dataclasses
import logging
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np
from dotenv import dotenv_values
from scipy.optimize import brentq

from models.errors import DataError, InfeasibleConfigError

logger = logging.getLogger(__name__)

# exponent search range of the truncated size power law
_ALPHA_RANGE = (0.0, 12.0)


@dataclass(frozen=True)
class SynthConfig:
    """Generative targets of a synthetic corpus.

    Social groups get dense, mostly reciprocated member pairs, dispersed tags
    and about twice the comment volume; topical groups get star-like
    attention towards a few hub members, rare reciprocation and peaked tags.
    """

    seed: Optional[int] = None
    users: int = 5000

    social_groups: int = 250
    topical_groups: int = 250
    social_mean_size: float = 35.0
    topical_mean_size: float = 172.0
    min_size: int = 2
    mixed_fraction: float = 0.1

    # expected internal partners per social member
    social_degree: float = 6.0
    social_reciprocity: float = 0.7
    # arcs per topical member towards the group's hubs
    topical_degree: float = 3.0
    topical_hub_fraction: float = 0.05
    topical_reciprocity: float = 0.1

    background_degree: float = 5.0
    background_reciprocity: float = 0.3

    # mean comments per topical arc; social arcs get social_comment_multiplier times as many
    comment_rate: float = 1.5
    social_comment_multiplier: float = 2.0
    favorite_probability: float = 0.5

    # contacts follow their own process, identical for every group type:
    # partners per member inside each declared group, plus random arcs per user
    contact_degree: float = 2.0
    background_contact_degree: float = 1.0
    contact_reciprocity: float = 0.5

    vocabulary: int = 2000
    social_concentration: float = 1.0
    topical_concentration: float = 0.05
    terms_min: int = 20
    terms_max: int = 400

    detected_groups: int = 100
    detected_planted_fraction: float = 0.5
    detected_keep: float = 0.8

    @property
    def max_size(self) -> int:
        return self.users // 10

    @property
    def declared_groups(self) -> int:
        return self.social_groups + self.topical_groups

    def with_seed(self, seed: Optional[int]) -> "SynthConfig":
        return self if seed is None else dataclasses.replace(self, seed=seed)

    def validate(self) -> None:
        """Check ranges and reachability.

        Raises:
            InfeasibleConfigError: If a value is out of range or a target cannot be met
        """
        if self.seed is None:
            raise InfeasibleConfigError("a seed is required")
        for name in (
            "mixed_fraction",
            "social_reciprocity",
            "topical_reciprocity",
            "background_reciprocity",
            "topical_hub_fraction",
            "favorite_probability",
            "contact_reciprocity",
            "detected_planted_fraction",
            "detected_keep",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InfeasibleConfigError(f"{name} must lie in [0, 1], got {value}")
        for name in ("social_groups", "topical_groups", "detected_groups", "users"):
            if getattr(self, name) < 0:
                raise InfeasibleConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.min_size < 2:
            raise InfeasibleConfigError(f"min_size must be >= 2, got {self.min_size}")
        if self.comment_rate < 1.0:
            raise InfeasibleConfigError(f"comment_rate must be >= 1, got {self.comment_rate}")
        if self.social_comment_multiplier <= 0:
            raise InfeasibleConfigError("social_comment_multiplier must be positive")
        if self.social_concentration <= 0 or self.topical_concentration <= 0:
            raise InfeasibleConfigError("tag concentrations must be positive")
        if self.vocabulary < 1:
            raise InfeasibleConfigError(f"vocabulary must be >= 1, got {self.vocabulary}")
        if not 1 <= self.terms_min <= self.terms_max:
            raise InfeasibleConfigError(f"need 1 <= terms_min <= terms_max, got {self.terms_min}, {self.terms_max}")
        if min(
            self.background_degree,
            self.social_degree,
            self.topical_degree,
            self.contact_degree,
            self.background_contact_degree,
        ) < 0:
            raise InfeasibleConfigError("degrees must be >= 0")
        for name in ("background_degree", "background_contact_degree"):
            if self.users > 1 and getattr(self, name) > self.users - 1:
                raise InfeasibleConfigError(
                    f"{name} {getattr(self, name)} exceeds the {self.users - 1} possible partners"
                )
        if self.declared_groups or self.detected_groups:
            if self.max_size < self.min_size:
                raise InfeasibleConfigError(
                    f"{self.users} users allow groups of at most {self.max_size} members, below min_size"
                )
            if self.detected_groups and self.detected_planted_fraction > 0 and self.declared_groups == 0:
                raise InfeasibleConfigError("planted detected groups need declared groups to copy")
            no_declared = self.declared_groups == 0
            for kind, mean, count in (
                ("social", self.social_mean_size, self.social_groups),
                ("topical", self.topical_mean_size, self.topical_groups),
            ):
                if count or no_declared:
                    size_exponent(mean, self.min_size, self.max_size, kind)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _mean_size(alpha: float, sizes: np.ndarray) -> float:
    weights = sizes ** (-alpha)
    return float((sizes * weights).sum() / weights.sum())


def size_exponent(mean: float, smin: int, smax: int, kind: str = "group") -> float:
    """Exponent of the discrete power law on [smin, smax] with the given mean.

    Raises:
        InfeasibleConfigError: If no exponent in the search range reaches the mean
    """
    sizes = np.arange(smin, smax + 1, dtype=np.float64)
    low, high = _ALPHA_RANGE
    top, bottom = _mean_size(low, sizes), _mean_size(high, sizes)
    if smin == smax:
        if mean != smin:
            raise InfeasibleConfigError(f"{kind} mean size {mean} unreachable: sizes are fixed at {smin}")
        return 0.0
    if not bottom <= mean <= top:
        raise InfeasibleConfigError(
            f"{kind} mean size {mean} unreachable with sizes in [{smin}, {smax}] "
            f"(feasible means {bottom:.1f} to {top:.1f})"
        )
    if mean == top:
        return low
    return float(brentq(lambda a: _mean_size(a, sizes) - mean, low, high, xtol=1e-10))


def sample_sizes(rng: np.random.Generator, count: int, mean: float, smin: int, smax: int) -> np.ndarray:
    """Draw ``count`` group sizes from the truncated power law fitted to ``mean``."""
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    alpha = size_exponent(mean, smin, smax)
    sizes = np.arange(smin, smax + 1)
    weights = sizes.astype(np.float64) ** (-alpha)
    return rng.choice(sizes, size=count, p=weights / weights.sum())


_FIELD_TYPES = {f.name: f.type for f in fields(SynthConfig)}


def _convert(name: str, text: str):
    kind = _FIELD_TYPES[name]
    try:
        if kind in (int, "int"):
            return int(text)
        if kind in (float, "float"):
            return float(text)
        return int(text)  # seed
    except ValueError:
        raise DataError(f"config key {name}: {text!r} is not a number")


def config_from_mapping(values: dict[str, Optional[str]]) -> SynthConfig:
    """Build a SynthConfig from string key/value pairs (keys are case-insensitive)."""
    kwargs = {}
    for key, text in values.items():
        name = key.strip().lower()
        if name not in _FIELD_TYPES:
            raise DataError(f"unknown synth config key {key!r}")
        if text is None or not text.strip():
            continue
        kwargs[name] = _convert(name, text.strip())
    return SynthConfig(**kwargs)


def load_config(path: Optional[Path] = None, seed: Optional[int] = None) -> SynthConfig:
    """Read a key=value config file; ``seed`` overrides the file's seed.

    Args:
        path: Config file (defaults apply when omitted)
        seed: Seed from the command line

    Returns:
        SynthConfig: Validated configuration
    """
    if path is None:
        config = SynthConfig()
    else:
        path = Path(path)
        if not path.exists():
            raise DataError(f"config file not found: {path}")
        config = config_from_mapping(dotenv_values(path))
    config = config.with_seed(seed)
    config.validate()
    logger.debug(f"synth config: {config.to_dict()}")
    return config
