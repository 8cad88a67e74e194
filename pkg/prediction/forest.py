"""Seeded bagged decision-tree ensemble for social/topical classification.

Trees are grown on bootstrap samples with Gini splits over a random feature
subset at every node. Each tree draws from its own generator seeded with
``(seed, tree_index)``, so a model depends only on the seed and the data,
never on how trees are scheduled across workers.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from config.settings import FOREST_MAX_DEPTH, FOREST_MIN_LEAF, FOREST_TREES, THREADS, TOOL_VERSION
from models.errors import DataError, EvaluationError
from models.group import Label
from prediction.features import FeatureTable
from utils.parallel import parallel_map

logger = logging.getLogger(__name__)

MODEL_FORMAT = "group-typer-forest"
MODEL_VERSION = 1

LEAF = -1


@dataclass(frozen=True)
class ForestConfig:
    trees: int = FOREST_TREES
    max_depth: int = FOREST_MAX_DEPTH
    min_leaf: int = FOREST_MIN_LEAF
    max_features: str = "sqrt"

    def __post_init__(self):
        if self.trees < 1:
            raise EvaluationError(f"trees must be >= 1, got {self.trees}")
        if self.max_depth < 1:
            raise EvaluationError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_leaf < 1:
            raise EvaluationError(f"min_leaf must be >= 1, got {self.min_leaf}")
        if self.max_features not in ("sqrt", "log2", "all"):
            raise EvaluationError(f"max_features must be sqrt, log2 or all, got {self.max_features!r}")

    def features_per_split(self, n_features: int) -> int:
        if self.max_features == "sqrt":
            return max(1, int(math.sqrt(n_features)))
        if self.max_features == "log2":
            return max(1, int(math.log2(n_features)))
        return n_features


@dataclass
class DecisionTree:
    """Array-encoded binary tree; ``value`` is the social fraction at each node."""

    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[float] = field(default_factory=list)
    features_used: list[int] = field(default_factory=list)

    def _add(self, value: float) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(value)
        return len(self.value) - 1

    @property
    def depth(self) -> int:
        depths = {0: 0}
        for node in range(len(self.feature)):
            if self.feature[node] != LEAF:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return max(depths.values())

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        out = np.empty(x.shape[0])
        for i, row in enumerate(x):
            node = 0
            while self.feature[node] != LEAF:
                if row[self.feature[node]] <= self.threshold[node]:
                    node = self.left[node]
                else:
                    node = self.right[node]
            out[i] = self.value[node]
        return out


def _best_split(
    x: np.ndarray,
    y: np.ndarray,
    candidates: np.ndarray,
    wanted: int,
    min_leaf: int,
) -> Optional[tuple[int, float]]:
    """Lowest weighted Gini split over the first ``wanted`` usable candidate features.

    Features that cannot be split (constant on the node) do not count
    towards ``wanted``; the search moves on down the candidate order.
    """
    n = len(y)
    total_pos = y.sum()
    best: Optional[tuple[float, int, float]] = None
    tried = 0
    for f in candidates:
        order = np.argsort(x[:, f], kind="stable")
        v = x[order, f]
        cpos = np.cumsum(y[order])[:-1]
        n_left = np.arange(1, n)
        valid = (v[:-1] < v[1:]) & (n_left >= min_leaf) & (n - n_left >= min_leaf)
        if not valid.any():
            continue
        tried += 1
        n_right = n - n_left
        p_left = cpos / n_left
        p_right = (total_pos - cpos) / n_right
        cost = (n_left * 2 * p_left * (1 - p_left) + n_right * 2 * p_right * (1 - p_right)) / n
        cost = np.where(valid, cost, np.inf)
        i = int(np.argmin(cost))
        if best is None or cost[i] < best[0]:
            best = (float(cost[i]), int(f), float(v[i] + (v[i + 1] - v[i]) / 2))
        if tried >= wanted:
            break
    if best is None:
        return None
    return best[1], best[2]


def grow_tree(x: np.ndarray, y: np.ndarray, config: ForestConfig, rng: np.random.Generator) -> DecisionTree:
    """Grow one tree on (x, y) depth-first; the rng drives the feature subsets."""
    tree = DecisionTree()
    wanted = config.features_per_split(x.shape[1])
    used: set[int] = set()

    root = tree._add(float(y.mean()))
    stack = [(root, np.arange(len(y)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        ys = y[idx]
        pos = ys.sum()
        if depth >= config.max_depth or len(idx) < 2 * config.min_leaf or pos == 0 or pos == len(ys):
            continue
        split = _best_split(x[idx], ys, rng.permutation(x.shape[1]), wanted, config.min_leaf)
        if split is None:
            continue
        f, threshold = split
        go_left = x[idx, f] <= threshold
        left_idx, right_idx = idx[go_left], idx[~go_left]
        tree.feature[node] = f
        tree.threshold[node] = threshold
        tree.left[node] = tree._add(float(y[left_idx].mean()))
        tree.right[node] = tree._add(float(y[right_idx].mean()))
        used.add(f)
        stack.append((tree.right[node], right_idx, depth + 1))
        stack.append((tree.left[node], left_idx, depth + 1))

    tree.features_used = sorted(used)
    return tree


def standardize(matrix: np.ndarray, means: np.ndarray, stds: np.ndarray) -> np.ndarray:
    """z-score with fixed statistics; NaN and zero-variance columns map to 0."""
    flat = stds == 0
    z = (matrix - means) / np.where(flat, 1.0, stds)
    z[:, flat] = 0.0
    return np.where(np.isnan(z), 0.0, z)


def _fit_stats(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    means = np.zeros(matrix.shape[1])
    stds = np.zeros(matrix.shape[1])
    for j in range(matrix.shape[1]):
        values = matrix[~np.isnan(matrix[:, j]), j]
        if values.size:
            means[j] = float(values.mean())
            stds[j] = float(values.std())
    return means, stds


@dataclass
class PredictionModel:
    """Trained ensemble with the statistics its inputs are standardized with."""

    feature_names: tuple[str, ...]
    means: np.ndarray
    stds: np.ndarray
    trees: list[DecisionTree]
    config: ForestConfig
    seed: int

    def _matrix(self, table: FeatureTable) -> np.ndarray:
        missing = [n for n in self.feature_names if n not in table.names]
        if missing:
            raise DataError(f"features missing for this model: {', '.join(missing)}")
        return standardize(table.select(self.feature_names).matrix, self.means, self.stds)

    def predict_proba(self, table: FeatureTable) -> np.ndarray:
        """Social probability per row: the mean of the trees' leaf fractions."""
        x = self._matrix(table)
        total = np.zeros(x.shape[0])
        for tree in self.trees:
            total += tree.predict_proba(x)
        return total / len(self.trees)

    def predict(self, table: FeatureTable) -> dict[str, Label]:
        proba = self.predict_proba(table)
        return {
            gid: Label.SOCIAL if p > 0.5 else Label.TOPICAL for gid, p in zip(table.group_ids, proba)
        }

    def feature_usage(self) -> dict[str, int]:
        """Number of trees splitting on each feature at least once."""
        counts = {name: 0 for name in self.feature_names}
        for tree in self.trees:
            for f in tree.features_used:
                counts[self.feature_names[f]] += 1
        return counts

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "tool_version": TOOL_VERSION,
            "seed": self.seed,
            "config": asdict(self.config),
            "feature_names": list(self.feature_names),
            "means": [float(v) for v in self.means],
            "stds": [float(v) for v in self.stds],
            "trees": [asdict(tree) for tree in self.trees],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PredictionModel":
        if data.get("format") != MODEL_FORMAT:
            raise DataError(f"not a model file (format {data.get('format')!r})")
        if data.get("version") != MODEL_VERSION:
            raise DataError(f"unsupported model version {data.get('version')!r}, expected {MODEL_VERSION}")
        try:
            return cls(
                feature_names=tuple(data["feature_names"]),
                means=np.array(data["means"], dtype=np.float64),
                stds=np.array(data["stds"], dtype=np.float64),
                trees=[DecisionTree(**tree) for tree in data["trees"]],
                config=ForestConfig(**data["config"]),
                seed=int(data["seed"]),
            )
        except (KeyError, TypeError) as e:
            raise DataError(f"malformed model file: {e}")


def train(
    table: FeatureTable,
    y: np.ndarray,
    seed: int,
    config: Optional[ForestConfig] = None,
    threads: int = THREADS,
) -> PredictionModel:
    """Train the ensemble.

    Args:
        table: Feature table of the training groups
        y: Targets, 1 = social, 0 = topical, aligned with ``table`` rows
        seed: Training seed
        config: Ensemble settings
        threads: Worker count (trees are grown in parallel)

    Returns:
        PredictionModel: Trained model

    Raises:
        EvaluationError: On a single-class or empty training set
    """
    config = config or ForestConfig()
    y = np.asarray(y, dtype=np.int64)
    if len(y) != len(table):
        raise EvaluationError(f"{len(table)} feature rows but {len(y)} labels")
    if len(np.unique(y)) < 2:
        raise EvaluationError("training needs both social and topical groups")

    means, stds = _fit_stats(table.matrix)
    x = standardize(table.matrix, means, stds)
    n = len(y)

    def grow(index: int) -> DecisionTree:
        rng = np.random.default_rng([seed, index])
        sample = rng.integers(0, n, size=n)
        return grow_tree(x[sample], y[sample], config, rng)

    trees = parallel_map(grow, range(config.trees), threads)
    logger.debug(f"trained {len(trees)} tree(s) on {n} group(s), {x.shape[1]} feature(s)")
    return PredictionModel(
        feature_names=table.names,
        means=means,
        stds=stds,
        trees=trees,
        config=config,
        seed=seed,
    )


def save_model(model: PredictionModel, path: Path) -> None:
    """Write a model as JSON; floats round-trip exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")


def load_model(path: Path) -> PredictionModel:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise DataError(f"{path}: not valid JSON ({e})")
    return PredictionModel.from_dict(data)
