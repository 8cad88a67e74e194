"""Configuration settings for group-typer."""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Project root directory
PROJECT_ROOT = Path(__file__).parent.parent

TOOL_NAME = "group-typer"
TOOL_VERSION = "0.1.0"

# Logging Configuration
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

# Default pipeline config file (key=value), used when --config is omitted
DEFAULT_CONFIG_PATH = os.getenv("GROUPTYPE_CONFIG", "")

# Worker pool size (outputs never depend on it)
THREADS = int(os.getenv("GROUPTYPE_THREADS", str(os.cpu_count() or 1)))

# Normalized entropy baseline: bin k covers [base^k, base^(k+1)) total terms
ENTROPY_BIN_BASE = int(os.getenv("ENTROPY_BIN_BASE", "2"))
ENTROPY_BIN_MIN_GROUPS = int(os.getenv("ENTROPY_BIN_MIN_GROUPS", "5"))

# Averaging universe for <r_int> and the entropy baseline:
# "origin" (declared/detected separately), "pooled", or "candidates"
MEAN_UNIVERSE = os.getenv("MEAN_UNIVERSE", "origin").lower()

# Labeling-candidate filter (all strict inequalities)
LABEL_MIN_MEMBERS = int(os.getenv("LABEL_MIN_MEMBERS", "5"))
LABEL_MIN_COMMENTS = int(os.getenv("LABEL_MIN_COMMENTS", "100"))
LABEL_MIN_ACTIVITY = float(os.getenv("LABEL_MIN_ACTIVITY", "100"))

# Tree ensemble defaults
FOREST_TREES = int(os.getenv("FOREST_TREES", "100"))
FOREST_MAX_DEPTH = int(os.getenv("FOREST_MAX_DEPTH", "8"))
FOREST_MIN_LEAF = int(os.getenv("FOREST_MIN_LEAF", "1"))

# Evaluation defaults
CV_FOLDS = int(os.getenv("CV_FOLDS", "10"))
CHI2_BINS = int(os.getenv("CHI2_BINS", "10"))
TOP_K_FEATURES = int(os.getenv("TOP_K_FEATURES", "5"))
SCORE_THRESHOLD = float(os.getenv("SCORE_THRESHOLD", "0.0"))
AGREEMENT_BINS = int(os.getenv("AGREEMENT_BINS", "10"))

# Overlap analysis defaults
OVERLAP_PERCENTILES = [
    float(p) for p in os.getenv("OVERLAP_PERCENTILES", "91,99").split(",") if p.strip()
]
OVERLAP_BIN_BASE = int(os.getenv("OVERLAP_BIN_BASE", "2"))

MEAN_UNIVERSES = ["origin", "pooled", "candidates"]


def validate_settings():
    """Validate numeric settings at startup.

    Returns:
        tuple: (is_valid, error_message, warning_message)
    """
    if ENTROPY_BIN_BASE < 2:
        return (False, f"ENTROPY_BIN_BASE must be >= 2, got {ENTROPY_BIN_BASE}", None)

    if MEAN_UNIVERSE not in MEAN_UNIVERSES:
        valid = ", ".join(MEAN_UNIVERSES)
        return (False, f"Invalid MEAN_UNIVERSE: {MEAN_UNIVERSE}. Valid options: {valid}", None)

    if THREADS < 1:
        return (False, f"GROUPTYPE_THREADS must be >= 1, got {THREADS}", None)

    if any(not 0 < p < 100 for p in OVERLAP_PERCENTILES):
        return (False, "OVERLAP_PERCENTILES must lie strictly between 0 and 100", None)

    warning = None
    if FOREST_TREES < 10:
        warning = (
            f"FOREST_TREES={FOREST_TREES} is small; classifier probabilities will be coarse."
        )

    return (True, None, warning)
