"""Reciprocity metrics: intra-, inter-, normalized and relative reciprocity."""

import logging

from models.metrics import EdgePartition, Metric, Undefined, is_defined

logger = logging.getLogger(__name__)


def _dyad_ratio(reciprocated: int, nonreciprocated: int) -> float:
    # (rec/2) / (rec/2 + nrec), kept in integers until the final division
    return reciprocated / (reciprocated + 2 * nonreciprocated)


def intra_reciprocity(part: EdgePartition) -> Metric:
    """r_int: fraction of reciprocated dyads among the group's internal dyads.

    Args:
        part: Edge partition of one group and kind

    Returns:
        Metric: Ratio in [0, 1], undefined without internal dyads
    """
    if part.internal_dyads == 0:
        return Undefined("no internal dyads")
    return _dyad_ratio(part.internal_reciprocated, part.internal_nonreciprocated)


def inter_reciprocity(part: EdgePartition) -> Metric:
    """r_ext: the same ratio over dyads between members and non-members."""
    if part.boundary_dyads == 0:
        return Undefined("no boundary dyads")
    return _dyad_ratio(part.boundary_reciprocated, part.boundary_nonreciprocated)


def normalized_reciprocity(r_int: Metric, corpus_mean: Metric) -> Metric:
    """t: intra-reciprocity divided by its corpus mean.

    Args:
        r_int: Intra-reciprocity of one group
        corpus_mean: Unweighted mean r_int over the averaging universe

    Returns:
        Metric: Normalized reciprocity
    """
    if not is_defined(r_int):
        return r_int
    if not is_defined(corpus_mean):
        return Undefined(f"corpus mean undefined: {corpus_mean.reason}")
    if corpus_mean <= 0:
        logger.debug("corpus mean intra-reciprocity is 0; t is undefined")
        return Undefined("corpus mean intra-reciprocity is 0")
    return r_int / corpus_mean


def relative_reciprocity(r_int: Metric, r_ext: Metric) -> Metric:
    """u: (r_int + 1) / (r_ext + 1), bounded to [1/2, 2]."""
    if not is_defined(r_int):
        return r_int
    if not is_defined(r_ext):
        return r_ext
    return (r_int + 1.0) / (r_ext + 1.0)


def mean_defined(values) -> Metric:
    """Unweighted mean over the defined values."""
    defined = [float(v) for v in values if is_defined(v)]
    if not defined:
        return Undefined("no defined values")
    return sum(defined) / len(defined)
