"""Relative activity metrics."""

from models.metrics import EdgePartition, Metric, Undefined


def relative_activity_a(part: EdgePartition, total_arcs: int) -> Metric:
    """a: internal arcs over their configuration-model expectation D_in * D_out / E.

    Args:
        part: Edge partition of one group and kind
        total_arcs: E, arcs of that kind in the whole network

    Returns:
        Metric: Relative activity, undefined when the expectation is 0
    """
    denominator = part.volume_in * part.volume_out
    if denominator == 0 or total_arcs == 0:
        return Undefined("group has no incoming or no outgoing interactions")
    return part.internal_arcs * total_arcs / denominator


def relative_activity_b(part: EdgePartition, node_count: int) -> Metric:
    """b: internal arc density over boundary arc density.

    (E_int / (s (s-1))) / (E_ext / (2 (N-s) s)), which reduces to
    2 E_int (N-s) / ((s-1) E_ext).

    Args:
        part: Edge partition of one group and kind
        node_count: N, users in the network

    Returns:
        Metric: Density ratio
    """
    s = part.size
    if s < 2:
        return Undefined("group has fewer than 2 members")
    if s >= node_count:
        return Undefined("group spans the whole network")
    if part.boundary_arcs == 0:
        return Undefined("no boundary arcs")
    return 2 * part.internal_arcs * (node_count - s) / ((s - 1) * part.boundary_arcs)
