"""Split a group's arcs into internal and boundary dyads."""

import logging

from models.group import Group
from models.interaction import InteractionGraph, InteractionType
from models.metrics import EdgePartition

logger = logging.getLogger(__name__)


def partition_edges(graph: InteractionGraph, group: Group, kind: InteractionType) -> EdgePartition:
    """Count the dyads and arcs of ``kind`` inside and across the border of ``group``.

    A directed dyad u->v is reciprocated iff v->u exists for the same kind,
    whatever the timestamps. Dyad counts ignore multiplicities; arc counts
    and the in/out volumes include them.

    Args:
        graph: Frozen interaction graph
        group: Group whose members define the partition
        kind: Interaction kind

    Returns:
        EdgePartition: Internal and boundary counts
    """
    members = group.members
    missing = sum(1 for m in members if not graph.has_node(m))
    if missing:
        logger.warning(f"group {group.id}: {missing} member(s) not in graph, treated as isolated")

    succ = graph._successor_sets(kind)
    pred = graph._predecessor_sets(kind)
    empty: set[str] = set()

    int_rec = int_nrec = int_arcs = 0
    ext_rec = ext_nrec = ext_arcs = 0
    vol_in = vol_out = 0

    for u in members:
        out_u = succ.get(u, empty)
        vol_out += graph.out_degree(kind, u)
        vol_in += graph.in_degree(kind, u)

        for v in out_u:
            back = v in pred.get(u, empty)
            arcs = graph.multiplicity(kind, u, v)
            if v in members:
                int_arcs += arcs
                if back:
                    int_rec += 1
                else:
                    int_nrec += 1
            else:
                ext_arcs += arcs
                if back:
                    ext_rec += 1
                else:
                    ext_nrec += 1

        for w in pred.get(u, empty):
            if w in members:
                continue
            ext_arcs += graph.multiplicity(kind, w, u)
            if w in out_u:
                ext_rec += 1
            else:
                ext_nrec += 1

    return EdgePartition(
        group_id=group.id,
        kind=kind,
        size=group.size,
        internal_reciprocated=int_rec,
        internal_nonreciprocated=int_nrec,
        internal_arcs=int_arcs,
        boundary_reciprocated=ext_rec,
        boundary_nonreciprocated=ext_nrec,
        boundary_arcs=ext_arcs,
        volume_in=vol_in,
        volume_out=vol_out,
    )
