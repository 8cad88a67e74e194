"""Membership-shuffling null model."""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from models.group import Group

logger = logging.getLogger(__name__)

# random redraw attempts before falling back to a scan of the remaining slots
_REDRAW_TRIES = 32


@dataclass
class ShuffleResult:
    """Shuffled groups plus how often a duplicate member had to be redrawn."""

    groups: list[Group] = field(default_factory=list)
    collisions: int = 0
    substitutions: int = 0


def shuffle_members(
    groups: Iterable[Group],
    seed: int,
    universe: Optional[Iterable[str]] = None,
) -> ShuffleResult:
    """Reassign membership slots uniformly at random, keeping every group's size.

    All membership slots are pooled and permuted globally, then dealt back
    to the groups in id order. A slot that would repeat a member already in
    the group is swapped with a random later slot (a collision). If no
    later slot works, a user from ``universe`` outside the group is drawn
    instead (a substitution), which alters the slot multiset.

    Args:
        groups: Groups to shuffle
        seed: Random seed
        universe: Users eligible for substitutions (defaults to all members)

    Returns:
        ShuffleResult: Shuffled groups (same ids, origins and sizes) and counters

    Raises:
        ValueError: If the universe is smaller than the largest group
    """
    groups = sorted(groups, key=lambda g: g.id)
    slots = [member for g in groups for member in sorted(g.members)]
    users = sorted(set(universe) if universe is not None else set(slots))
    if groups and len(users) < max(g.size for g in groups):
        raise ValueError(
            f"universe of {len(users)} users is smaller than the largest group ({max(g.size for g in groups)})"
        )

    rng = np.random.default_rng(seed)
    pool = [slots[i] for i in rng.permutation(len(slots))]
    result = ShuffleResult()
    position = 0

    for group in groups:
        chosen: set[str] = set()
        while len(chosen) < group.size:
            if position >= len(pool):
                break
            candidate = pool[position]
            if candidate in chosen:
                j = _redraw(pool, position, chosen, rng)
                if j is None:
                    break
                pool[position], pool[j] = pool[j], pool[position]
                result.collisions += 1
                candidate = pool[position]
            chosen.add(candidate)
            position += 1

        while len(chosen) < group.size:
            # every remaining slot repeats a member: substitute from the universe
            options = [u for u in users if u not in chosen]
            pick = options[int(rng.integers(len(options)))]
            chosen.add(pick)
            if position < len(pool):
                position += 1
            result.substitutions += 1

        result.groups.append(Group(group.id, group.origin, frozenset(chosen), group.label))

    if result.collisions or result.substitutions:
        logger.debug(
            f"member shuffle: {result.collisions} collision(s), {result.substitutions} substitution(s)"
        )
    return result


def _redraw(pool: list[str], position: int, chosen: set[str], rng: np.random.Generator) -> Optional[int]:
    remaining = len(pool) - position - 1
    if remaining <= 0:
        return None
    for _ in range(_REDRAW_TRIES):
        j = position + 1 + int(rng.integers(remaining))
        if pool[j] not in chosen:
            return j
    for j in range(position + 1, len(pool)):
        if pool[j] not in chosen:
            return j
    return None
