"""
slots.py
--------
Candidate placements of the large items across k bins and the horizontal
slots they leave for plate-like items.

A slot is a z-slab of one bin between two consecutive planes through
large-item tops and bottoms; every large item that meets the slab crosses it
completely, so a plate fits inside the slab wherever its base avoids those
footprints.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, NamedTuple, Optional, Sequence, Tuple

from cuboidpack.config import get_settings
from cuboidpack.errors import PreconditionError, SearchBudgetExceeded
from cuboidpack.geometry import (
    ONE,
    ZERO,
    Item,
    Packing,
    Placement,
    as_rational,
    item_table,
    placement_box,
    verify_packing,
)
from cuboidpack.oracle import iter_bin_packings, iter_feasible_partitions

logger = logging.getLogger(__name__)

PER_BIN_CANDIDATES = 4

Footprint = Tuple[Fraction, Fraction, Fraction, Fraction]  # x0, y0, x1, y1


@dataclass(frozen=True)
class Slot:
    bin_index: int
    lo: Fraction
    hi: Fraction
    footprints: Tuple[Footprint, ...] = ()

    @property
    def capacity(self) -> Fraction:
        return self.hi - self.lo


class SlotPacking(NamedTuple):
    placements: Tuple[Placement, ...]
    slots: List[Slot]


def slots_for(placements: Sequence[Placement], items, k: int) -> List[Slot]:
    """Split each of the ``k`` bins at every large-item top and bottom."""
    boxes = {b: [] for b in range(k)}
    for placement in placements:
        boxes[placement.bin_index].append(placement_box(placement, items))
    slots = []
    for b in range(k):
        planes = sorted({ZERO, ONE} | {box[2] for box in boxes[b]} | {box[5] for box in boxes[b]})
        for lo, hi in zip(planes, planes[1:]):
            footprints = tuple(
                sorted((box[0], box[1], box[3], box[4]) for box in boxes[b] if box[2] <= lo and box[5] >= hi)
            )
            slots.append(Slot(b, lo, hi, footprints))
    return slots


def base_position(item: Item, slot: Slot) -> Optional[Tuple[Fraction, Fraction]]:
    """Lowest-then-leftmost base position avoiding the slot's footprints."""
    xs = {ZERO, ONE - item.w}
    ys = {ZERO, ONE - item.d}
    for x0, y0, x1, y1 in slot.footprints:
        xs |= {x1, x0 - item.w}
        ys |= {y1, y0 - item.d}
    for y in sorted(v for v in ys if ZERO <= v <= ONE - item.d):
        for x in sorted(v for v in xs if ZERO <= v <= ONE - item.w):
            if not any(
                x < x1 and x0 < x + item.w and y < y1 and y0 < y + item.d
                for x0, y0, x1, y1 in slot.footprints
            ):
                return x, y
    return None


def enumerate_slot_packings(
    large: Sequence[Item],
    k: int,
    mu,
    budget: Optional[int] = None,
    per_bin: int = PER_BIN_CANDIDATES,
    node_budget: Optional[int] = None,
) -> Iterator[SlotPacking]:
    """Stream feasible placements of ``large`` into ``k`` bins with their slots.

    Partitions into bins come from the exact partition search; inside each
    bin the first ``per_bin`` canonical (pushed toward the origin) packings
    are combined. At most ``budget`` candidates are produced.
    """
    mu = as_rational(mu)
    large = list(large)
    if k < 1:
        raise PreconditionError("k must be positive")
    if len(large) > k / mu**3:
        raise PreconditionError(f"{len(large)} large items exceed k/mu^3 for k={k}")
    limit = get_settings().slot_candidates if budget is None else budget
    if not large:
        yield SlotPacking((), [Slot(b, ZERO, ONE) for b in range(k)])
        return

    table = item_table(large)
    emitted = 0
    try:
        for partition in iter_feasible_partitions(large, k, node_budget=node_budget):
            per_group = []
            for group in partition:
                members = [table[i] for i in sorted(group)]
                per_group.append(list(itertools.islice(iter_bin_packings(members, node_budget=node_budget), per_bin)))
            for combo in itertools.product(*per_group):
                placements = tuple(
                    p.moved(bin_index=b) for b, packing in enumerate(combo) for p in packing
                )
                if not verify_packing(Packing(placements, "bins"), table).complete:
                    continue
                yield SlotPacking(placements, slots_for(placements, table, k))
                emitted += 1
                if emitted >= limit:
                    return
    except SearchBudgetExceeded as exc:
        logger.warning("slot enumeration stopped after %d candidates: %s", emitted, exc)
