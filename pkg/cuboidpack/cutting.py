"""
cutting.py
----------
Strip <-> bin transformations: cutting a strip at integer heights, aligning
stacks so tall items never straddle an integer plane, and checking that
property.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from cuboidpack.errors import ContractViolation, PreconditionError
from cuboidpack.geometry import (
    ZERO,
    Item,
    ItemTable,
    Packing,
    Placement,
    as_rational,
    placement_box,
    renumber_dense,
    strip_height,
)
from cuboidpack.harmonic import harmonic_number

logger = logging.getLogger(__name__)

NAIVE_DOUBLE = "naive_double"
EPSILON_LAYERS = "epsilon_layers"


@dataclass
class CutResult:
    bins: Packing
    sliced_item_sets: Dict[int, List[str]] = field(default_factory=dict)
    extra_bins_used: int = 0


def crossing_plane(z: Fraction, h: Fraction):
    """Integer plane strictly inside (z, z + h), or None."""
    plane = math.floor(z) + 1
    return plane if plane < z + h else None


def split_by_planes(strip: Packing, items: ItemTable):
    """Group placements into integer slabs and per-plane sliced sets."""
    slabs: Dict[int, List[Placement]] = {}
    sliced: Dict[int, List[Placement]] = {}
    for placement in strip.placements:
        box = placement_box(placement, items)
        z, top = box[2], box[5]
        plane = crossing_plane(z, top - z)
        if plane is None:
            slabs.setdefault(math.floor(z), []).append(placement)
        else:
            sliced.setdefault(plane, []).append(placement)
    return slabs, sliced


def cut_strip_to_bins(strip: Packing, items: ItemTable, mode: str = NAIVE_DOUBLE, epsilon=None) -> CutResult:
    """Cut a strip over the unit base into unit bins at every integer height.

    ``naive_double`` puts each slab in its own bin and each plane's sliced
    items (one horizontal layer) in a bin of their own, renumbering bins
    densely in strip order. ``epsilon_layers`` requires every sliced item to
    be at most ``epsilon`` tall and stacks the layers of 1/epsilon planes into
    each extra bin.
    """
    if strip.kind != "strip" or strip.strip_axis != "z":
        raise PreconditionError("cut_strip_to_bins expects a z-strip packing")
    slabs, sliced = split_by_planes(strip, items)
    sliced_ids = {plane: [p.item_id for p in group] for plane, group in sliced.items()}

    if mode == NAIVE_DOUBLE:
        # Slab i sits between planes i and i+1; its sliced layer follows it.
        ordered: List[Tuple[int, int, List[Placement]]] = []
        for index, group in slabs.items():
            ordered.append((2 * index, index, group))
        for plane, group in sliced.items():
            ordered.append((2 * plane - 1, plane, group))
        ordered.sort(key=lambda entry: entry[0])
        placements = []
        for bin_index, (key, anchor, group) in enumerate(ordered):
            if key % 2 == 0:
                placements += [p.moved(dz=-anchor, bin_index=bin_index) for p in group]
            else:
                placements += [
                    p.moved(dz=-placement_box(p, items)[2], bin_index=bin_index) for p in group
                ]
        return CutResult(Packing(tuple(placements), "bins"), sliced_ids, len(sliced))

    if mode != EPSILON_LAYERS:
        raise PreconditionError(f"unknown cut mode {mode!r}")
    return _cut_epsilon_layers([strip], items, epsilon, sliced_groups=[(slabs, sliced)])


def cut_strips_epsilon_layers(strips: Sequence[Packing], items: ItemTable, epsilon) -> CutResult:
    """Cut several strips, pooling their sliced layers into shared extra bins."""
    groups = [split_by_planes(strip, items) for strip in strips]
    return _cut_epsilon_layers(strips, items, epsilon, groups)


def _cut_epsilon_layers(strips, items, epsilon, sliced_groups) -> CutResult:
    if epsilon is None:
        raise PreconditionError("epsilon_layers mode needs epsilon")
    epsilon = as_rational(epsilon)
    per_bin = math.floor(1 / epsilon)
    placements: List[Placement] = []
    layers: List[List[Placement]] = []
    sliced_ids: Dict[int, List[str]] = {}
    next_bin = 0

    for strip_no, (slabs, sliced) in enumerate(sliced_groups):
        for index in sorted(slabs):
            placements += [p.moved(dz=-index, bin_index=next_bin) for p in slabs[index]]
            next_bin += 1
        for plane in sorted(sliced):
            group = sliced[plane]
            for p in group:
                box = placement_box(p, items)
                if box[5] - box[2] > epsilon:
                    raise ContractViolation(
                        f"item {p.item_id!r} of height {box[5] - box[2]} sliced at z={plane} exceeds {epsilon}"
                    )
            key = plane if len(sliced_groups) == 1 else (strip_no, plane)
            sliced_ids[key] = [p.item_id for p in group]
            layers.append(group)

    extra = 0
    for start in range(0, len(layers), per_bin):
        z = ZERO
        for group in layers[start:start + per_bin]:
            for p in group:
                placements.append(p.moved(dz=z - placement_box(p, items)[2], bin_index=next_bin))
            z += epsilon
        next_bin += 1
        extra += 1

    bins = Packing(tuple(placements), "bins")
    return CutResult(renumber_dense(bins), sliced_ids, extra)


# --- Tall-not-sliced ---

@dataclass
class AlignedStack:
    placements: List[Tuple[str, Fraction, Fraction]]  # (item id, bottom, top)
    gap_total: Fraction

    @property
    def height(self) -> Fraction:
        return self.placements[-1][2] if self.placements else ZERO


def align_stack_tall(items: Sequence[Item], epsilon) -> AlignedStack:
    """Stack items bottom-up, aligning the first item of each height 1/q.

    For q from 3 to 1/epsilon the first item of height exactly 1/q starts at
    the next multiple of 1/q; everything above it moves with it.
    """
    epsilon = as_rational(epsilon)
    heights = [i.h for i in items]
    if any(a < b for a, b in zip(heights, heights[1:])):
        raise ContractViolation("align_stack_tall needs nonincreasing heights")
    q_max = math.floor(1 / epsilon)
    pending = {Fraction(1, q) for q in range(3, q_max + 1)}
    z = ZERO
    gap = ZERO
    placements = []
    for item in items:
        if item.h in pending:
            pending.discard(item.h)
            q = item.h.denominator
            aligned = Fraction(math.ceil(z * q), q)
            gap += aligned - z
            z = aligned
        placements.append((item.id, z, z + item.h))
        z += item.h
    return AlignedStack(placements, gap)


def alignment_gap_bound(epsilon) -> Fraction:
    q_max = math.floor(1 / as_rational(epsilon))
    return harmonic_number(q_max) - Fraction(3, 2)


@dataclass
class TallCheck:
    ok: bool
    witnesses: List[Tuple[str, int]] = field(default_factory=list)

    def __bool__(self):
        return self.ok


def check_tall_not_sliced(strips, items: ItemTable, epsilon) -> TallCheck:
    """No item taller than epsilon may contain an integer z in its interior.

    ``strips`` is a packing or a sequence of packings (configuration stacks);
    z is measured from each packing's own base.
    """
    epsilon = as_rational(epsilon)
    if isinstance(strips, Packing):
        strips = [strips]
    witnesses = []
    for strip in strips:
        for placement in strip.placements:
            box = placement_box(placement, items)
            height = box[5] - box[2]
            if height <= epsilon:
                continue
            plane = crossing_plane(box[2], height)
            if plane is not None:
                witnesses.append((placement.item_id, plane))
    return TallCheck(not witnesses, witnesses)


def naive_bin_bound(strip: Packing, items: ItemTable) -> int:
    return 2 * math.ceil(strip_height(strip, items))
