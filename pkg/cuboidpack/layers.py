"""
layers.py
---------
Layer-based 3D strip packing over a 1 x 1 base and the volume-guarantee bin
packing built on top of it.

Items are sorted by height and packed into horizontal layers: either two
items side by side, or a group of small-base items laid out in 2D by
``steinberg_2d``. Layers are stacked, so the strip height is the sum of the
tallest item per layer.
"""

from __future__ import annotations

import importlib
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from cuboidpack.errors import PreconditionError
from cuboidpack.geometry import (
    HALF,
    ZERO,
    Item,
    Packing,
    Placement,
    Rect2D,
    item_table,
    max_extent,
    strip_height,
    total_volume,
)
from cuboidpack.steinberg import steinberg_2d

logger = logging.getLogger(__name__)

SIXTH = Fraction(1, 6)

Layer = List[Tuple[Item, Fraction, Fraction]]


def by_height(items: Sequence[Item]) -> List[Item]:
    return sorted(items, key=lambda i: (-i.h, i.id))


# --- Layer builders ---

def _pair_layers(items: Sequence[Item], side_axis: str) -> List[Layer]:
    """Two items per layer, the second one shifted by 1/2 along ``side_axis``."""
    ordered = by_height(items)
    layers = []
    for start in range(0, len(ordered), 2):
        layer = [(ordered[start], ZERO, ZERO)]
        if start + 1 < len(ordered):
            other = ordered[start + 1]
            layer.append((other, HALF, ZERO) if side_axis == "x" else (other, ZERO, HALF))
        layers.append(layer)
    return layers


def _layout_group(group: Sequence[Item]) -> Layer:
    rects = [Rect2D(i.id, i.w, i.d) for i in group]
    placed = steinberg_2d(rects, 1, 1)
    if placed is None:
        raise PreconditionError(f"layer group starting at {group[0].id!r} fails the 2D area condition")
    by_id = {i.id: i for i in group}
    return [(by_id[p.id], p.x, p.y) for p in placed]


def _group_layers(items: Sequence[Item]) -> List[Layer]:
    """Maximal height-ordered groups of base area <= 1/2, one layer each."""
    pending = by_height(items)
    layers: List[Layer] = []
    while pending:
        group, area = [], ZERO
        for item in pending:
            if group and area + item.base_area > HALF:
                break
            group.append(item)
            area += item.base_area
        layers.append(_layout_group(group))
        pending = pending[len(group):]
    return layers


def _stack(layers: Sequence[Layer], base_z: Fraction = ZERO) -> Tuple[List[Placement], Fraction]:
    placements = []
    z = base_z
    for layer in layers:
        if not layer:
            continue
        for item, x, y in layer:
            placements.append(Placement(item.id, 0, x, y, z))
        z += max(item.h for item, _, _ in layer)
    return placements, z


def _halfthin_layers(items: Sequence[Item]) -> List[Layer]:
    narrow = [i for i in items if i.w <= HALF]
    shallow = [i for i in items if i.w > HALF]
    layers: List[Layer] = []
    for part, side_axis in ((narrow, "x"), (shallow, "y")):
        large_base = [i for i in part if i.base_area > SIXTH]
        small_base = [i for i in part if i.base_area <= SIXTH]
        layers += _pair_layers(large_base, side_axis)
        layers += _group_layers(small_base)
    return layers


def licheng_strip(items: Sequence[Item], mode: str = "general") -> Packing:
    """Layer packing into a strip with a 1 x 1 base.

    Args:
        items: cuboids with w, d <= 1.
        mode: ``"general"`` first stacks items with both w, d > 1/2 one per
            layer; ``"halfthin"`` requires every item to have w <= 1/2 or
            d <= 1/2.

    Returns:
        A strip packing of height at most 4v + 8h_max (general) or
        3v + 8h_max (halfthin).
    """
    if mode not in ("general", "halfthin"):
        raise PreconditionError(f"unknown layer mode {mode!r}")
    items = list(items)
    if mode == "halfthin":
        offenders = [i.id for i in items if i.w > HALF and i.d > HALF]
        if offenders:
            raise PreconditionError(f"halfthin mode needs w or d <= 1/2: {offenders[:5]}")
        layers = _halfthin_layers(items)
    else:
        large = [i for i in items if i.w > HALF and i.d > HALF]
        rest = [i for i in items if not (i.w > HALF and i.d > HALF)]
        layers = [[(i, ZERO, ZERO)] for i in by_height(large)]
        layers += _halfthin_layers(rest)
    placements, _ = _stack(layers)
    return Packing(tuple(placements), "strip")


def licheng_bound(items: Sequence[Item], mode: str = "general") -> Fraction:
    coeff = 4 if mode == "general" else 3
    return coeff * total_volume(items) + 8 * max_extent(items, "z")


# --- Backends ---

@dataclass(frozen=True)
class StripBackendGuarantee:
    """Height <= mult * OPT + add_const + add_hmax_coeff * h_max.

    With ``volume_based`` set, OPT is replaced by the total item volume.
    """

    mult: Fraction
    add_const: Fraction
    add_hmax_coeff: Fraction
    volume_based: bool

    def __post_init__(self):
        if self.mult < 1 or self.add_const < 0 or self.add_hmax_coeff < 0:
            raise PreconditionError("strip guarantee needs mult >= 1 and non-negative terms")

    def bound(self, reference: Fraction, h_max: Fraction) -> Fraction:
        return self.mult * reference + self.add_const + self.add_hmax_coeff * h_max


class LiChengBackend:
    name = "licheng"
    guarantee = StripBackendGuarantee(Fraction(4), ZERO, Fraction(8), True)

    def pack(self, items: Sequence[Item]) -> Packing:
        return licheng_strip(items, "general")


def get_backend(name: str = "licheng", external: Optional[str] = None):
    """Resolve a strip backend by name.

    ``external`` is a ``module:attribute`` path whose attribute is either a
    backend object or a zero-argument factory returning one.
    """
    if name == "licheng":
        return LiChengBackend()
    if name == "external":
        if not external:
            raise PreconditionError("external backend selected but CUBOIDPACK_EXTERNAL_BACKEND is unset")
        module_name, _, attr = external.partition(":")
        target = getattr(importlib.import_module(module_name), attr)
        backend = target() if isinstance(target, type) or (callable(target) and not hasattr(target, "pack")) else target
        if not hasattr(backend, "pack") or not hasattr(backend, "guarantee"):
            raise PreconditionError(f"{external} is not a strip backend")
        return backend
    raise PreconditionError(f"unknown backend {name!r}")


def backend_packs(backend, items: Sequence[Item]) -> Packing:
    """Run ``backend`` and refuse outputs that are not strip packings."""
    packing = backend.pack(list(items))
    if packing.kind != "strip":
        raise PreconditionError(f"backend {backend.name} returned a {packing.kind} packing")
    return packing


# --- Volume-guarantee bin packing ---

def volume_bin_pack(items: Sequence[Item]) -> Packing:
    """Pack into at most 8v + 18 unit bins: layer strip, then integer cuts."""
    from cuboidpack.cutting import cut_strip_to_bins

    items = list(items)
    if not items:
        return Packing((), "bins")
    strip = licheng_strip(items, "general")
    result = cut_strip_to_bins(strip, item_table(items), mode="naive_double")
    logger.debug(
        "volume_bin_pack: %d items, strip %s, %d bins",
        len(items), strip_height(strip, item_table(items)), result.bins.used_bins,
    )
    return result.bins
