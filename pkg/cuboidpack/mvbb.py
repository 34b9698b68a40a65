"""
mvbb.py
-------
Minimum-volume bounding box: pack every item into one box whose volume is as
small as the strip backend allows.

``aptas`` guesses the two base dimensions on (1+eps)-geometric grids for each
of the three strip directions and keeps the smallest box. ``absolute3``
splits the items by thin direction and stacks three boxes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from cuboidpack.config import get_settings
from cuboidpack.errors import ContractViolation, PreconditionError
from cuboidpack.geometry import (
    ONE,
    ZERO,
    BinSpec,
    Item,
    Packing,
    Placement,
    as_rational,
    frame_item,
    frame_packing,
    item_table,
    max_extent,
    placement_box,
    strip_height,
    total_volume,
    verify_packing,
)
from cuboidpack.layers import backend_packs, get_backend, licheng_strip

logger = logging.getLogger(__name__)

APTAS = "aptas"
ABSOLUTE3 = "absolute3"
DEFAULT_EPSILON = Fraction(1, 4)


@dataclass
class MVBBResult:
    box: BinSpec
    packing: Packing
    volume: Fraction
    lower_bound: Fraction
    mode: str
    axis: Optional[str] = None
    guess: Optional[Tuple[Fraction, Fraction]] = None
    height_bound: Optional[Fraction] = None
    mu: Optional[Fraction] = None
    guesses: int = 0
    certified: bool = False


def volume_lower_bound_box(items: Sequence[Item]) -> Fraction:
    """max(total volume, h_max * w_max * d_max)."""
    spread = max_extent(items, "x") * max_extent(items, "y") * max_extent(items, "z")
    return max(total_volume(items), spread)


def _grid(base: Fraction, limit: Fraction, ratio: Fraction, cap: int) -> List[Fraction]:
    values, value = [], base
    while value <= limit and len(values) <= cap:
        values.append(value)
        value *= ratio
    return values or [base]


def _aptas(items: List[Item], epsilon: Fraction, cap: int, backend):
    n = len(items)
    best = None
    guesses = 0
    for axis in ("z", "x", "y"):
        framed = [frame_item(i, axis) for i in items]
        w_max, d_max = max_extent(framed, "x"), max_extent(framed, "y")
        for W in _grid(w_max, n * w_max, 1 + epsilon, cap):
            for D in _grid(d_max, n * d_max, 1 + epsilon, cap):
                guesses += 1
                scaled = [Item(i.id, i.w / W, i.d / D, i.h) for i in framed]
                strip = backend_packs(backend, scaled)
                H = strip_height(strip, item_table(scaled))
                volume = W * D * H
                if best is None or volume < best[0]:
                    placements = [
                        Placement(p.item_id, 0, p.x * W, p.y * D, p.z, p.orient) for p in strip.placements
                    ]
                    bound = backend.guarantee.bound(total_volume(scaled), max_extent(scaled, "z"))
                    boxed = Packing(tuple(placements), "bins", BinSpec(W, D, H))
                    best = (volume, axis, (W, D), frame_packing(boxed, axis), bound)
    return best, guesses


def _band_mu(items: Sequence[Item], delta: Fraction) -> Fraction:
    total = total_volume(items)
    smallest = min(min(i.dims) for i in items)
    upper = delta
    while upper >= smallest:
        lower = upper**6
        band = total_volume(i for i in items if any(lower < v <= upper for v in i.dims))
        if band <= delta * total:
            return upper
        upper = lower
    return upper


def _absolute3(items: List[Item], epsilon: Fraction, delta: Fraction, backend):
    mu = _band_mu(items, delta)
    tiny = mu**6
    groups = {"z": ([], []), "x": ([], []), "y": ([], [])}
    for item in items:
        if all(v > mu for v in item.dims) or item.h <= tiny:
            groups["z"][0].append(item)
        elif item.w <= tiny:
            groups["x"][0].append(item)
        elif item.d <= tiny:
            groups["y"][0].append(item)
        elif item.h <= mu:
            groups["z"][1].append(item)
        elif item.w <= mu:
            groups["x"][1].append(item)
        else:
            groups["y"][1].append(item)

    placements: List[Placement] = []
    offset = ZERO
    for axis, (main, rem) in groups.items():
        if not main and not rem:
            continue
        framed_main = [frame_item(i, axis) for i in main]
        framed_rem = [frame_item(i, axis) for i in rem]
        table = item_table(framed_main + framed_rem)
        block = backend_packs(backend, framed_main) if framed_main else Packing((), "strip")
        thickness = strip_height(block, table)
        slab = licheng_strip(framed_rem, "general")
        slab_thickness = strip_height(slab, table)
        if slab_thickness > 12 * epsilon:
            logger.warning("remainder slab along %s is %s thick", axis, slab_thickness)
        local = list(block.placements) + [p.moved(dz=thickness) for p in slab.placements]
        unframed = frame_packing(Packing(tuple(local), "strip"), axis)
        # Each block sits on top of the previous ones.
        extent_z = max(placement_box(p, {i.id: i for i in items})[5] for p in unframed.placements)
        placements += [p.moved(dz=offset) for p in unframed.placements]
        offset += extent_z
    return placements, mu


def solve_mvbb(items: Sequence[Item], epsilon=None, mode: str = APTAS, delta=None, backend=None) -> MVBBResult:
    """Pack all items into one box of small volume; the box is part of the result."""
    items = list(items)
    if not items:
        raise PreconditionError("bounding box of an empty instance is undefined")
    if mode not in (APTAS, ABSOLUTE3):
        raise PreconditionError(f"unknown mvbb mode {mode!r}")
    epsilon = as_rational(DEFAULT_EPSILON if epsilon is None else epsilon)
    if not ZERO < epsilon < ONE:
        raise PreconditionError("epsilon must lie in (0, 1)")
    settings = get_settings()
    backend = backend or get_backend(settings.backend, settings.external_backend)
    table = item_table(items)
    lower = volume_lower_bound_box(items)
    certified = not backend.guarantee.volume_based

    if mode == APTAS:
        (volume, axis, guess, packing, bound), guesses = _aptas(items, epsilon, settings.guess_exponent_cap, backend)
        result = MVBBResult(packing.bin_spec, packing, volume, lower, mode, axis, guess, bound,
                            guesses=guesses, certified=certified)
    else:
        delta = as_rational(epsilon**2 if delta is None else delta)
        placements, mu = _absolute3(items, epsilon, delta, backend)
        tops = [placement_box(p, table) for p in placements]
        box = BinSpec(*(max(b[i + 3] for b in tops) for i in range(3)))
        packing = Packing(tuple(placements), "bins", box)
        result = MVBBResult(box, packing, box.volume, lower, mode, mu=mu, certified=certified)

    report = verify_packing(result.packing, table)
    if not report.complete:
        raise ContractViolation(f"mvbb produced an infeasible packing: {report.violations[:3]}")
    if result.volume < lower:
        raise ContractViolation("box volume below the lower bound")
    box = result.box
    logger.info("mvbb %s: box %s x %s x %s, volume %s (lower bound %s)", mode, box.W, box.D, box.H, result.volume, lower)
    return result
