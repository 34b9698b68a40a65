"""
rotation.py
-----------
Bin packing with axis-parallel rotations using at most 5 OPT bins.

Items with a small dimension are turned so that dimension is the height and
grouped by volume into bins of their own; the large items either share a
single bin with whatever small items remain or are packed exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from cuboidpack.absolute import volume_groups
from cuboidpack.config import get_settings
from cuboidpack.errors import OracleCapExceeded, PackingError, PreconditionError, SearchBudgetExceeded
from cuboidpack.geometry import (
    AXES,
    IDENTITY,
    ONE,
    ORIENTATIONS,
    ZERO,
    Item,
    Packing,
    Placement,
    compose_orientation,
    item_table,
    merge_bin_packings,
    strip_height,
    total_volume,
    verify_packing,
)
from cuboidpack.layers import licheng_strip, volume_bin_pack
from cuboidpack.oracle import oracle_opt_bins

logger = logging.getLogger(__name__)

TWELFTH = Fraction(1, 12)


@dataclass
class RotationReport:
    k_accepted: Optional[int]
    bins: int
    mu: Fraction
    groups: int = 0
    shared_bin: bool = False
    fallback: bool = False
    rejected: Dict[int, str] = field(default_factory=dict)


def orient_with_height(item: Item, limit: Fraction) -> Tuple[Item, str]:
    """Turn ``item`` so its smallest dimension at most ``limit`` is vertical."""
    index = min(range(3), key=lambda i: (item.dims[i], i))
    if item.dims[index] > limit:
        return item, IDENTITY
    orient = next(o for o in ORIENTATIONS if o[2] == AXES[index])
    return item.oriented(orient), orient


def _strip_bin(items: Sequence[Tuple[Item, str]], z0: Fraction, bin_index: int) -> Tuple[List[Placement], Fraction]:
    """Layer-pack pre-oriented items as one block starting at ``z0``."""
    oriented = [item for item, _ in items]
    orients = {item.id: orient for item, orient in items}
    strip = licheng_strip(oriented, "general")
    height = strip_height(strip, item_table(oriented))
    placements = [
        Placement(p.item_id, bin_index, p.x, p.y, p.z + z0, compose_orientation(p.orient, orients[p.item_id]))
        for p in strip.placements
    ]
    return placements, height


def _try_guess(items: List[Item], k: int, mu: Fraction, cap: Optional[int]):
    large = [i for i in items if all(v > mu for v in i.dims)]
    small = [orient_with_height(i, mu) for i in items if not all(v > mu for v in i.dims)]
    orients = {item.id: orient for item, orient in small}
    groups = volume_groups([item for item, _ in small], Fraction(1, 4) - 2 * mu)
    kept, rest = groups[:4 * k], [i for g in groups[4 * k:] for i in g]

    placements: List[Placement] = []
    for b, group in enumerate(kept):
        block, height = _strip_bin([(i, orients[i.id]) for i in group], ZERO, b)
        if height > ONE:
            raise PreconditionError(f"group {b} needs height {height}")
        placements += block
    base = len(kept)

    if rest:
        turned_large = [orient_with_height(i, TWELFTH) for i in large]
        if any(item.h > TWELFTH for item, _ in turned_large):
            raise PreconditionError("large items are not flat enough to share a bin")
        lower, low_h = _strip_bin(turned_large, ZERO, base)
        upper, up_h = _strip_bin([(i, orients[i.id]) for i in rest], low_h, base)
        if low_h + up_h > ONE:
            raise PreconditionError(f"shared bin needs height {low_h + up_h}")
        return Packing(tuple(placements + lower + upper), "bins"), len(kept), True

    if large:
        try:
            result = oracle_opt_bins(large, max_bins=k, allow_rotations=True, cap=cap)
            extra = result.witness if result is not None else None
        except (OracleCapExceeded, SearchBudgetExceeded) as exc:
            logger.debug("exact packing of large items skipped: %s", exc)
            extra = volume_bin_pack(large)
        if extra is None or extra.used_bins > k:
            raise PreconditionError(f"large items need more than {k} bins")
        placements += [p.moved(bin_index=p.bin_index + base) for p in extra.placements]
    return Packing(tuple(placements), "bins"), len(kept), False


def rotation_5approx(items: Sequence[Item], K: Optional[int] = None, cap: Optional[int] = None) -> Tuple[Packing, RotationReport]:
    """Pack with rotations into at most 5k bins for the first accepted guess k."""
    K = get_settings().k_max if K is None else K
    items = list(items)
    table = item_table(items)
    mu = Fraction(1, 12**4 * K)
    rejected: Dict[int, str] = {}
    if not items:
        return Packing((), "bins"), RotationReport(0, 0, mu)

    for k in range(max(1, math.ceil(total_volume(items))), K + 1):
        try:
            packing, groups, shared = _try_guess(items, k, mu, cap)
        except PackingError as exc:
            rejected[k] = str(exc)
            logger.debug("rotation guess k=%d rejected: %s", k, exc)
            continue
        packing = merge_bin_packings([packing])
        if not verify_packing(packing, table).complete or packing.used_bins > 5 * k:
            rejected[k] = "output infeasible or above 5k bins"
            continue
        logger.info("rotation packing: k=%d accepted, %d bins", k, packing.used_bins)
        return packing, RotationReport(k, packing.used_bins, mu, groups, shared, rejected=rejected)

    packing = volume_bin_pack(items)
    logger.info("rotation packing: no guess accepted, volume fallback with %d bins", packing.used_bins)
    return packing, RotationReport(None, packing.used_bins, mu, fallback=True, rejected=rejected)
