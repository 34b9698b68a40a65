"""Next-Fit-Decreasing-Height shelf packing of rectangles into a strip."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from cuboidpack.errors import PreconditionError
from cuboidpack.geometry import ZERO, Placement2D, Rect2D, as_rational


@dataclass
class Shelf:
    base_z: Fraction
    height: Fraction
    members: List[Placement2D] = field(default_factory=list)

    @property
    def used_width(self) -> Fraction:
        return sum((p.w for p in self.members), ZERO)


def nfdh_order(rects: Sequence[Rect2D]) -> List[Rect2D]:
    return sorted(rects, key=lambda r: (-r.h, r.id))


def nfdh_2d(rects: Sequence[Rect2D], strip_width) -> Tuple[List[Shelf], Fraction]:
    """Pack ``rects`` shelf by shelf in order of decreasing height.

    A rect goes on the current shelf when it still fits next to the previous
    members; otherwise a new shelf opens on top. Returns the shelves and the
    total packing height.
    """
    strip_width = as_rational(strip_width)
    for rect in rects:
        if rect.w > strip_width:
            raise PreconditionError(f"rect {rect.id!r} wider than strip ({rect.w} > {strip_width})")

    shelves: List[Shelf] = []
    cursor = ZERO
    for rect in nfdh_order(rects):
        shelf = shelves[-1] if shelves else None
        if shelf is None or shelf.used_width + rect.w > strip_width:
            base = shelf.base_z + shelf.height if shelf else ZERO
            shelf = Shelf(base_z=base, height=rect.h)
            shelves.append(shelf)
            cursor = ZERO
        shelf.members.append(Placement2D(rect.id, cursor, shelf.base_z, rect.w, rect.h))
        cursor += rect.w

    height = sum((s.height for s in shelves), ZERO)
    return shelves, height


def shelf_placements(shelves: Sequence[Shelf]) -> List[Placement2D]:
    return [p for shelf in shelves for p in shelf.members]


def nfdh_fits(box_w, box_h, rects: Sequence[Rect2D]) -> bool:
    """Area certificate: NFDH packs ``rects`` into the box when this is True."""
    if not rects:
        return True
    box_w, box_h = as_rational(box_w), as_rational(box_h)
    w_max = max(r.w for r in rects)
    h_max = max(r.h for r in rects)
    if w_max > box_w or h_max > box_h:
        raise PreconditionError("rect larger than the certificate box")
    area = sum((r.area for r in rects), ZERO)
    return area <= (box_h - h_max) * (box_w - w_max)


def nfdh_in_box(rects: Sequence[Rect2D], box_w, box_h) -> Optional[List[Placement2D]]:
    """NFDH placements if they stay within ``box_h``, else None."""
    if any(r.w > as_rational(box_w) for r in rects):
        return None
    shelves, height = nfdh_2d(rects, box_w)
    if height > as_rational(box_h):
        return None
    return shelf_placements(shelves)
