"""
steinberg.py
------------
Rectangle packing into a W x H box gated by Steinberg's area condition

    2 * area(R) <= W*H - (2*w_max - W)_+ * (2*h_max - H)_+

The packer is recursive. A region is filled by the first procedure that
succeeds:

  * the NFDH area certificate (guaranteed placement),
  * stacking the wide rectangles (w > W/2) at the bottom and recursing in the
    space above and beside the stack,
  * the same on the transposed region for tall rectangles,
  * splitting the region in two halves with area-balanced sublists,
  * a skyline bottom-left pass over several orderings,
  * for a handful of rectangles, exhaustive canonical search.

Every candidate is validated with ``verify_packing_2d`` before it is returned.
When the condition holds and no procedure finds a layout, the packer raises
``ContractViolation``; it never hands back a subset.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import List, Optional, Sequence

from cuboidpack.errors import ContractViolation, PreconditionError
from cuboidpack.geometry import ZERO, Placement2D, Rect2D, as_rational, verify_packing_2d
from cuboidpack.shelves import nfdh_fits, nfdh_in_box

logger = logging.getLogger(__name__)

CALL_BUDGET = 4000
EXACT_LIMIT = 7


def steinberg_condition(rects: Sequence[Rect2D], W, H) -> bool:
    W, H = as_rational(W), as_rational(H)
    if not rects:
        return True
    area = sum((r.area for r in rects), ZERO)
    w_max = max(r.w for r in rects)
    h_max = max(r.h for r in rects)
    correction = max(2 * w_max - W, ZERO) * max(2 * h_max - H, ZERO)
    return 2 * area <= W * H - correction


def steinberg_2d(rects: Sequence[Rect2D], W, H) -> Optional[List[Placement2D]]:
    """Place every rect inside W x H.

    Returns None when the area condition fails, so the caller can regroup.
    When the condition holds every rect is placed; if the procedures below
    cannot find the layout, ContractViolation is raised rather than a
    partial answer.
    """
    W, H = as_rational(W), as_rational(H)
    for rect in rects:
        if rect.w > W or rect.h > H:
            raise PreconditionError(f"rect {rect.id!r} does not fit a {W}x{H} box")
    if not rects:
        return []
    if not steinberg_condition(rects, W, H):
        return None

    packer = _RegionPacker()
    placements = packer.pack(list(rects), ZERO, ZERO, W, H)
    if placements is None:
        logger.debug("region packer failed on %d rects after %d calls", len(rects), packer.calls)
        placements = skyline_pack(rects, W, H)
    if placements is None and len(rects) <= EXACT_LIMIT:
        placements = exact_pack_2d(rects, W, H)
    if placements is None:
        raise ContractViolation(f"no layout found for {len(rects)} rects meeting the area condition in {W}x{H}")
    check = verify_packing_2d(placements, W, H)
    if not check.feasible:
        raise ContractViolation(f"2D layout in {W}x{H} is invalid: {check.violations[:3]}")
    return placements


# --- Recursive procedures ---

def _transpose(rects: Sequence[Rect2D]) -> List[Rect2D]:
    return [Rect2D(r.id, r.h, r.w) for r in rects]


def _untranspose(placements: Sequence[Placement2D]) -> List[Placement2D]:
    return [Placement2D(p.id, p.y, p.x, p.h, p.w) for p in placements]


def _offset(placements, x0, y0) -> List[Placement2D]:
    return [Placement2D(p.id, p.x + x0, p.y + y0, p.w, p.h) for p in placements]


class _RegionPacker:
    def __init__(self, budget: int = CALL_BUDGET):
        self.calls = 0
        self.budget = budget

    def pack(self, rects, x0, y0, W, H) -> Optional[List[Placement2D]]:
        self.calls += 1
        if self.calls > self.budget:
            return None
        if not rects:
            return []
        if any(r.w > W or r.h > H for r in rects):
            return None
        area = sum((r.area for r in rects), ZERO)
        if area > W * H:
            return None
        if len(rects) == 1:
            r = rects[0]
            return [Placement2D(r.id, x0, y0, r.w, r.h)]
        if nfdh_fits(W, H, rects):
            return _offset(nfdh_in_box(rects, W, H), x0, y0)

        for procedure in (self._wide, self._tall, self._split, self._split_transposed):
            placed = procedure(rects, W, H)
            if placed is not None:
                return _offset(placed, x0, y0)
        placed = skyline_pack(rects, W, H)
        if placed is not None:
            return _offset(placed, x0, y0)
        return None

    def _wide(self, rects, W, H):
        wide = sorted((r for r in rects if 2 * r.w > W), key=lambda r: (-r.w, r.id))
        if not wide:
            return None
        stack_h = sum((r.h for r in wide), ZERO)
        if stack_h > H:
            return None
        placed = []
        y = ZERO
        for r in wide:
            placed.append(Placement2D(r.id, ZERO, y, r.w, r.h))
            y += r.h
        rest = [r for r in rects if 2 * r.w <= W]
        if not rest:
            return placed

        top = self.pack(rest, ZERO, stack_h, W, H - stack_h)
        if top is not None:
            return placed + top

        # Right of the stack there is a column at least W - widest wide.
        column_w = W - wide[0].w
        side, above = [], []
        side_area = ZERO
        for r in sorted(rest, key=lambda r: (-r.h, r.id)):
            fits_side = r.w <= column_w and r.h <= stack_h
            if fits_side and side_area + r.area <= column_w * stack_h / 2:
                side.append(r)
                side_area += r.area
            else:
                above.append(r)
        if not side:
            return None
        side_placed = self.pack(side, wide[0].w, ZERO, column_w, stack_h)
        above_placed = self.pack(above, ZERO, stack_h, W, H - stack_h)
        if side_placed is None or above_placed is None:
            return None
        return placed + side_placed + above_placed

    def _tall(self, rects, W, H):
        placed = self._wide(_transpose(rects), H, W)
        return None if placed is None else _untranspose(placed)

    def _split(self, rects, W, H):
        half = W / 2
        if any(r.w > half for r in rects):
            return None
        left, right = [], []
        left_area = right_area = ZERO
        for r in sorted(rects, key=lambda r: (-r.area, r.id)):
            if left_area <= right_area:
                left.append(r)
                left_area += r.area
            else:
                right.append(r)
                right_area += r.area
        if not right:
            return None
        a = self.pack(left, ZERO, ZERO, half, H)
        if a is None:
            return None
        b = self.pack(right, half, ZERO, half, H)
        if b is None:
            return None
        return a + b

    def _split_transposed(self, rects, W, H):
        placed = self._split(_transpose(rects), H, W)
        return None if placed is None else _untranspose(placed)


# --- Skyline bottom-left ---

def _skyline_once(order: Sequence[Rect2D], W, H) -> Optional[List[Placement2D]]:
    # Segments are [x, width, y] covering [0, W) left to right.
    segments = [[ZERO, W, ZERO]]
    placed = []
    for rect in order:
        best = None
        for i, (x, _, _) in enumerate(segments):
            if x + rect.w > W:
                break
            y = ZERO
            reach = x + rect.w
            j = i
            while j < len(segments) and segments[j][0] < reach:
                y = max(y, segments[j][2])
                j += 1
            if y + rect.h <= H and (best is None or (y, x) < (best[1], best[0])):
                best = (x, y)
        if best is None:
            return None
        x, y = best
        placed.append(Placement2D(rect.id, x, y, rect.w, rect.h))
        segments = _raise_skyline(segments, x, x + rect.w, y + rect.h)
    return placed


def _raise_skyline(segments, left, right, top):
    out = []
    for x, width, y in segments:
        end = x + width
        if end <= left or x >= right:
            out.append([x, width, y])
            continue
        if x < left:
            out.append([x, left - x, y])
        if end > right:
            out.append([right, end - right, y])
    out.append([left, right - left, top])
    out.sort(key=lambda s: s[0])
    merged = []
    for seg in out:
        if merged and merged[-1][2] == seg[2] and merged[-1][0] + merged[-1][1] == seg[0]:
            merged[-1][1] += seg[1]
        else:
            merged.append(seg)
    return merged


def skyline_pack(rects: Sequence[Rect2D], W, H) -> Optional[List[Placement2D]]:
    """Bottom-left skyline over several orderings; first success wins."""
    W, H = as_rational(W), as_rational(H)
    orderings = (
        lambda r: (-r.h, -r.w, r.id),
        lambda r: (-r.w, -r.h, r.id),
        lambda r: (-r.area, r.id),
        lambda r: (-max(r.w, r.h), r.id),
    )
    for key in orderings:
        placed = _skyline_once(sorted(rects, key=key), W, H)
        if placed is not None:
            return placed
    return None


# --- Exhaustive search for a few rects ---

def _subset_sums(values: Sequence[Fraction], limit: Fraction) -> List[Fraction]:
    sums = {ZERO}
    for v in values:
        sums |= {s + v for s in sums if s + v <= limit}
    return sorted(sums)


def exact_pack_2d(rects: Sequence[Rect2D], W, H, node_budget: int = 200_000) -> Optional[List[Placement2D]]:
    """Canonical-coordinate backtracking; complete for pushed-left/down layouts."""
    W, H = as_rational(W), as_rational(H)
    order = sorted(rects, key=lambda r: (-r.area, r.id))
    xs = {r.id: _subset_sums([o.w for o in order if o.id != r.id], W - r.w) for r in order}
    ys = {r.id: _subset_sums([o.h for o in order if o.id != r.id], H - r.h) for r in order}
    placed: List[Placement2D] = []
    nodes = 0

    def free(x, y, r):
        return all(
            not (x < p.right and p.x < x + r.w and y < p.top and p.y < y + r.h)
            for p in placed
        )

    def search(i):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            return False
        if i == len(order):
            return True
        r = order[i]
        for y in ys[r.id]:
            for x in xs[r.id]:
                if free(x, y, r):
                    placed.append(Placement2D(r.id, x, y, r.w, r.h))
                    if search(i + 1):
                        return True
                    placed.pop()
        return False

    return list(placed) if search(0) else None
