"""
geometry.py
-----------
Exact-arithmetic cuboid geometry: items, placements, packings and the
feasibility verifier every solver output goes through.

All coordinates and extents are ``fractions.Fraction`` values. Decimal input
strings ("0.35", "1/12", "2") are parsed exactly; nothing in the package ever
compares floats.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from cuboidpack.errors import PreconditionError, UnknownItemError

logger = logging.getLogger(__name__)

RationalLike = Union[Fraction, int, str, float]

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)

AXES = ("x", "y", "z")
# Orientation strings: letter i names the item dimension lying along bin axis i
# (x -> width, y -> depth, z -> height).
ORIENTATIONS = ("xyz", "xzy", "yxz", "yzx", "zxy", "zyx")
IDENTITY = "xyz"


def as_rational(value: RationalLike) -> Fraction:
    """Parse ``value`` into an exact Fraction.

    Floats are routed through their shortest repr so that ``0.1`` means one
    tenth, not the nearest binary double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise PreconditionError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise PreconditionError(f"not a rational: {value!r}") from exc
    raise PreconditionError(f"not a rational: {value!r}")


def format_rational(value: Fraction) -> str:
    """Serialize a rational as a terminating decimal when possible, else "p/q"."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(twos, fives)
    scaled = value * 10**digits
    sign = "-" if scaled < 0 else ""
    text = str(abs(scaled.numerator)).rjust(digits + 1, "0")
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


# --- Items ---

@dataclass(frozen=True)
class Item:
    """Axis-aligned cuboid with identity. Extents live in (0, 1]."""

    id: str
    w: Fraction
    d: Fraction
    h: Fraction

    def __post_init__(self):
        for name in ("w", "d", "h"):
            value = as_rational(getattr(self, name))
            if not ZERO < value <= ONE:
                raise PreconditionError(
                    f"item {self.id!r}: {name}={value} outside (0, 1]"
                )
            object.__setattr__(self, name, value)

    @property
    def volume(self) -> Fraction:
        return self.w * self.d * self.h

    @property
    def base_area(self) -> Fraction:
        return self.w * self.d

    @property
    def dims(self) -> Tuple[Fraction, Fraction, Fraction]:
        return (self.w, self.d, self.h)

    def extent(self, axis: str) -> Fraction:
        return self.dims[AXES.index(axis)]

    def with_dims(self, w=None, d=None, h=None) -> "Item":
        return Item(
            self.id,
            self.w if w is None else w,
            self.d if d is None else d,
            self.h if h is None else h,
        )

    def oriented(self, orient: str) -> "Item":
        """Item copy whose (w, d, h) are the extents under ``orient``."""
        w, d, h = oriented_extents(self, orient)
        return Item(self.id, w, d, h)


ItemTable = Mapping[str, Item]


def item_table(items: Iterable[Item]) -> Dict[str, Item]:
    table: Dict[str, Item] = {}
    for item in items:
        if item.id in table:
            raise PreconditionError(f"duplicate item id {item.id!r}")
        table[item.id] = item
    return table


def total_volume(items: Iterable[Item]) -> Fraction:
    return sum((item.volume for item in items), ZERO)


def max_extent(items: Iterable[Item], axis: str = "z") -> Fraction:
    return max((item.extent(axis) for item in items), default=ZERO)


def oriented_extents(item: Item, orient: str) -> Tuple[Fraction, Fraction, Fraction]:
    if orient not in ORIENTATIONS:
        raise PreconditionError(f"unknown orientation {orient!r}")
    dims = item.dims
    return tuple(dims[AXES.index(letter)] for letter in orient)


def compose_orientation(outer: str, inner: str) -> str:
    """Orientation of an item oriented by ``inner`` then re-oriented by ``outer``."""
    return "".join(inner[AXES.index(letter)] for letter in outer)


# --- Placements & packings ---

@dataclass(frozen=True)
class Placement:
    item_id: str
    bin_index: int
    x: Fraction
    y: Fraction
    z: Fraction
    orient: str = IDENTITY

    def __post_init__(self):
        if self.bin_index < 0:
            raise PreconditionError(f"negative bin index for {self.item_id!r}")
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, as_rational(getattr(self, name)))
        if self.orient not in ORIENTATIONS:
            raise PreconditionError(f"unknown orientation {self.orient!r}")

    def coord(self, axis: str) -> Fraction:
        return (self.x, self.y, self.z)[AXES.index(axis)]

    def moved(self, dx=ZERO, dy=ZERO, dz=ZERO, bin_index: Optional[int] = None) -> "Placement":
        return replace(
            self,
            x=self.x + dx,
            y=self.y + dy,
            z=self.z + dz,
            bin_index=self.bin_index if bin_index is None else bin_index,
        )


@dataclass(frozen=True)
class BinSpec:
    W: Fraction = ONE
    D: Fraction = ONE
    H: Fraction = ONE

    def __post_init__(self):
        for name in ("W", "D", "H"):
            value = as_rational(getattr(self, name))
            if value <= 0:
                raise PreconditionError(f"bin extent {name} must be positive")
            object.__setattr__(self, name, value)

    def extent(self, axis: str) -> Fraction:
        return (self.W, self.D, self.H)[AXES.index(axis)]

    @property
    def volume(self) -> Fraction:
        return self.W * self.D * self.H


UNIT_BIN = BinSpec()


@dataclass(frozen=True)
class Packing:
    placements: Tuple[Placement, ...] = ()
    kind: str = "bins"
    bin_spec: BinSpec = UNIT_BIN
    strip_axis: str = "z"

    def __post_init__(self):
        if self.kind not in ("bins", "strip"):
            raise PreconditionError(f"unknown packing kind {self.kind!r}")
        if self.strip_axis not in AXES:
            raise PreconditionError(f"unknown strip axis {self.strip_axis!r}")
        object.__setattr__(self, "placements", tuple(self.placements))

    def __len__(self):
        return len(self.placements)

    @property
    def used_bins(self) -> int:
        return 1 + max((p.bin_index for p in self.placements), default=-1)

    def by_bin(self) -> Dict[int, List[Placement]]:
        groups: Dict[int, List[Placement]] = defaultdict(list)
        for placement in self.placements:
            groups[placement.bin_index].append(placement)
        return dict(groups)

    def placement_of(self, item_id: str) -> Placement:
        for placement in self.placements:
            if placement.item_id == item_id:
                return placement
        raise UnknownItemError(item_id)

    def item_ids(self) -> List[str]:
        return [p.item_id for p in self.placements]


def placement_box(placement: Placement, items: ItemTable):
    """Closed box (x0, y0, z0, x1, y1, z1) occupied by ``placement``."""
    try:
        item = items[placement.item_id]
    except KeyError:
        raise UnknownItemError(placement.item_id) from None
    w, d, h = oriented_extents(item, placement.orient)
    return (
        placement.x, placement.y, placement.z,
        placement.x + w, placement.y + d, placement.z + h,
    )


def top_of(placement: Placement, items: ItemTable, axis: str = "z") -> Fraction:
    box = placement_box(placement, items)
    i = AXES.index(axis)
    return box[i + 3]


def strip_height(packing: Packing, items: ItemTable) -> Fraction:
    axis = packing.strip_axis
    return max((top_of(p, items, axis) for p in packing.placements), default=ZERO)


def bin_fill_heights(packing: Packing, items: ItemTable) -> Dict[int, Fraction]:
    """Top z coordinate reached inside every used bin."""
    fills: Dict[int, Fraction] = {}
    for placement in packing.placements:
        top = top_of(placement, items)
        fills[placement.bin_index] = max(fills.get(placement.bin_index, ZERO), top)
    return fills


def merge_bin_packings(parts: Sequence[Packing], bin_spec: BinSpec = UNIT_BIN) -> Packing:
    """Concatenate bin packings, renumbering bins so that they stay dense."""
    merged: List[Placement] = []
    offset = 0
    for part in parts:
        if part.kind != "bins":
            raise PreconditionError("only bin packings can be merged")
        used = sorted(part.by_bin())
        renumber = {old: offset + new for new, old in enumerate(used)}
        merged.extend(p.moved(bin_index=renumber[p.bin_index]) for p in part.placements)
        offset += len(used)
    return Packing(tuple(merged), "bins", bin_spec)


def renumber_dense(packing: Packing) -> Packing:
    return merge_bin_packings([packing], packing.bin_spec)


# --- Frames ---
# Solvers that pack "thin along axis a" swap a with z, pack, then swap back.
# Every swap is an involution, so one helper maps in both directions.

_SWAPS = {"z": (0, 1, 2), "x": (2, 1, 0), "y": (0, 2, 1)}


def frame_item(item: Item, axis: str) -> Item:
    w, d, h = (item.dims[i] for i in _SWAPS[axis])
    return Item(item.id, w, d, h)


def frame_placement(placement: Placement, axis: str) -> Placement:
    perm = _SWAPS[axis]
    coords = (placement.x, placement.y, placement.z)
    x, y, z = (coords[i] for i in perm)
    # Orientation letters name item dimensions, which are swapped as well.
    orient = "".join(
        AXES[perm[AXES.index(placement.orient[perm[j]])]] for j in range(3)
    )
    return replace(placement, x=x, y=y, z=z, orient=orient)


def frame_packing(packing: Packing, axis: str) -> Packing:
    placements = tuple(frame_placement(p, axis) for p in packing.placements)
    strip_axis = AXES[_SWAPS[axis][AXES.index(packing.strip_axis)]]
    spec = packing.bin_spec
    extents = (spec.W, spec.D, spec.H)
    W, D, H = (extents[i] for i in _SWAPS[axis])
    return Packing(placements, packing.kind, BinSpec(W, D, H), strip_axis)


# --- Verification ---

@dataclass(frozen=True)
class Violation:
    kind: str  # overlap | containment | duplicate
    item_ids: Tuple[str, ...]
    witness: Tuple[Fraction, ...] = ()


@dataclass(frozen=True)
class VerifyReport:
    feasible: bool
    violations: Tuple[Violation, ...]
    used_bins: int
    strip_height: Optional[Fraction]
    total_volume: Fraction
    unplaced: Tuple[str, ...] = field(default=())

    @property
    def complete(self) -> bool:
        return self.feasible and not self.unplaced


def items_overlap(p1: Placement, p2: Placement, items: ItemTable) -> bool:
    """True iff both placements share a bin and their open boxes intersect."""
    a = placement_box(p1, items)
    b = placement_box(p2, items)
    if p1.bin_index != p2.bin_index:
        return False
    return _open_intersect(a, b)


def _open_intersect(a, b) -> bool:
    return all(a[i] < b[i + 3] and b[i] < a[i + 3] for i in range(3))


def verify_packing(packing: Packing, items: ItemTable) -> VerifyReport:
    """Check containment, duplicates and pairwise disjointness exactly."""
    violations: List[Violation] = []
    seen = set()
    boxes_by_bin: Dict[int, List[tuple]] = defaultdict(list)
    volume = ZERO

    for placement in packing.placements:
        box = placement_box(placement, items)
        if placement.item_id in seen:
            violations.append(Violation("duplicate", (placement.item_id,)))
            continue
        seen.add(placement.item_id)
        volume += items[placement.item_id].volume

        for i, axis in enumerate(AXES):
            low, high = box[i], box[i + 3]
            bounded = packing.kind == "bins" or axis != packing.strip_axis
            if low < 0 or (bounded and high > packing.bin_spec.extent(axis)):
                violations.append(
                    Violation("containment", (placement.item_id,), (low, high))
                )
                break
        if packing.kind == "strip" and placement.bin_index != 0:
            violations.append(
                Violation("containment", (placement.item_id,), (Fraction(placement.bin_index),))
            )
        boxes_by_bin[placement.bin_index].append((box, placement.item_id))

    for boxes in boxes_by_bin.values():
        boxes.sort(key=lambda entry: entry[0][0])
        active: List[tuple] = []
        for box, item_id in boxes:
            active = [entry for entry in active if entry[0][3] > box[0]]
            for other, other_id in active:
                if _open_intersect(box, other):
                    witness = tuple(max(box[i], other[i]) for i in range(3))
                    violations.append(Violation("overlap", (other_id, item_id), witness))
            active.append((box, item_id))

    report = VerifyReport(
        feasible=not violations,
        violations=tuple(violations),
        used_bins=packing.used_bins,
        strip_height=strip_height(packing, items) if packing.kind == "strip" else None,
        total_volume=volume,
        unplaced=tuple(sorted(set(items) - seen)),
    )
    if violations:
        logger.debug("packing infeasible: %d violations", len(violations))
    return report


# --- 2D ---

@dataclass(frozen=True)
class Rect2D:
    id: str
    w: Fraction
    h: Fraction

    def __post_init__(self):
        for name in ("w", "h"):
            value = as_rational(getattr(self, name))
            if value <= 0:
                raise PreconditionError(f"rect {self.id!r}: {name} must be positive")
            object.__setattr__(self, name, value)

    @property
    def area(self) -> Fraction:
        return self.w * self.h


@dataclass(frozen=True)
class Placement2D:
    id: str
    x: Fraction
    y: Fraction
    w: Fraction
    h: Fraction

    def __post_init__(self):
        for name in ("x", "y", "w", "h"):
            object.__setattr__(self, name, as_rational(getattr(self, name)))

    @property
    def right(self) -> Fraction:
        return self.x + self.w

    @property
    def top(self) -> Fraction:
        return self.y + self.h


def verify_packing_2d(placements: Sequence[Placement2D], W, H) -> VerifyReport:
    """2D analog of :func:`verify_packing` for rectangles in a W x H box."""
    W, H = as_rational(W), as_rational(H)
    violations: List[Violation] = []
    seen = set()
    for p in placements:
        if p.id in seen:
            violations.append(Violation("duplicate", (p.id,)))
        seen.add(p.id)
        if p.x < 0 or p.y < 0 or p.right > W or p.top > H:
            violations.append(Violation("containment", (p.id,), (p.x, p.y)))
    ordered = sorted(placements, key=lambda p: p.x)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            if b.x >= a.right:
                break
            if a.y < b.top and b.y < a.top:
                violations.append(Violation("overlap", (a.id, b.id), (b.x, max(a.y, b.y))))
    return VerifyReport(
        feasible=not violations,
        violations=tuple(violations),
        used_bins=1 if placements else 0,
        strip_height=max((p.top for p in placements), default=ZERO),
        total_volume=sum((p.w * p.h for p in placements), ZERO),
    )
