"""
asymptotic.py
-------------
Asymptotic bin packing of cuboids through a sliced 2D instance.

Pipeline:

  1. round heights harmonically (k = 1/epsilon, identity tail);
  2. slice every item into ceil(f(h)/s) copies of its base rectangle, where
     s = epsilon * v / n;
  3. pick delta from a light band, classify the base rectangles;
  4. obtain configurations (container layouts of the unit square) either
     from a descriptor file or from the built-in generator plus an exact
     covering LP, and lift them to 3D with integer heights;
  5. fill big containers by aligned stacks, thin containers by shelves and
     tiny containers by layers, every tall item starting at a multiple of
     its own height;
  6. cut each configuration at integer heights, pooling the sliced layers,
     and send every overflow to the volume-guarantee packer.

The generator makes no ratio promise; the report certifies the structural
properties (tall items never sliced, overflow within the measured bound).
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from cuboidpack.config import get_settings
from cuboidpack.cutting import align_stack_tall, check_tall_not_sliced, cut_strips_epsilon_layers
from cuboidpack.errors import ContractViolation, InfeasibleError, PackingError, PreconditionError
from cuboidpack.geometry import (
    ONE,
    ZERO,
    Item,
    Packing,
    Placement,
    Placement2D,
    Rect2D,
    as_rational,
    format_rational,
    item_table,
    merge_bin_packings,
    total_volume,
    verify_packing,
    verify_packing_2d,
)
from cuboidpack.harmonic import IDENTITY_TAIL, round_instance_heights
from cuboidpack.layers import volume_bin_pack
from cuboidpack.shelves import nfdh_2d, shelf_placements
from cuboidpack.simplex import LinearProgram, solve_lp

logger = logging.getLogger(__name__)

BIG = "big"
VERTICAL = "vertical"
HORIZONTAL = "horizontal"
TINY = "tiny"
INTERMEDIATE = "intermediate"
CONTAINER_KINDS = (BIG, VERTICAL, HORIZONTAL, TINY)

TypeKey = Tuple[Fraction, Fraction]


# --- Slicing ---

@dataclass(frozen=True)
class SliceParams:
    epsilon: Fraction
    n: int
    slice_height: Fraction
    delta: Fraction
    mu: Fraction


@dataclass(frozen=True)
class SliceGroup:
    """``count`` identical base rectangles cut from one item."""

    item_id: str
    rect: Rect2D
    count: int


@dataclass
class SlicedInstance:
    groups: List[SliceGroup]
    params: SliceParams

    @property
    def rect_count(self) -> int:
        return sum(g.count for g in self.groups)

    def expand(self) -> List[Rect2D]:
        return [Rect2D(f"{g.item_id}#{j}", g.rect.w, g.rect.h) for g in self.groups for j in range(g.count)]

    def mapping(self) -> Dict[str, str]:
        """Rectangle id -> item id for :meth:`expand`."""
        return {f"{g.item_id}#{j}": g.item_id for g in self.groups for j in range(g.count)}

    def count_of(self, item_id: str) -> int:
        return next(g.count for g in self.groups if g.item_id == item_id)


def _weighted(rects) -> Iterable[Tuple[Rect2D, int]]:
    for entry in rects:
        if isinstance(entry, SliceGroup):
            yield entry.rect, entry.count
        else:
            yield entry, 1


def adjust_delta(delta: Fraction) -> Fraction:
    """Largest value <= delta whose reciprocal is a multiple of 24."""
    return Fraction(1, 24 * math.ceil(1 / (24 * delta)))


def compute_delta(rects: Sequence[Union[Rect2D, SliceGroup]], epsilon) -> Fraction:
    """First delta of the chain eps, eps^4, ... whose band [delta^4, delta) is light.

    Light means the rectangles with a side in the band cover at most
    ``epsilon`` times the total area.
    """
    epsilon = as_rational(epsilon)
    if not ZERO < epsilon < ONE or epsilon.numerator != 1:
        raise PreconditionError(f"epsilon={epsilon} must be 1/m for an integer m > 1")
    weighted = list(_weighted(rects))
    total = sum((r.area * c for r, c in weighted), ZERO)
    smallest = min((min(r.w, r.h) for r, _ in weighted), default=ONE)
    delta = adjust_delta(epsilon)
    for _ in range(2 * math.ceil(1 / epsilon) + 2):
        if delta <= smallest:
            return delta
        lower = delta**4
        band = sum(
            (r.area * c for r, c in weighted if lower <= r.w < delta or lower <= r.h < delta), ZERO
        )
        if band <= epsilon * total:
            return delta
        delta = adjust_delta(lower)
    raise InfeasibleError("no light band found")  # unreachable: bands are disjoint


def build_sliced_2d_instance(items: Sequence[Item], epsilon, slice_height=None) -> SlicedInstance:
    """Cut each (height-rounded) item into copies of its base rectangle.

    With slice height s, an item of height h contributes ceil(h / s)
    rectangles (w, d). By default s = epsilon * v(items) / n.
    """
    items = list(items)
    if not items:
        raise PreconditionError("cannot slice an empty instance")
    epsilon = as_rational(epsilon)
    n = len(items)
    s = as_rational(slice_height) if slice_height is not None else epsilon * total_volume(items) / n
    if s <= 0:
        raise PreconditionError("slice height must be positive")
    groups = [SliceGroup(i.id, Rect2D(i.id, i.w, i.d), math.ceil(i.h / s)) for i in items]
    delta = compute_delta(groups, epsilon)
    return SlicedInstance(groups, SliceParams(epsilon, n, s, delta, delta**4))


def classify_2d(w: Fraction, d: Fraction, delta: Fraction, mu: Fraction) -> str:
    if w >= delta and d >= delta:
        return BIG
    if d >= delta and w < mu:
        return VERTICAL
    if w >= delta and d < mu:
        return HORIZONTAL
    if w < mu and d < mu:
        return TINY
    return INTERMEDIATE


# --- Configurations ---

@dataclass(frozen=True)
class ContainerRect:
    kind: str
    key: Optional[object]  # TypeKey for big, class extent for thin, None for tiny
    x: Fraction
    y: Fraction
    w: Fraction
    d: Fraction


@dataclass
class Configuration2D:
    """Container counts of one unit-square layout.

    ``vertical[d]`` is the total width of depth-d vertical containers and
    ``horizontal[w]`` the total depth of width-w horizontal containers, both
    in units of mu; ``tiny`` is the tiny container area in units of mu^2.
    """

    big: Dict[TypeKey, int] = field(default_factory=dict)
    vertical: Dict[Fraction, int] = field(default_factory=dict)
    horizontal: Dict[Fraction, int] = field(default_factory=dict)
    tiny: int = 0
    layout: Tuple[ContainerRect, ...] = ()

    @classmethod
    def from_layout(cls, layout: Sequence[ContainerRect], mu: Fraction) -> "Configuration2D":
        config = cls(layout=tuple(layout))
        for rect in layout:
            if rect.kind == BIG:
                config.big[rect.key] = config.big.get(rect.key, 0) + 1
            elif rect.kind == VERTICAL:
                config.vertical[rect.key] = config.vertical.get(rect.key, 0) + _units(rect.w, mu)
            elif rect.kind == HORIZONTAL:
                config.horizontal[rect.key] = config.horizontal.get(rect.key, 0) + _units(rect.d, mu)
            else:
                config.tiny += _units(rect.w * rect.d, mu * mu)
        return config

    def validate(self) -> bool:
        return layout_problem(self.layout) is None


def layout_problem(layout: Sequence[ContainerRect]) -> Optional[str]:
    """First reason ``layout`` is not a packing of the unit square, or None."""
    for rect in layout:
        if rect.w <= 0 or rect.d <= 0:
            return f"{rect.kind} container at ({rect.x}, {rect.y}) has no area"
    placed = [Placement2D(str(n), r.x, r.y, r.w, r.d) for n, r in enumerate(layout)]
    report = verify_packing_2d(placed, 1, 1)
    if report.feasible:
        return None
    violation = report.violations[0]
    where = ", ".join(
        f"{layout[int(n)].kind} at ({layout[int(n)].x}, {layout[int(n)].y})" for n in violation.item_ids
    )
    return f"{violation.kind}: {where}"


def _units(length: Fraction, unit: Fraction) -> int:
    count = length / unit
    if count.denominator != 1:
        raise PreconditionError(f"container extent {length} is not a multiple of {unit}")
    return count.numerator


@dataclass
class Demands:
    mu: Fraction
    big: Dict[TypeKey, Fraction] = field(default_factory=dict)  # slices per type
    vertical: Dict[Fraction, Fraction] = field(default_factory=dict)  # sum of count * width
    horizontal: Dict[Fraction, Fraction] = field(default_factory=dict)  # sum of count * depth
    tiny: Fraction = ZERO  # sum of count * base area


@dataclass
class ConfigLPResult:
    x: List[Fraction]
    objective: Fraction

    def nonzeros(self) -> int:
        return sum(1 for v in self.x if v != 0)


def config_lp_solve(configs: Sequence[Configuration2D], demands: Demands) -> ConfigLPResult:
    """Minimize the number of 2D bins (sum of x_C) covering every demand."""
    configs = list(configs)
    if not configs:
        raise PreconditionError("configuration set is empty")
    mu = demands.mu
    lp = LinearProgram(len(configs), [ONE] * len(configs))
    for t, need in sorted(demands.big.items()):
        lp.add_row({j: c.big.get(t, 0) for j, c in enumerate(configs)}, ">=", need)
    for d, need in sorted(demands.vertical.items()):
        lp.add_row({j: c.vertical.get(d, 0) * mu for j, c in enumerate(configs)}, ">=", need)
    for w, need in sorted(demands.horizontal.items()):
        lp.add_row({j: c.horizontal.get(w, 0) * mu for j, c in enumerate(configs)}, ">=", need)
    if demands.tiny > 0:
        lp.add_row({j: c.tiny * mu * mu for j, c in enumerate(configs)}, ">=", demands.tiny)
    solution = solve_lp(lp)
    return ConfigLPResult(solution.x, solution.objective)


def _grid_up(value: Fraction, grid: int) -> Fraction:
    return Fraction(math.ceil(value * grid), grid)


def _tiny_fill(y0: Fraction, mu: Fraction) -> List[ContainerRect]:
    depth = math.floor((ONE - y0) / mu) * mu
    return [ContainerRect(TINY, None, ZERO, y0, ONE, depth)] if depth > 0 else []


def generate_configurations(demands: Demands, grid: int) -> List[Configuration2D]:
    """Heuristic configuration set built from the instance's rounded sizes."""
    mu = demands.mu
    configs: List[Configuration2D] = []
    types = sorted(demands.big, key=lambda t: (-t[1], -t[0]))
    for t in types:
        w, d = t
        cols, rows = math.floor(1 / w), math.floor(1 / d)
        layout = [ContainerRect(BIG, t, c * w, r * d, w, d) for r in range(rows) for c in range(cols)]
        configs.append(Configuration2D.from_layout(layout + _tiny_fill(rows * d, mu), mu))
    if len(types) > 1:
        # One container of as many types as NFDH fits, tallest first.
        chosen: List[TypeKey] = []
        for t in types:
            shelves, height = nfdh_2d([Rect2D(str(n), *c) for n, c in enumerate(chosen + [t])], 1)
            if height <= 1:
                chosen.append(t)
        if len(chosen) > 1:
            shelves, height = nfdh_2d([Rect2D(str(n), *c) for n, c in enumerate(chosen)], 1)
            layout = [ContainerRect(BIG, chosen[int(p.id)], p.x, p.y, p.w, p.h) for p in shelf_placements(shelves)]
            configs.append(Configuration2D.from_layout(layout + _tiny_fill(height, mu), mu))
    for d in sorted(demands.vertical):
        rows = math.floor(1 / d)
        layout = [ContainerRect(VERTICAL, d, ZERO, r * d, ONE, d) for r in range(rows)]
        configs.append(Configuration2D.from_layout(layout + _tiny_fill(rows * d, mu), mu))
    for w in sorted(demands.horizontal):
        cols = math.floor(1 / w)
        layout = [ContainerRect(HORIZONTAL, w, c * w, ZERO, w, ONE) for c in range(cols)]
        configs.append(Configuration2D.from_layout(layout, mu))
    if demands.tiny > 0:
        configs.append(Configuration2D.from_layout([ContainerRect(TINY, None, ZERO, ZERO, ONE, ONE)], mu))
    bad = [n for n, c in enumerate(configs) if not c.validate()]
    if bad:
        raise PreconditionError(f"generated configurations {bad} have overlapping containers")
    logger.debug("generated %d configurations over grid 1/%d", len(configs), grid)
    return configs


@dataclass(frozen=True)
class Container3D:
    kind: str
    key: Optional[object]
    config: int
    x: Fraction
    y: Fraction
    w: Fraction
    d: Fraction
    height: int


@dataclass
class Configuration3D:
    height: int
    containers: List[Container3D]


def lift_configurations(layouts: Sequence[Sequence[ContainerRect]], heights: Sequence[int]) -> List[Configuration3D]:
    lifted = []
    for index, (layout, height) in enumerate(zip(layouts, heights)):
        containers = [Container3D(r.kind, r.key, index, r.x, r.y, r.w, r.d, height) for r in layout]
        lifted.append(Configuration3D(height, containers))
    return lifted


# --- Big items ---

@dataclass
class BigAssignment:
    assigned: Dict[str, TypeKey]
    fractional: List[Item]


def assign_big_lp(
    items: Sequence[Item],
    admissible: Mapping[str, Sequence[TypeKey]],
    capacities: Mapping[TypeKey, Fraction],
) -> BigAssignment:
    """Split item heights over admissible container types within capacity.

    Items with a single admissible type are settled up front; the rest go
    through the exact LP. An item whose basic solution uses one type gets
    that type, the others (at most one per type) are returned as fractional.
    """
    remaining = {t: as_rational(c) for t, c in capacities.items()}
    assigned: Dict[str, TypeKey] = {}
    open_items = []
    for item in items:
        types = [t for t in admissible.get(item.id, ()) if t in remaining]
        if not types:
            raise InfeasibleError(f"item {item.id!r} has no admissible container type")
        if len(types) == 1:
            remaining[types[0]] -= item.h
            assigned[item.id] = types[0]
        else:
            open_items.append((item, types))
    short = [t for t, c in remaining.items() if c < 0]
    if short:
        raise InfeasibleError(f"container types {short} are over capacity")
    if not open_items:
        return BigAssignment(assigned, [])

    columns = [(item, t) for item, types in open_items for t in types]
    lp = LinearProgram(len(columns))
    for item, _ in open_items:
        lp.add_row({j: 1 for j, (other, _) in enumerate(columns) if other.id == item.id}, "==", item.h)
    for t in sorted(remaining):
        row = {j: 1 for j, (_, u) in enumerate(columns) if u == t}
        if row:
            lp.add_row(row, "<=", remaining[t])
    solution = solve_lp(lp)
    used: Dict[str, List[TypeKey]] = defaultdict(list)
    for j, (item, t) in enumerate(columns):
        if solution.x[j] != 0:
            used[item.id].append(t)
    fractional = []
    for item, _ in open_items:
        if len(used[item.id]) == 1:
            assigned[item.id] = used[item.id][0]
        else:
            fractional.append(item)
    return BigAssignment(assigned, fractional)


@dataclass
class StackResult:
    positions: Dict[str, Tuple[int, Fraction]]  # item id -> (container index, local z)
    extensions: List[Fraction]
    gap_total: Fraction = ZERO


def stack_big(items: Sequence[Item], heights: Sequence[int], epsilon) -> StackResult:
    """Stack items of one type and cut the stack into containers of the given heights.

    Items are sorted by nonincreasing height and aligned so tall items never
    cross an integer; since container heights are integers, only short
    items can be cut, and they stay with the container they start in.
    """
    items = sorted(items, key=lambda i: (-i.h, i.id))
    heights = [int(h) for h in heights]
    if sum((i.h for i in items), ZERO) > sum(heights):
        raise PreconditionError("containers are shorter than the stacked items")
    if not items:
        return StackResult({}, [ZERO] * len(heights))
    stack = align_stack_tall(items, epsilon)
    bounds = [0]
    for h in heights:
        bounds.append(bounds[-1] + h)
    positions: Dict[str, Tuple[int, Fraction]] = {}
    tops = [ZERO] * len(heights)
    j = 0
    for item_id, bottom, top in stack.placements:
        while j < len(heights) - 1 and bottom >= bounds[j + 1]:
            j += 1
        positions[item_id] = (j, bottom - bounds[j])
        tops[j] = max(tops[j], top - bounds[j])
    extensions = [max(ZERO, top - h) for top, h in zip(tops, heights)]
    return StackResult(positions, extensions, stack.gap_total)


# --- Thin and tiny containers ---

@dataclass
class ContainerFill:
    positions: Dict[str, Tuple[int, Fraction, Fraction, Fraction]] = field(default_factory=dict)
    overflow: List[Item] = field(default_factory=list)
    unplaced: List[Item] = field(default_factory=list)
    extensions: List[Fraction] = field(default_factory=list)
    overflow_bound: Fraction = ZERO
    levels: List[Tuple[Fraction, Fraction]] = field(default_factory=list)  # (base, tallest)


def _align(base: Fraction, tallest: Fraction, epsilon: Fraction) -> Fraction:
    if tallest > epsilon and tallest.numerator == 1:
        q = tallest.denominator
        return Fraction(math.ceil(base * q), q)
    return base


def _shelf_fill(items: Sequence[Item], containers: Sequence[Container3D], mu, epsilon) -> ContainerFill:
    """Shelf placement of x-thin items into containers, faces in the x-z plane."""
    fill = ContainerFill()
    queue = sorted(items, key=lambda i: (-i.h, i.id))
    for item in queue:
        if item.w >= mu:
            raise PreconditionError(f"item {item.id!r} is not thinner than mu")
    by_id = {i.id: i for i in queue}
    pos = 0
    for index, box in enumerate(containers):
        chosen, area = [], ZERO
        while pos < len(queue) and area < box.w * box.height:
            chosen.append(queue[pos])
            area += queue[pos].w * queue[pos].h
            pos += 1
        if not chosen:
            fill.extensions.append(ZERO)
            continue
        shelves, nfdh_height = nfdh_2d([Rect2D(i.id, i.w, i.h) for i in chosen], box.w + 2 * mu)
        offset, top = ZERO, ZERO
        for shelf in shelves:
            base = _align(shelf.base_z + offset, shelf.height, epsilon)
            offset = base - shelf.base_z
            fill.levels.append((base, shelf.height))
            for p in shelf.members:
                item = by_id[p.id]
                if p.right > box.w:
                    fill.overflow.append(item)
                    continue
                fill.positions[item.id] = (index, box.x + p.x, box.y, base)
                top = max(top, base + item.h)
        fill.extensions.append(max(ZERO, top - box.height))
        fill.overflow_bound += 3 * mu * max(i.d for i in chosen) * nfdh_height
    fill.unplaced = queue[pos:]
    return fill


def _swap_xy(item: Item) -> Item:
    return Item(item.id, item.d, item.w, item.h)


def place_thin_containers(items: Sequence[Item], containers: Sequence[Container3D], mu, epsilon,
                          axis: str = VERTICAL) -> ContainerFill:
    """Fill thin containers shelf by shelf.

    Vertical items (width < mu) fill containers along x; horizontal items
    (depth < mu) are handled in the frame rotated a quarter turn about z.
    Item heights are the rounded ones. Items crossing a container's far
    side go to ``overflow``; shelves whose tallest item is 1/q > epsilon
    start at a multiple of 1/q.
    """
    mu, epsilon = as_rational(mu), as_rational(epsilon)
    if axis == VERTICAL:
        return _shelf_fill(items, containers, mu, epsilon)
    if axis != HORIZONTAL:
        raise PreconditionError(f"unknown thin axis {axis!r}")
    swapped = [Container3D(c.kind, c.key, c.config, c.y, c.x, c.d, c.w, c.height) for c in containers]
    fill = _shelf_fill([_swap_xy(i) for i in items], swapped, mu, epsilon)
    by_id = {i.id: i for i in items}
    fill.positions = {k: (c, y, x, z) for k, (c, x, y, z) in fill.positions.items()}
    fill.overflow = [by_id[i.id] for i in fill.overflow]
    fill.unplaced = [by_id[i.id] for i in fill.unplaced]
    return fill


def place_tiny_containers(items: Sequence[Item], containers: Sequence[Container3D], mu, epsilon) -> ContainerFill:
    """Fill tiny containers with top-aligned layers of NFDH-packed top faces."""
    mu, epsilon = as_rational(mu), as_rational(epsilon)
    fill = ContainerFill()
    queue = sorted(items, key=lambda i: (-i.h, i.id))
    for item in queue:
        if item.w >= mu or item.d >= mu:
            raise PreconditionError(f"item {item.id!r} is not tiny")
    by_id = {i.id: i for i in queue}
    pos = 0
    for index, box in enumerate(containers):
        h, offset, top, swept = ZERO, ZERO, ZERO, ZERO
        while pos < len(queue) and h <= box.height + 1:
            chosen, area = [], ZERO
            while pos < len(queue) and area < box.w * box.d:
                chosen.append(queue[pos])
                area += queue[pos].base_area
                pos += 1
            shelves, _ = nfdh_2d([Rect2D(i.id, i.w, i.d) for i in chosen], box.w + 2 * mu)
            swept += max(i.h for i in chosen)
            placed = []
            for p in shelf_placements(shelves):
                if p.right > box.w or p.top > box.d:
                    fill.overflow.append(by_id[p.id])
                else:
                    placed.append(p)
            if not placed:
                continue
            layer = max(by_id[p.id].h for p in placed)
            base = _align(h + offset, layer, epsilon)
            offset = base - h
            fill.levels.append((base, layer))
            for p in placed:
                item = by_id[p.id]
                fill.positions[item.id] = (index, box.x + p.x, box.y + p.y, base + layer - item.h)
            h += layer
            top = base + layer
        fill.extensions.append(max(ZERO, top - box.height))
        fill.overflow_bound += 3 * mu * (box.w + box.d + 4 * mu) * swept
    fill.unplaced = queue[pos:]
    return fill


# --- Descriptor ---

@dataclass
class ContainerDescriptor:
    """Explicit container packing: layouts with an integer height or a multiplicity."""

    layouts: List[List[ContainerRect]]
    heights: List[Optional[int]]
    multiplicities: List[Optional[Fraction]]

    def resolve_heights(self, slice_height: Fraction) -> List[int]:
        out = []
        for height, mult in zip(self.heights, self.multiplicities):
            out.append(height if height is not None else math.ceil(mult * slice_height))
        return out

    def validate(self) -> None:
        for index, layout in enumerate(self.layouts):
            problem = layout_problem(layout)
            if problem:
                raise PreconditionError(f"configuration {index}: {problem}")


# --- Report & solver ---

@dataclass
class AsymptoticReport:
    container_source: str
    bins: int
    epsilon: Fraction
    slice_height: Fraction = ZERO
    delta: Fraction = ZERO
    mu: Fraction = ZERO
    configurations: int = 0
    config_height: int = 0
    lp_objective: Optional[Fraction] = None
    extensions: Dict[str, Fraction] = field(default_factory=dict)
    overflow_volume: Dict[str, Fraction] = field(default_factory=dict)
    overflow_bound: Fraction = ZERO
    overflow_measured: Fraction = ZERO  # thin and tiny border crossers
    tall_not_sliced: bool = True
    cut_extra_bins: int = 0
    fallback_bins: int = 0
    fallback: bool = False

    def to_dict(self) -> dict:
        out = {}
        for key, value in self.__dict__.items():
            if isinstance(value, Fraction):
                value = format_rational(value)
            elif isinstance(value, dict):
                value = {k: format_rational(v) for k, v in value.items()}
            out[key] = value
        return out


def _demands(rounded: Sequence[Item], sliced: SlicedInstance, classes: Dict[str, str], grid: int) -> Demands:
    demands = Demands(sliced.params.mu)
    counts = {g.item_id: g.count for g in sliced.groups}
    for item in rounded:
        c = counts[item.id]
        kind = classes[item.id]
        if kind == BIG:
            t = (_grid_up(item.w, grid), _grid_up(item.d, grid))
            demands.big[t] = demands.big.get(t, ZERO) + c
        elif kind == VERTICAL:
            d = _grid_up(item.d, grid)
            demands.vertical[d] = demands.vertical.get(d, ZERO) + c * item.w
        elif kind == HORIZONTAL:
            w = _grid_up(item.w, grid)
            demands.horizontal[w] = demands.horizontal.get(w, ZERO) + c * item.d
        elif kind == TINY:
            demands.tiny += c * item.base_area
    return demands


def _smallest_class(value: Fraction, classes: Iterable[Fraction]) -> Optional[Fraction]:
    return min((c for c in classes if c >= value), default=None)


def solve_asymptotic_bp(
    items: Sequence[Item],
    epsilon=None,
    container_source: str = "generator",
    descriptor: Optional[ContainerDescriptor] = None,
) -> Tuple[Packing, AsymptoticReport]:
    """Asymptotic packing; anything the containers cannot hold is packed by volume."""
    settings = get_settings()
    epsilon = as_rational(settings.asymptotic_epsilon if epsilon is None else epsilon)
    if not ZERO < epsilon <= Fraction(1, 4) or epsilon.numerator != 1:
        raise PreconditionError(f"epsilon={epsilon} must be 1/m with m >= 4")
    if container_source not in ("generator", "explicit"):
        raise PreconditionError(f"unknown container source {container_source!r}")
    if container_source == "explicit" and descriptor is None:
        raise PreconditionError("explicit container source needs a descriptor")
    if container_source == "explicit":
        descriptor.validate()
    items = list(items)
    report = AsymptoticReport(container_source, 0, epsilon)
    if not items:
        return Packing((), "bins"), report
    try:
        return _pipeline(items, epsilon, container_source, descriptor, settings.type_grid, report)
    except ContractViolation:
        raise
    except PackingError as exc:
        logger.warning("asymptotic pipeline failed (%s); volume fallback", exc)
        packing = volume_bin_pack(items)
        report.bins = report.fallback_bins = packing.used_bins
        report.fallback = True
        return packing, report


def _pipeline(items, epsilon, container_source, descriptor, grid, report: AsymptoticReport):
    table = item_table(items)
    rounded = list(round_instance_heights(items, int(1 / epsilon), IDENTITY_TAIL).items)
    sliced = build_sliced_2d_instance(rounded, epsilon)
    params = sliced.params
    delta, mu, s = params.delta, params.mu, params.slice_height
    report.slice_height, report.delta, report.mu = s, delta, mu
    classes = {i.id: classify_2d(i.w, i.d, delta, mu) for i in rounded}

    if container_source == "explicit":
        layouts = descriptor.layouts
        heights = descriptor.resolve_heights(s)
    else:
        demands = _demands(rounded, sliced, classes, grid)
        configs = generate_configurations(demands, grid)
        if configs:
            lp = config_lp_solve(configs, demands)
            report.lp_objective = lp.objective
            chosen = [(c, x) for c, x in zip(configs, lp.x) if x > 0]
        else:
            chosen = []
        layouts = [list(c.layout) for c, _ in chosen]
        heights = [math.ceil(x * s) for _, x in chosen]
    lifted = lift_configurations(layouts, heights)
    report.configurations = len(lifted)
    report.config_height = sum(heights)

    containers: Dict[str, List[Container3D]] = defaultdict(list)
    for config in lifted:
        for box in config.containers:
            containers[box.kind].append(box)

    overflow: Dict[str, List[Item]] = defaultdict(list)
    placed: Dict[int, List[Placement]] = defaultdict(list)
    by_kind: Dict[str, List[Item]] = defaultdict(list)
    for item in rounded:
        by_kind[classes[item.id]].append(item)
    overflow[INTERMEDIATE] = list(by_kind[INTERMEDIATE])

    # Big items: own (smallest dominating) type first, LP for the rest.
    types = sorted({box.key for box in containers[BIG]}, key=lambda t: (t[0] * t[1], t))
    capacity = {t: ZERO for t in types}
    for box in containers[BIG]:
        capacity[box.key] += box.height
    assigned: Dict[str, TypeKey] = {}
    pending = []
    for item in by_kind[BIG]:
        fits = [t for t in types if t[0] >= item.w and t[1] >= item.d]
        if fits and capacity[fits[0]] >= item.h:
            capacity[fits[0]] -= item.h
            assigned[item.id] = fits[0]
        elif fits:
            pending.append((item, fits))
        else:
            overflow["fractional"].append(item)
    if pending:
        try:
            result = assign_big_lp([i for i, _ in pending], {i.id: f for i, f in pending}, capacity)
            assigned.update(result.assigned)
            overflow["fractional"] += result.fractional
        except InfeasibleError as exc:
            logger.info("big assignment LP infeasible (%s); %d items to fallback", exc, len(pending))
            overflow["fractional"] += [i for i, _ in pending]

    extensions: Dict[str, Fraction] = defaultdict(lambda: ZERO)
    for t in types:
        boxes = [b for b in containers[BIG] if b.key == t]
        members = [i for i in by_kind[BIG] if assigned.get(i.id) == t]
        stacked = stack_big(members, [b.height for b in boxes], epsilon)
        for item_id, (j, z) in stacked.positions.items():
            box = boxes[j]
            placed[box.config].append(Placement(item_id, 0, box.x, box.y, z))
        extensions[BIG] += sum(stacked.extensions, ZERO)

    # Thin items go to the smallest container class that holds them.
    for kind, extent in ((VERTICAL, "d"), (HORIZONTAL, "w")):
        classes_here = sorted({box.key for box in containers[kind]})
        groups: Dict[Fraction, List[Item]] = defaultdict(list)
        for item in by_kind[kind]:
            cls = _smallest_class(getattr(item, extent), classes_here)
            if cls is None:
                overflow[kind].append(item)
            else:
                groups[cls].append(item)
        for cls, members in sorted(groups.items()):
            boxes = [b for b in containers[kind] if b.key == cls]
            fill = place_thin_containers(members, boxes, mu, epsilon, kind)
            _collect(fill, boxes, placed)
            overflow[kind] += fill.overflow + fill.unplaced
            extensions[kind] += sum(fill.extensions, ZERO)
            report.overflow_bound += fill.overflow_bound
            report.overflow_measured += total_volume(fill.overflow)

    fill = place_tiny_containers(by_kind[TINY], containers[TINY], mu, epsilon)
    _collect(fill, containers[TINY], placed)
    overflow[TINY] += fill.overflow + fill.unplaced
    extensions[TINY] += sum(fill.extensions, ZERO)
    report.overflow_bound += fill.overflow_bound
    report.overflow_measured += total_volume(fill.overflow)
    if report.overflow_measured > report.overflow_bound:
        raise ContractViolation(
            f"thin/tiny overflow {report.overflow_measured} exceeds its bound {report.overflow_bound}"
        )
    report.extensions = dict(extensions)

    strips = [Packing(tuple(placed.get(c, ())), "strip") for c in range(len(lifted))]
    strips = [strip for strip in strips if strip.placements]
    report.tall_not_sliced = bool(check_tall_not_sliced(strips, table, epsilon))
    cut = cut_strips_epsilon_layers(strips, table, epsilon) if strips else None
    report.cut_extra_bins = cut.extra_bins_used if cut else 0

    leftovers = [table[i.id] for group in overflow.values() for i in group]
    report.overflow_volume = {k: total_volume(table[i.id] for i in v) for k, v in overflow.items() if v}
    rest = volume_bin_pack(leftovers)
    report.fallback_bins = rest.used_bins
    packing = merge_bin_packings([p for p in (cut.bins if cut else None, rest) if p is not None])
    if not verify_packing(packing, table).complete:
        raise InfeasibleError("assembled packing failed verification")
    report.bins = packing.used_bins
    logger.info(
        "asymptotic BP: %d bins (%d configurations, %d cut layers, %d fallback)",
        packing.used_bins, report.configurations, report.cut_extra_bins, report.fallback_bins,
    )
    return packing, report


def _collect(fill: ContainerFill, boxes: Sequence[Container3D], placed: Dict[int, List[Placement]]) -> None:
    for item_id, (j, x, y, z) in fill.positions.items():
        placed[boxes[j].config].append(Placement(item_id, 0, x, y, z))
