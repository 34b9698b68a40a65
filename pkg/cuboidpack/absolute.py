"""
absolute.py
-----------
Absolute-approximation bin packing of cuboids and the strip packing built on
top of it.

The bin pipeline guesses the optimum k = 1..K. For each guess it picks a
threshold mu, splits the items by which dimensions are tiny, and runs one of
two cases:

  * few large items (by volume): every thin class is packed separately along
    its thin axis and the large items, now thin in some direction as well,
    go into the empty strips those packings leave;
  * otherwise: the two lighter thin classes are packed separately, the large
    items are placed by exact search and plate-like items thin along the
    remaining axis fill the slots between them.

A guess is accepted when every stage's precondition held and the bin count
respects the backend's certified bound. Without an accepted guess the
volume-guarantee packing is returned.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from cuboidpack.config import get_settings
from cuboidpack.cutting import split_by_planes
from cuboidpack.errors import ContractViolation, PackingError, PreconditionError
from cuboidpack.gap import gap_assign
from cuboidpack.geometry import (
    HALF,
    IDENTITY,
    ONE,
    ZERO,
    Item,
    ItemTable,
    Packing,
    Placement,
    as_rational,
    bin_fill_heights,
    format_rational,
    frame_item,
    frame_packing,
    item_table,
    max_extent,
    merge_bin_packings,
    placement_box,
    strip_height,
    total_volume,
    verify_packing,
)
from cuboidpack.layers import backend_packs, by_height, get_backend, licheng_strip, volume_bin_pack
from cuboidpack.slots import enumerate_slot_packings

logger = logging.getLogger(__name__)

CASE_SEPARATE = "case1"
CASE_LARGE_THIN = "case2"
CASE_FALLBACK = "fallback"


@dataclass(frozen=True)
class AbsParams:
    K: int
    lam: Fraction
    delta: Fraction
    epsilon: Fraction
    backend: str = "licheng"
    large_item_cap: int = 12

    def __post_init__(self):
        if self.K < 1:
            raise PreconditionError("K must be at least 1")
        if not ZERO < self.delta < self.lam:
            raise PreconditionError(f"need 0 < delta < lambda (delta={self.delta}, lambda={self.lam})")

    @classmethod
    def default(cls, K: Optional[int] = None, epsilon=None, delta=None, backend: Optional[str] = None,
                large_item_cap: int = 12) -> "AbsParams":
        settings = get_settings()
        K = settings.k_max if K is None else K
        lam = as_rational(settings.epsilon if epsilon is None else epsilon)
        if delta is None:
            delta = min(lam / 1000, lam**3 / K)
        return cls(K, lam, as_rational(delta), lam, backend or settings.backend, large_item_cap)


@dataclass
class EmptyRegion:
    bin_index: int
    axis: str
    start: Fraction
    height: Fraction


@dataclass
class AbsoluteReport:
    backend: str
    case: str
    bins: int
    delta: Fraction
    k_accepted: Optional[int] = None
    bin_bound: Optional[int] = None
    mu: Optional[Fraction] = None
    axis: Optional[str] = None
    last_bin_fill: Fraction = ZERO
    empty_regions: List[EmptyRegion] = field(default_factory=list)
    rejected: Dict[int, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        def clean(value):
            if isinstance(value, Fraction):
                return format_rational(value)
            if isinstance(value, dict):
                return {str(k): clean(v) for k, v in value.items()}
            if isinstance(value, list):
                return [clean(v) for v in value]
            return value

        return clean(asdict(self))


# --- Thresholds & classes ---

def compute_mu(items: Sequence[Item], delta, K: int) -> Fraction:
    """Largest mu in the chain delta, delta^4, delta^16, ... whose band is light.

    Returns mu_{j-1} for the first j such that the items having a dimension
    in (mu_j, mu_{j-1}] weigh at most delta in total.
    """
    delta = as_rational(delta)
    if total_volume(items) > K:
        raise PreconditionError(f"volume {total_volume(items)} exceeds K={K}")
    smallest = min((min(i.dims) for i in items), default=ONE)
    upper = delta
    for _ in range(math.ceil(3 * K / delta)):
        if upper < smallest:
            return upper
        lower = upper**4
        band = total_volume(i for i in items if any(lower < v <= upper for v in i.dims))
        if band <= delta:
            return upper
        upper = lower
    raise ContractViolation("no light band found")  # unreachable by pigeonhole


@dataclass
class AbsClassification:
    mu: Fraction
    L: List[Item] = field(default_factory=list)
    I_h: List[Item] = field(default_factory=list)
    I_w: List[Item] = field(default_factory=list)
    I_d: List[Item] = field(default_factory=list)
    I_rem_h: List[Item] = field(default_factory=list)
    I_rem_w: List[Item] = field(default_factory=list)
    I_rem_d: List[Item] = field(default_factory=list)

    @property
    def I_rem(self) -> List[Item]:
        return self.I_rem_h + self.I_rem_w + self.I_rem_d

    @property
    def I_h_ell(self) -> List[Item]:
        return [i for i in self.I_h if i.w > HALF and i.d > HALF]

    @property
    def I_h_s(self) -> List[Item]:
        return [i for i in self.I_h if not (i.w > HALF and i.d > HALF)]

    def thin(self, axis: str) -> List[Item]:
        return {"z": self.I_h, "x": self.I_w, "y": self.I_d}[axis]


def classify_absolute(items: Sequence[Item], mu) -> AbsClassification:
    mu = as_rational(mu)
    tiny = mu**4
    cls = AbsClassification(mu)
    for item in items:
        if all(v > mu for v in item.dims):
            cls.L.append(item)
        elif item.h <= tiny:
            cls.I_h.append(item)
        elif item.w <= tiny:
            cls.I_w.append(item)
        elif item.d <= tiny:
            cls.I_d.append(item)
        elif item.h <= mu:
            cls.I_rem_h.append(item)
        elif item.w <= mu:
            cls.I_rem_w.append(item)
        else:
            cls.I_rem_d.append(item)
    return cls


def volume_groups(items: Sequence[Item], limit: Fraction) -> List[List[Item]]:
    """Greedy maximal groups (tallest first) of total volume at most ``limit``."""
    groups: List[List[Item]] = []
    current, volume = [], ZERO
    for item in by_height(items):
        if current and volume + item.volume > limit:
            groups.append(current)
            current, volume = [], ZERO
        current.append(item)
        volume += item.volume
    if current:
        groups.append(current)
    return groups


def bin_bound(k: int, backend) -> int:
    g = backend.guarantee
    if not g.volume_based and g.mult <= Fraction(3, 2):
        return 6 * k
    return 13 * k + 3


# --- Separate packing of a thin class ---

@dataclass
class SeparateResult:
    framed: Packing
    axis: str
    empty: Optional[EmptyRegion]
    strip_height: Fraction = ZERO

    @property
    def packing(self) -> Packing:
        return frame_packing(self.framed, self.axis)


def pack_separate(items: Sequence[Item], axis: str, k: int, backend=None, mu=None) -> SeparateResult:
    """Pack items that are thin along ``axis`` into bins via one strip.

    The strip is cut at integer heights; items crossing a cut are laid as
    layers on top of the last bin (or a fresh one when it is full). The free
    space left above them is reported as the empty region.
    """
    items = list(items)
    if mu is not None:
        mu = as_rational(mu)
        offenders = [i.id for i in items if i.extent(axis) > mu]
        if offenders:
            raise PreconditionError(f"items thicker than mu along {axis}: {offenders[:5]}")
    if not items:
        return SeparateResult(Packing((), "bins"), axis, None)
    backend = backend or get_backend(get_settings().backend, get_settings().external_backend)

    framed = [frame_item(i, axis) for i in items]
    table = item_table(framed)
    strip = backend_packs(backend, framed)
    slabs, sliced = split_by_planes(strip, table)

    placements: List[Placement] = []
    for new_index, slab in enumerate(sorted(slabs)):
        placements += [p.moved(dz=-slab, bin_index=new_index) for p in slabs[slab]]
    last = len(slabs) - 1
    fill = max((placement_box(p, table)[5] for p in placements if p.bin_index == last), default=ZERO)
    for plane in sorted(sliced):
        layer = sliced[plane]
        boxes = [placement_box(p, table) for p in layer]
        thickness = max(box[5] - box[2] for box in boxes)
        if last < 0 or fill + thickness > ONE:
            last, fill = last + 1, ZERO
        placements += [p.moved(dz=fill - box[2], bin_index=last) for p, box in zip(layer, boxes)]
        fill += thickness

    packing = Packing(tuple(placements), "bins")
    height = strip_height(strip, table)
    expected = 3 * k // 2 + 1 if not backend.guarantee.volume_based else 4 * k + 1
    if packing.used_bins > expected:
        logger.info("pack_separate(%s): %d bins exceed the %d expected for k=%d", axis, packing.used_bins, expected, k)
    return SeparateResult(packing, axis, EmptyRegion(last, axis, fill, ONE - fill), height)


# --- Plates thin in height ---

def pack_Ihs_grouped(items: Sequence[Item], k: int, delta, mu) -> Packing:
    """Pack half-thin plates into at most k bins, each leaving an empty top strip."""
    items = list(items)
    delta, mu = as_rational(delta), as_rational(mu)
    for item in items:
        if item.h > mu**4:
            raise PreconditionError(f"item {item.id!r} is not thin in height")
        if item.w > HALF and item.d > HALF:
            raise PreconditionError(f"item {item.id!r} has both w and d above 1/2")
    if total_volume(items) > (Fraction(1, 3) - 21 * delta) * k:
        raise PreconditionError(f"plate volume {total_volume(items)} too large for k={k}")
    groups = volume_groups(items, Fraction(1, 3) - 20 * delta)
    if len(groups) > k:
        raise PreconditionError(f"{len(groups)} plate groups exceed k={k}")
    placements: List[Placement] = []
    for b, group in enumerate(groups):
        strip = licheng_strip(group, "halfthin")
        height = strip_height(strip, item_table(group))
        if height > ONE:
            raise ContractViolation(f"plate group {b} needs height {height}")
        if height > 1 - 59 * delta:
            logger.warning("plate group %d leaves less than 59*delta free (height %s)", b, height)
        placements += [p.moved(bin_index=b) for p in strip.placements]
    return Packing(tuple(placements), "bins")


def repack_leftovers(
    leftovers: Sequence[Item],
    rem_h: Sequence[Item],
    base: Packing,
    items: ItemTable,
    delta,
    mu,
    k: int,
) -> Packing:
    """Put unassigned plates and the light height band into free top strips."""
    leftovers, rem_h = list(leftovers), list(rem_h)
    delta = as_rational(delta)
    if total_volume(leftovers) > 5 * delta * k:
        raise PreconditionError(f"leftover plates weigh {total_volume(leftovers)} > 5*delta*k")
    if not leftovers and not rem_h:
        return base
    table = dict(items)
    table.update(item_table(leftovers + rem_h))
    fills = {b: ZERO for b in range(base.used_bins)}
    fills.update(bin_fill_heights(base, table))

    blocks = [licheng_strip(group, "general") for group in volume_groups(leftovers, 6 * delta)]
    if rem_h:
        blocks.append(licheng_strip(rem_h, "general"))

    placements = list(base.placements)
    for strip in blocks:
        height = strip_height(strip, table)
        if height > ONE:
            raise ContractViolation(f"leftover block needs height {height}")
        target = next((b for b in sorted(fills) if fills[b] + height <= ONE), None)
        if target is None:
            target = len(fills)
            fills[target] = ZERO
        placements += [p.moved(dz=fills[target], bin_index=target) for p in strip.placements]
        fills[target] += height
    return Packing(tuple(placements), "bins")


# --- Large items thin in some direction ---

@dataclass
class LargeThinResult:
    strips: Dict[str, Packing]
    thickness: Dict[str, Fraction]


def pack_large_thin(large: Sequence[Item], epsilon, delta=None, K: Optional[int] = None) -> LargeThinResult:
    """Three strips (along z, x, y) holding the light large items.

    Each item goes to the first axis along which it is at most 4*epsilon.
    Returned strips use their own axis as ``strip_axis``.
    """
    large = list(large)
    epsilon = as_rational(epsilon)
    if delta is not None and K is not None and total_volume(large) > 64 * as_rational(delta) * K:
        raise PreconditionError(f"large volume {total_volume(large)} exceeds 64*delta*K")
    limit = 4 * epsilon
    parts: Dict[str, List[Item]] = {"z": [], "x": [], "y": []}
    for item in large:
        if item.h <= limit:
            parts["z"].append(item)
        elif item.w <= limit:
            parts["x"].append(item)
        elif item.d <= limit:
            parts["y"].append(item)
        else:
            raise PreconditionError(f"large item {item.id!r} has no dimension <= 4*epsilon")

    strips, thickness = {}, {}
    for axis, members in parts.items():
        framed = [frame_item(i, axis) for i in members]
        strip = licheng_strip(framed, "general")
        thickness[axis] = strip_height(strip, item_table(framed))
        if thickness[axis] > 33 * epsilon:
            logger.warning("large-thin strip along %s is %s thick (> 33*epsilon)", axis, thickness[axis])
        strips[axis] = frame_packing(strip, axis)
    return LargeThinResult(strips, thickness)


def _absorb_strip(sep: SeparateResult, strip: Packing, items: Sequence[Item]) -> Packing:
    """Drop a thin strip (same axis as ``sep``) into sep's empty region."""
    axis = sep.axis
    framed_strip = frame_packing(strip, axis)
    if not framed_strip.placements:
        return sep.framed
    table = {i.id: frame_item(i, axis) for i in items}
    thickness = strip_height(framed_strip, table)
    if thickness > ONE:
        raise ContractViolation(f"large-thin strip along {axis} is thicker than a bin")
    if sep.empty is not None and thickness <= sep.empty.height:
        target, start = sep.empty.bin_index, sep.empty.start
    else:
        target, start = sep.framed.used_bins, ZERO
    moved = [Placement(p.item_id, target, p.x, p.y, p.z + start, p.orient) for p in framed_strip.placements]
    return Packing(sep.framed.placements + tuple(moved), "bins")


# --- Pipeline ---

def _place_large_with_plates(large, plates, k, mu, params: AbsParams) -> Tuple[Packing, List[Item]]:
    if len(large) > params.large_item_cap:
        raise PreconditionError(f"{len(large)} large items exceed the exact-search cap {params.large_item_cap}")
    best = None
    for candidate in enumerate_slot_packings(large, k, mu):
        try:
            assignment = gap_assign(candidate.slots, plates)
        except PreconditionError as exc:
            logger.debug("slot candidate skipped: %s", exc)
            continue
        if best is None or assignment.packed_volume > best[1].packed_volume:
            best = (candidate, assignment)
        if not assignment.unassigned:
            break
    if best is None:
        raise PreconditionError(f"large items do not fit {k} bins")
    candidate, assignment = best
    placements = list(candidate.placements)
    for item_id, (j, x, y, z) in assignment.positions.items():
        placements.append(Placement(item_id, candidate.slots[j].bin_index, x, y, z))
    return Packing(tuple(placements), "bins"), assignment.unassigned


def _case_separate(items, cls: AbsClassification, k, params: AbsParams, backend):
    # Work in the frame where the lightest thin class is thin in height.
    axis = min(("z", "x", "y"), key=lambda a: (total_volume(cls.thin(a)), ("z", "x", "y").index(a)))
    world = [frame_item(i, axis) for i in items]
    wcls = classify_absolute(world, cls.mu)
    table = item_table(world)
    mu, delta = cls.mu, params.delta

    sep_w = pack_separate(wcls.I_w + wcls.I_rem_w, "x", k, backend, mu)
    sep_d = pack_separate(wcls.I_d + wcls.I_rem_d, "y", k, backend, mu)
    grouped = pack_Ihs_grouped(wcls.I_h_s, k, delta, mu)
    large, unassigned = _place_large_with_plates(wcls.L, wcls.I_h_ell, k, mu, params)
    augmented = repack_leftovers(unassigned, wcls.I_rem_h, grouped, table, delta, mu, k)
    packing = merge_bin_packings([large, augmented, sep_w.packing, sep_d.packing])
    regions = [r for r in (sep_w.empty, sep_d.empty) if r is not None]
    return frame_packing(packing, axis), axis, regions


def _case_large_thin(items, cls: AbsClassification, k, params: AbsParams, backend):
    mu = cls.mu
    seps = [
        pack_separate(cls.I_h + cls.I_rem_h, "z", k, backend, mu),
        pack_separate(cls.I_w + cls.I_rem_w, "x", k, backend, mu),
        pack_separate(cls.I_d + cls.I_rem_d, "y", k, backend, mu),
    ]
    thin = pack_large_thin(cls.L, params.epsilon, params.delta, params.K)
    parts = [frame_packing(_absorb_strip(sep, thin.strips[sep.axis], items), sep.axis) for sep in seps]
    regions = [sep.empty for sep in seps if sep.empty is not None]
    return merge_bin_packings(parts), None, regions


def _try_guess(items: List[Item], k: int, params: AbsParams, backend):
    mu = compute_mu(items, params.delta, k)
    cls = classify_absolute(items, mu)
    if total_volume(cls.L) <= 64 * params.delta * params.K:
        case = CASE_LARGE_THIN
        packing, axis, regions = _case_large_thin(items, cls, k, params, backend)
    else:
        if (k - 64 * params.delta * params.K) / 3 > (Fraction(1, 3) - 21 * params.delta) * k:
            logger.info("guess k=%d: plate volume bound does not follow from the guess", k)
        case = CASE_SEPARATE
        packing, axis, regions = _case_separate(items, cls, k, params, backend)
    return packing, case, mu, axis, regions


def solve_absolute_bp(items: Sequence[Item], params: Optional[AbsParams] = None, backend=None) -> Tuple[Packing, AbsoluteReport]:
    """Bin packing with a certified bound for the accepted guess of OPT."""
    params = params or AbsParams.default()
    settings = get_settings()
    backend = backend or get_backend(params.backend, settings.external_backend)
    items = list(items)
    table = item_table(items)
    volume = total_volume(items)
    rejected: Dict[int, str] = {}

    if not items:
        return Packing((), "bins"), AbsoluteReport(backend.name, CASE_SEPARATE, 0, params.delta, k_accepted=0, bin_bound=0)

    for k in range(max(1, math.ceil(volume)), params.K + 1):
        try:
            packing, case, mu, axis, regions = _try_guess(items, k, params, backend)
        except PackingError as exc:
            rejected[k] = str(exc)
            logger.debug("guess k=%d rejected: %s", k, exc)
            continue
        packing = merge_bin_packings([packing])
        bound = bin_bound(k, backend)
        if not verify_packing(packing, table).complete:
            rejected[k] = "pipeline output failed verification"
            logger.error("guess k=%d produced an infeasible packing", k)
            continue
        if packing.used_bins > bound:
            rejected[k] = f"{packing.used_bins} bins exceed bound {bound}"
            continue
        fills = bin_fill_heights(packing, table)
        report = AbsoluteReport(
            backend.name, case, packing.used_bins, params.delta,
            k_accepted=k, bin_bound=bound, mu=mu, axis=axis,
            last_bin_fill=fills.get(packing.used_bins - 1, ZERO),
            empty_regions=regions, rejected=rejected,
        )
        logger.info("absolute BP: k=%d accepted (%s), %d bins", k, case, packing.used_bins)
        return packing, report

    if volume > params.K:
        rejected[0] = f"volume {volume} exceeds K={params.K}"
    packing = volume_bin_pack(items)
    fills = bin_fill_heights(packing, table)
    logger.info("absolute BP: no guess accepted, volume fallback with %d bins", packing.used_bins)
    return packing, AbsoluteReport(
        backend.name, CASE_FALLBACK, packing.used_bins, params.delta,
        bin_bound=8 * math.ceil(volume) + 18,
        last_bin_fill=fills.get(packing.used_bins - 1, ZERO), rejected=rejected,
    )


# --- Strip packing ---

@dataclass
class StripReport:
    backend: str
    height: Fraction
    guess: Optional[Fraction]
    bins: int
    height_bound: Optional[Fraction]
    guesses_tried: int = 0
    fallback: bool = False

    def to_dict(self) -> dict:
        return {
            k: format_rational(v) if isinstance(v, Fraction) else v
            for k, v in asdict(self).items()
        }


def _stack_bins(packing: Packing, items: ItemTable, scale: Fraction) -> Tuple[Packing, Fraction]:
    """Stack unit bins along z, the least-filled bin on top, then unscale heights."""
    fills = bin_fill_heights(packing, items)
    order = sorted(fills, key=lambda b: (b == min(fills, key=lambda c: (fills[c], c)), b))
    position = {b: n for n, b in enumerate(order)}
    placements = [
        Placement(p.item_id, 0, p.x, p.y, (position[p.bin_index] + p.z) * scale, p.orient)
        for p in packing.placements
    ]
    height = ((len(order) - 1) + fills[order[-1]]) * scale if order else ZERO
    return Packing(tuple(placements), "strip"), height


def solve_absolute_sp(items: Sequence[Item], params: Optional[AbsParams] = None, backend=None) -> Tuple[Packing, StripReport]:
    """Strip packing by guessing the optimal height and packing scaled bins."""
    params = params or AbsParams.default()
    settings = get_settings()
    backend = backend or get_backend(params.backend, settings.external_backend)
    items = list(items)
    if not items:
        return Packing((), "strip"), StripReport(backend.name, ZERO, None, 0, ZERO)
    table = item_table(items)
    h_max = max_extent(items, "z")
    single = AbsParams(1, params.lam, min(params.delta, params.lam**3), params.epsilon, params.backend,
                       params.large_item_cap)

    best: Optional[Tuple[Packing, Fraction, Fraction, int]] = None
    tried = 0
    guess = h_max
    for _ in range(settings.guess_exponent_cap + 1):
        if guess > len(items) * h_max:
            break
        tried += 1
        scaled = [i.with_dims(h=i.h / guess) for i in items]
        if total_volume(scaled) <= 1:
            packing, report = solve_absolute_bp(scaled, single, backend)
            identity = all(p.orient == IDENTITY for p in packing.placements)
            if report.k_accepted == 1 and identity:
                strip, height = _stack_bins(packing, item_table(scaled), guess)
                if best is None or height < best[1]:
                    best = (strip, height, guess, packing.used_bins)
        guess *= 1 + params.epsilon

    if best is None:
        strip = licheng_strip(items, "general")
        height = strip_height(strip, table)
        logger.info("absolute SP: no height guess accepted, layer strip of height %s", height)
        return strip, StripReport(backend.name, height, None, 0, None, tried, fallback=True)

    strip, height, guess, bins = best
    if not verify_packing(strip, table).complete:
        raise ContractViolation("stacked strip failed verification")
    bound = bin_bound(1, backend) * guess
    logger.info("absolute SP: height %s from guess %s (%d bins)", height, guess, bins)
    return strip, StripReport(backend.name, height, guess, bins, bound, tried)
