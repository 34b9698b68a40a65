"""
oracle.py
---------
Exact brute-force packing for tiny instances: one-bin decisions and optimal
bin counts, used as ground truth for ratio checks.

The one-bin decision picks, for every pair of items, an axis and an order
along which the pair is separated. Coordinates are longest paths in the
resulting per-axis precedence graphs, so a choice whose longest chains stay
inside the bin is a packing, and every packing induces such a choice.

Enumerating distinct packings (for slots and the grid cross-check) restricts
every coordinate to subset sums of the other items' extents along that axis.
Pushing each item toward -x/-y/-z until it is blocked turns any feasible
packing into one with such coordinates, so that enumeration is complete too.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

import networkx as nx

from cuboidpack.config import get_settings
from cuboidpack.errors import OracleCapExceeded, SearchBudgetExceeded
from cuboidpack.geometry import (
    IDENTITY,
    ORIENTATIONS,
    UNIT_BIN,
    ZERO,
    BinSpec,
    Item,
    Packing,
    Placement,
    oriented_extents,
    total_volume,
)

logger = logging.getLogger(__name__)

Box = Tuple[Fraction, Fraction, Fraction, Fraction, Fraction, Fraction]


@dataclass(frozen=True)
class OracleResult:
    fits: bool
    witness: Optional[Packing] = None

    def __bool__(self):
        return self.fits


@dataclass(frozen=True)
class OptResult:
    opt: int
    witness: Packing


def orientations_for(item: Item, allow_rotations: bool) -> List[str]:
    if not allow_rotations:
        return [IDENTITY]
    seen, out = set(), []
    for orient in ORIENTATIONS:
        ext = oriented_extents(item, orient)
        if ext not in seen:
            seen.add(ext)
            out.append(orient)
    return out


def _fits_bin(ext, bin_spec: BinSpec) -> bool:
    return ext[0] <= bin_spec.W and ext[1] <= bin_spec.D and ext[2] <= bin_spec.H


def _subset_sums(options: Sequence[Sequence[Fraction]], limit: Fraction) -> List[Fraction]:
    sums = {ZERO}
    for choices in options:
        sums |= {s + v for s in sums for v in choices if s + v <= limit}
    return sorted(sums)


def pair_conflicts(a: Item, b: Item, bin_spec: BinSpec = UNIT_BIN, allow_rotations: bool = False) -> bool:
    """True when ``a`` and ``b`` cannot share one bin in any orientation."""
    for oa in orientations_for(a, allow_rotations):
        ea = oriented_extents(a, oa)
        if not _fits_bin(ea, bin_spec):
            continue
        for ob in orientations_for(b, allow_rotations):
            eb = oriented_extents(b, ob)
            if not _fits_bin(eb, bin_spec):
                continue
            limits = (bin_spec.W, bin_spec.D, bin_spec.H)
            if any(ea[i] + eb[i] <= limits[i] for i in range(3)):
                return False
    return True


def conflict_graph(items: Sequence[Item], bin_spec: BinSpec = UNIT_BIN, allow_rotations: bool = False) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(item.id for item in items)
    for i, a in enumerate(items):
        for b in items[i + 1:]:
            if pair_conflicts(a, b, bin_spec, allow_rotations):
                graph.add_edge(a.id, b.id)
    return graph


def conflict_lower_bound(items: Sequence[Item], bin_spec: BinSpec = UNIT_BIN, allow_rotations: bool = False) -> int:
    """Size of a maximum clique of pairwise-incompatible items."""
    if not items:
        return 0
    graph = conflict_graph(items, bin_spec, allow_rotations)
    return max(len(clique) for clique in nx.find_cliques(graph))


def volume_lower_bound(items: Sequence[Item], bin_spec: BinSpec = UNIT_BIN) -> int:
    return math.ceil(total_volume(items) / bin_spec.volume)


def _stacking_infeasible(items: Sequence[Item], bin_spec: BinSpec) -> bool:
    # Items exceeding half the bin on two axes pairwise overlap there and must
    # be separated along the third.
    limits = (bin_spec.W, bin_spec.D, bin_spec.H)
    for free_axis in range(3):
        others = [i for i in range(3) if i != free_axis]
        column = [
            item for item in items
            if all(2 * item.dims[i] > limits[i] for i in others)
        ]
        if sum((item.dims[free_axis] for item in column), ZERO) > limits[free_axis]:
            return True
    return False


# --- One-bin search ---

CoordinateSource = Callable[[int, Tuple[Fraction, Fraction, Fraction]], Tuple[List[Fraction], ...]]


def _canonical_coordinates(items: Sequence[Item], allow_rotations: bool, bin_spec: BinSpec) -> CoordinateSource:
    limits = (bin_spec.W, bin_spec.D, bin_spec.H)
    options = []
    for item in items:
        if allow_rotations:
            options.append(sorted(set(item.dims)))
        else:
            options.append(None)
    cache: Dict[Tuple[int, int], List[Fraction]] = {}

    def sums_for(index: int, axis: int) -> List[Fraction]:
        key = (index, axis)
        if key not in cache:
            others = [
                options[j] if options[j] is not None else [items[j].dims[axis]]
                for j in range(len(items)) if j != index
            ]
            cache[key] = _subset_sums(others, limits[axis])
        return cache[key]

    def source(index, ext):
        return tuple(
            [c for c in sums_for(index, axis) if c + ext[axis] <= limits[axis]]
            for axis in range(3)
        )

    return source


def _grid_coordinates(resolution: int, bin_spec: BinSpec) -> CoordinateSource:
    limits = (bin_spec.W, bin_spec.D, bin_spec.H)
    step = Fraction(1, resolution)

    def source(index, ext):
        out = []
        for axis in range(3):
            count = math.floor((limits[axis] - ext[axis]) / step)
            out.append([k * step for k in range(count + 1)])
        return tuple(out)

    return source


def _overlaps(box: Box, placed: Sequence[Box]) -> bool:
    for other in placed:
        if (box[0] < other[3] and other[0] < box[3]
                and box[1] < other[4] and other[1] < box[4]
                and box[2] < other[5] and other[2] < box[5]):
            return True
    return False


def iter_bin_packings(
    items: Sequence[Item],
    bin_spec: BinSpec = UNIT_BIN,
    allow_rotations: bool = False,
    node_budget: Optional[int] = None,
    coordinates: Optional[CoordinateSource] = None,
) -> Iterator[Tuple[Placement, ...]]:
    """Yield distinct canonical one-bin packings of ``items`` (bin index 0)."""
    budget = node_budget or get_settings().oracle_node_budget
    order = sorted(items, key=lambda i: (-i.volume, i.dims, i.id))
    source = coordinates or _canonical_coordinates(order, allow_rotations, bin_spec)
    orients = [
        [o for o in orientations_for(item, allow_rotations) if _fits_bin(oriented_extents(item, o), bin_spec)]
        for item in order
    ]
    if any(not o for o in orients):
        return
    boxes: List[Box] = []
    chosen: List[Tuple[Fraction, Fraction, Fraction, str]] = []
    nodes = 0

    def search(i: int):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise SearchBudgetExceeded(f"one-bin search exceeded {budget} nodes")
        if i == len(order):
            yield tuple(
                Placement(order[k].id, 0, x, y, z, o) for k, (x, y, z, o) in enumerate(chosen)
            )
            return
        item = order[i]
        same_as_prev = i > 0 and order[i - 1].dims == item.dims
        floor_key = chosen[-1] if same_as_prev else None
        for orient in orients[i]:
            ext = oriented_extents(item, orient)
            xs, ys, zs = source(i, ext)
            for z in zs:
                for y in ys:
                    for x in xs:
                        key = (z, y, x, orient)
                        if floor_key is not None and key <= (floor_key[2], floor_key[1], floor_key[0], floor_key[3]):
                            continue
                        nodes += 1
                        box = (x, y, z, x + ext[0], y + ext[1], z + ext[2])
                        if _overlaps(box, boxes):
                            continue
                        boxes.append(box)
                        chosen.append((x, y, z, orient))
                        yield from search(i + 1)
                        boxes.pop()
                        chosen.pop()

    yield from search(0)


class _PairSeparation:
    """Depth-first choice of orientations and pairwise separations."""

    def __init__(self, items: Sequence[Item], bin_spec: BinSpec, allow_rotations: bool, budget: int):
        self.items = sorted(items, key=lambda i: (-i.volume, i.dims, i.id))
        self.limits = (bin_spec.W, bin_spec.D, bin_spec.H)
        n = len(self.items)
        self.orients = [
            [o for o in orientations_for(item, allow_rotations) if _fits_bin(oriented_extents(item, o), bin_spec)]
            for item in self.items
        ]
        if allow_rotations and bin_spec.W == bin_spec.D == bin_spec.H:
            # Any packing of a cube bin can be turned so the first item is unrotated.
            self.orients[0] = self.orients[0][:1]
        self.ext: List[Tuple[Fraction, Fraction, Fraction]] = [(ZERO, ZERO, ZERO)] * n
        self.chosen: List[str] = [IDENTITY] * n
        self.dist = [[ZERO] * n for _ in range(3)]
        self.succ: List[List[List[int]]] = [[[] for _ in range(n)] for _ in range(3)]
        self.edges = [0, 0, 0]
        self.budget = budget
        self.nodes = 0

    def _tick(self):
        self.nodes += 1
        if self.nodes > self.budget:
            raise SearchBudgetExceeded(f"one-bin search exceeded {self.budget} nodes")

    def _raise(self, axis: int, start: int, value: Fraction) -> bool:
        dist, succ, limit = self.dist[axis], self.succ[axis], self.limits[axis]
        stack = [(start, value)]
        while stack:
            v, value = stack.pop()
            if value <= dist[v]:
                continue
            top = value + self.ext[v][axis]
            # A cycle keeps growing until it leaves the bin.
            if top > limit:
                return False
            dist[v] = value
            stack.extend((w, top) for w in succ[v])
        return True

    def _place(self, k: int) -> bool:
        if k == len(self.items):
            return True
        for orient in self.orients[k]:
            self._tick()
            self.ext[k] = oriented_extents(self.items[k], orient)
            self.chosen[k] = orient
            if self._separate(k, 0):
                return True
        return False

    def _separate(self, k: int, j: int) -> bool:
        if j == k:
            return self._place(k + 1)
        for axis in range(3):
            if self.ext[j][axis] + self.ext[k][axis] > self.limits[axis]:
                continue
            # Mirroring an axis reverses its graph: the first pair on it keeps index order.
            orders = ((j, k), (k, j)) if self.edges[axis] else ((j, k),)
            for before, after in orders:
                self._tick()
                saved = list(self.dist[axis])
                self.succ[axis][before].append(after)
                self.edges[axis] += 1
                if self._raise(axis, after, saved[before] + self.ext[before][axis]) and self._separate(k, j + 1):
                    return True
                self.edges[axis] -= 1
                self.succ[axis][before].pop()
                self.dist[axis] = saved
        return False

    def solve(self) -> Optional[Tuple[Placement, ...]]:
        if any(not o for o in self.orients) or not self._place(0):
            return None
        logger.debug("pair separation: %d items decided in %d nodes", len(self.items), self.nodes)
        return tuple(
            Placement(item.id, 0, self.dist[0][k], self.dist[1][k], self.dist[2][k], self.chosen[k])
            for k, item in enumerate(self.items)
        )


def _check_cap(items: Sequence[Item], cap: Optional[int]) -> None:
    cap = get_settings().oracle_cap if cap is None else cap
    if len(items) > cap:
        raise OracleCapExceeded(f"{len(items)} items exceed the oracle cap of {cap}")


def _quick_reject(items: Sequence[Item], bin_spec: BinSpec, allow_rotations: bool) -> bool:
    if total_volume(items) > bin_spec.volume:
        return True
    for item in items:
        if not any(_fits_bin(oriented_extents(item, o), bin_spec) for o in orientations_for(item, allow_rotations)):
            return True
    for i, a in enumerate(items):
        for b in items[i + 1:]:
            if pair_conflicts(a, b, bin_spec, allow_rotations):
                return True
    return not allow_rotations and _stacking_infeasible(items, bin_spec)


def oracle_fits_one_bin(
    items: Sequence[Item],
    bin_spec: BinSpec = UNIT_BIN,
    allow_rotations: bool = False,
    cap: Optional[int] = None,
    node_budget: Optional[int] = None,
) -> OracleResult:
    """Decide exactly whether ``items`` fit together in one bin."""
    items = list(items)
    _check_cap(items, cap)
    if not items:
        return OracleResult(True, Packing((), "bins", bin_spec))
    if _quick_reject(items, bin_spec, allow_rotations):
        return OracleResult(False)
    budget = node_budget or get_settings().oracle_node_budget
    placements = _PairSeparation(items, bin_spec, allow_rotations, budget).solve()
    if placements is None:
        return OracleResult(False)
    return OracleResult(True, Packing(placements, "bins", bin_spec))


def grid_fits_one_bin(items: Sequence[Item], resolution: int = 12, bin_spec: BinSpec = UNIT_BIN,
                      allow_rotations: bool = False, node_budget: Optional[int] = None) -> bool:
    """Same decision with coordinates on the 1/resolution grid (cross-check)."""
    items = list(items)
    if not items:
        return True
    if total_volume(items) > bin_spec.volume:
        return False
    source = _grid_coordinates(resolution, bin_spec)
    for _ in iter_bin_packings(items, bin_spec, allow_rotations, node_budget, coordinates=source):
        return True
    return False


# --- Partitions ---

class _FitCache:
    """One-bin decisions per item subset, shared across partition searches.

    A subset of a fitting group fits; a superset of a failing group fails.
    """

    def __init__(self, by_id: Dict[str, Item], bin_spec, allow_rotations, node_budget):
        self.by_id = by_id
        self.bin_spec = bin_spec
        self.allow_rotations = allow_rotations
        self.node_budget = node_budget
        self.cache: Dict[FrozenSet[str], OracleResult] = {}
        self.searched = 0

    def _infer(self, ids: FrozenSet[str]) -> Optional[OracleResult]:
        for known, result in self.cache.items():
            if not result.fits and known <= ids:
                return OracleResult(False)
            if result.fits and ids <= known:
                placements = tuple(p for p in result.witness.placements if p.item_id in ids)
                return OracleResult(True, Packing(placements, "bins", self.bin_spec))
        return None

    def __call__(self, ids: FrozenSet[str]) -> OracleResult:
        if ids not in self.cache:
            result = self._infer(ids)
            if result is None:
                self.searched += 1
                group = [self.by_id[i] for i in sorted(ids)]
                result = oracle_fits_one_bin(
                    group, self.bin_spec, self.allow_rotations, cap=len(group), node_budget=self.node_budget
                )
            self.cache[ids] = result
        return self.cache[ids]


def iter_feasible_partitions(
    items: Sequence[Item],
    bins: int,
    bin_spec: BinSpec = UNIT_BIN,
    allow_rotations: bool = False,
    node_budget: Optional[int] = None,
    fits: Optional[_FitCache] = None,
) -> Iterator[List[FrozenSet[str]]]:
    """Partitions of ``items`` into at most ``bins`` groups that each fit one bin."""
    order = sorted(items, key=lambda i: (-i.volume, i.id))
    fits = fits or _FitCache({i.id: i for i in items}, bin_spec, allow_rotations, node_budget)
    groups: List[FrozenSet[str]] = []

    def search(k: int):
        if k == len(order):
            yield list(groups)
            return
        item_id = order[k].id
        for g in range(len(groups)):
            candidate = groups[g] | {item_id}
            if fits(candidate):
                previous = groups[g]
                groups[g] = candidate
                yield from search(k + 1)
                groups[g] = previous
        if len(groups) < bins:
            # Opening a fresh bin once is enough: empty bins are interchangeable.
            groups.append(frozenset({item_id}))
            if fits(groups[-1]):
                yield from search(k + 1)
            groups.pop()

    yield from search(0)
    logger.debug("partition search: %d groups known, %d searched", len(fits.cache), fits.searched)


def partition_witness(partition: Sequence[FrozenSet[str]], items: Sequence[Item], bin_spec: BinSpec = UNIT_BIN,
                      allow_rotations: bool = False, node_budget: Optional[int] = None,
                      fits: Optional[_FitCache] = None) -> Packing:
    fits = fits or _FitCache({i.id: i for i in items}, bin_spec, allow_rotations, node_budget)
    placements = []
    for index, group in enumerate(partition):
        result = fits(frozenset(group))
        placements += [p.moved(bin_index=index) for p in result.witness.placements]
    return Packing(tuple(placements), "bins", bin_spec)


def oracle_opt_bins(
    items: Sequence[Item],
    bin_spec: BinSpec = UNIT_BIN,
    max_bins: Optional[int] = None,
    allow_rotations: bool = False,
    cap: Optional[int] = None,
    node_budget: Optional[int] = None,
) -> Optional[OptResult]:
    """Minimum number of bins, with a witness; None when it exceeds ``max_bins``."""
    items = list(items)
    _check_cap(items, cap)
    if not items:
        return OptResult(0, Packing((), "bins", bin_spec))
    max_bins = len(items) if max_bins is None else max_bins
    lower = max(volume_lower_bound(items, bin_spec), conflict_lower_bound(items, bin_spec, allow_rotations))
    fits = _FitCache({i.id: i for i in items}, bin_spec, allow_rotations, node_budget)
    for b in range(lower, max_bins + 1):
        for partition in iter_feasible_partitions(items, b, bin_spec, allow_rotations, node_budget, fits):
            witness = partition_witness(partition, items, bin_spec, allow_rotations, node_budget, fits)
            return OptResult(len(partition), witness)
    return None
