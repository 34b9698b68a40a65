"""
gap.py
------
Generalized assignment at desk scale: a handful of knapsacks, items with a
per-knapsack size (or "does not fit") and a profit. Solved exactly by
depth-first branch and bound with a fractional-knapsack upper bound.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from cuboidpack.config import get_settings
from cuboidpack.errors import PreconditionError
from cuboidpack.geometry import ZERO, Item

logger = logging.getLogger(__name__)


@dataclass
class GapSolution:
    profit: Fraction
    assignment: Dict[int, int]  # item index -> knapsack index
    exact: bool = True


def _fractional_bound(candidates, capacity: Fraction) -> Fraction:
    bound = ZERO
    for ratio, size, profit in candidates:
        if capacity <= 0:
            break
        if size <= capacity:
            bound += profit
            capacity -= size
        else:
            bound += ratio * capacity
            capacity = ZERO
    return bound


def solve_gap(
    capacities: Sequence[Fraction],
    sizes: Sequence[Sequence[Optional[Fraction]]],
    profits: Sequence[Fraction],
    node_budget: Optional[int] = None,
) -> GapSolution:
    """Maximize total profit of items assigned to capacitated knapsacks.

    Args:
        capacities: knapsack capacities.
        sizes: ``sizes[i][j]`` is item i's size in knapsack j, None when it
            cannot go there.
        profits: item profits (non-negative).
        node_budget: branch-and-bound node cap; when hit, the best assignment
            found so far is returned with ``exact=False``.
    """
    budget = node_budget or get_settings().gap_node_budget
    n, m = len(profits), len(capacities)
    if len(sizes) != n or any(len(row) != m for row in sizes):
        raise PreconditionError("size table does not match items x knapsacks")

    usable = [
        i for i in range(n)
        if profits[i] > 0 and any(s is not None and s <= capacities[j] for j, s in enumerate(sizes[i]))
    ]
    order = sorted(usable, key=lambda i: (-profits[i], i))
    min_size = {
        i: min(s for j, s in enumerate(sizes[i]) if s is not None and s <= capacities[j]) for i in order
    }
    # Suffix candidate lists for the bound, each sorted by profit density.
    suffix: List[List[Tuple[Fraction, Fraction, Fraction]]] = [[] for _ in range(len(order) + 1)]
    for pos in range(len(order) - 1, -1, -1):
        i = order[pos]
        entry = (profits[i] / min_size[i], min_size[i], profits[i])
        suffix[pos] = sorted(suffix[pos + 1] + [entry], key=lambda e: -e[0])

    best_profit = ZERO
    best: Dict[int, int] = {}
    current: Dict[int, int] = {}
    remaining = list(capacities)
    nodes = 0
    exact = True

    # Greedy incumbent: first knapsack with room, in profit order.
    for i in order:
        for j in range(m):
            s = sizes[i][j]
            if s is not None and s <= remaining[j]:
                remaining[j] -= s
                best[i] = j
                best_profit += profits[i]
                break
    remaining = list(capacities)

    def search(pos: int, profit: Fraction):
        nonlocal best_profit, best, nodes, exact
        nodes += 1
        if nodes > budget:
            exact = False
            return
        if profit > best_profit:
            best_profit, best = profit, dict(current)
        if pos == len(order):
            return
        if profit + _fractional_bound(suffix[pos], sum(remaining, ZERO)) <= best_profit:
            return
        i = order[pos]
        tried = set()
        for j in range(m):
            s = sizes[i][j]
            if s is None or s > remaining[j]:
                continue
            # Knapsacks with identical residual state are interchangeable here.
            state = (remaining[j], tuple(sizes[k][j] for k in order[pos:]))
            if state in tried:
                continue
            tried.add(state)
            remaining[j] -= s
            current[i] = j
            search(pos + 1, profit + profits[i])
            del current[i]
            remaining[j] += s
        search(pos + 1, profit)

    search(0, ZERO)
    if not exact:
        logger.warning("GAP search stopped after %d nodes; returning best found", budget)
    return GapSolution(best_profit, best, exact)


# --- Slot assignment ---

@dataclass
class GapAssignment:
    positions: Dict[str, Tuple[int, Fraction, Fraction, Fraction]] = field(default_factory=dict)
    unassigned: List[Item] = field(default_factory=list)
    packed_volume: Fraction = ZERO
    exact: bool = True


def gap_assign(slots, items: Sequence[Item], slot_cap: Optional[int] = None,
               node_budget: Optional[int] = None) -> GapAssignment:
    """Assign plate-like items (w, d > 1/2) to slots maximizing packed volume.

    An item fits a slot when its base avoids every large-item footprint
    penetrating that slot; its size there is its height. Items assigned to a
    slot are stacked from the slot's bottom. Returns, per placed item, the
    slot index and its (x, y, z).
    """
    from cuboidpack.slots import base_position

    cap = get_settings().slot_cap if slot_cap is None else slot_cap
    if len(slots) > cap:
        raise PreconditionError(f"{len(slots)} slots exceed the configured cap of {cap}")
    items = list(items)
    if not slots or not items:
        return GapAssignment(unassigned=items)

    spots = [[base_position(item, slot) for slot in slots] for item in items]
    sizes = [[item.h if spot is not None else None for spot in row] for item, row in zip(items, spots)]
    solution = solve_gap([s.capacity for s in slots], sizes, [i.volume for i in items], node_budget)

    result = GapAssignment(exact=solution.exact)
    heights = [ZERO] * len(slots)
    for index, item in enumerate(items):
        j = solution.assignment.get(index)
        if j is None:
            result.unassigned.append(item)
            continue
        x, y = spots[index][j]
        result.positions[item.id] = (j, x, y, slots[j].lo + heights[j])
        heights[j] += item.h
        result.packed_volume += item.volume
    return result
