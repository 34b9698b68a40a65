import itertools
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import Bounds, LinearConstraint, milp

from conftest import cube, fr
from cuboidpack.errors import PreconditionError
from cuboidpack.gap import gap_assign, solve_gap
from cuboidpack.geometry import Item, Packing, Placement, item_table, placement_box, verify_packing
from cuboidpack.slots import Slot, base_position, enumerate_slot_packings, slots_for


def brute_force(capacities, sizes, profits):
    m = len(capacities)
    best = Fraction(0)
    for choice in itertools.product(range(m + 1), repeat=len(profits)):
        load = [Fraction(0)] * m
        ok = True
        for i, j in enumerate(choice):
            if j == m:
                continue
            if sizes[i][j] is None:
                ok = False
                break
            load[j] += sizes[i][j]
        if ok and all(load[j] <= capacities[j] for j in range(m)):
            best = max(best, sum((profits[i] for i, j in enumerate(choice) if j < m), Fraction(0)))
    return best


def random_gap(rng, n, m):
    capacities = [Fraction(int(v), 10) for v in rng.integers(3, 11, size=m)]
    sizes = [
        [None if rng.random() < 0.2 else Fraction(int(v), 10) for v in rng.integers(1, 8, size=m)]
        for _ in range(n)
    ]
    profits = [Fraction(int(v), 7) for v in rng.integers(1, 15, size=n)]
    return capacities, sizes, profits


def test_single_knapsack_prefers_the_valuable_item():
    solution = solve_gap([fr(1)], [[fr("0.5")], [fr("0.6")], [fr("0.5")]], [fr(1), fr(3), fr(1)])
    assert solution.profit == 3
    assert solution.assignment == {1: 0}
    assert solution.exact


def test_size_table_shape_is_checked():
    with pytest.raises(PreconditionError):
        solve_gap([fr(1)], [[fr(1), fr(1)]], [fr(1)])


def test_gap_matches_exhaustive_search():
    rng = np.random.default_rng(8)
    for _ in range(60):
        n, m = int(rng.integers(1, 8)), int(rng.integers(1, 4))
        capacities, sizes, profits = random_gap(rng, n, m)
        solution = solve_gap(capacities, sizes, profits)
        assert solution.profit == brute_force(capacities, sizes, profits)
        load = [Fraction(0)] * m
        for i, j in solution.assignment.items():
            load[j] += sizes[i][j]
        assert all(load[j] <= capacities[j] for j in range(m))


def test_gap_matches_milp_reference():
    rng = np.random.default_rng(21)
    for _ in range(200):
        n, m = int(rng.integers(1, 13)), int(rng.integers(1, 4))
        capacities, sizes, profits = random_gap(rng, n, m)
        c = np.array([-float(profits[i]) for i in range(n) for _ in range(m)])
        upper = np.array([0.0 if sizes[i][j] is None else 1.0 for i in range(n) for j in range(m)])
        one_each = np.zeros((n, n * m))
        for i in range(n):
            one_each[i, i * m:(i + 1) * m] = 1
        weights = np.zeros((m, n * m))
        for i in range(n):
            for j in range(m):
                weights[j, i * m + j] = 0.0 if sizes[i][j] is None else float(sizes[i][j])
        result = milp(
            c,
            constraints=[LinearConstraint(one_each, 0, 1), LinearConstraint(weights, 0, [float(v) for v in capacities])],
            integrality=np.ones(n * m),
            bounds=Bounds(np.zeros(n * m), upper),
        )
        solution = solve_gap(capacities, sizes, profits)
        assert solution.exact
        assert abs(float(solution.profit) + result.fun) < 1e-6


def test_gap_assign_stacks_items_in_a_slot():
    slot = Slot(0, fr(0), fr("1/2"))
    items = [Item("a", "0.6", "0.6", "0.3"), Item("b", "0.6", "0.6", "0.3"), Item("c", "0.6", "0.6", "0.2")]
    result = gap_assign([slot], items)
    assert result.packed_volume == fr("0.5") * fr("0.36")
    assert len(result.unassigned) == 1
    zs = sorted(z for _, _, _, z in result.positions.values())
    assert zs[0] == 0 and zs[1] in (fr("0.2"), fr("0.3"))


def test_gap_assign_slot_cap():
    slots = [Slot(0, fr(0), fr(1))] * 3
    with pytest.raises(PreconditionError):
        gap_assign(slots, [], slot_cap=2)


def test_slots_split_at_large_item_faces():
    items = item_table([Item("L", "0.5", "0.5", "0.5")])
    slots = slots_for([Placement("L", 0, 0, 0, 0)], items, 1)
    assert [(s.lo, s.hi) for s in slots] == [(0, fr("0.5")), (fr("0.5"), 1)]
    assert slots[0].footprints == ((0, 0, fr("0.5"), fr("0.5")),)
    assert slots[1].footprints == ()
    assert slots[0].capacity == fr("0.5")


def test_base_position_avoids_footprints():
    slot = Slot(0, fr(0), fr("0.5"), ((fr(0), fr(0), fr("0.5"), fr("0.5")),))
    assert base_position(Item("p", "0.6", "0.6", "0.1"), slot) is None
    assert base_position(Item("p", "0.5", "0.6", "0.1"), slot) == (fr("0.5"), fr(0))


def test_no_large_items_gives_full_slots():
    candidates = list(enumerate_slot_packings([], 2, fr("1/4")))
    assert len(candidates) == 1
    assert [(s.bin_index, s.lo, s.hi) for s in candidates[0].slots] == [(0, 0, 1), (1, 0, 1)]


def test_slot_candidates_are_feasible():
    large = [cube("a", "0.6"), cube("b", "0.6")]
    table = item_table(large)
    candidates = list(enumerate_slot_packings(large, 2, fr("1/2"), budget=5))
    assert 0 < len(candidates) <= 5
    for candidate in candidates:
        assert verify_packing(Packing(candidate.placements), table).complete
        for slot in candidate.slots:
            for p in candidate.placements:
                box = placement_box(p, table)
                if p.bin_index == slot.bin_index:
                    inside = box[2] <= slot.lo and box[5] >= slot.hi
                    outside = box[5] <= slot.lo or box[2] >= slot.hi
                    assert inside or outside


def test_too_many_large_items():
    large = [cube(f"c{k}", "0.6") for k in range(3)]
    with pytest.raises(PreconditionError):
        list(enumerate_slot_packings(large, 1, fr(1)))
