import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import assert_feasible, fr
from cuboidpack.cutting import (
    EPSILON_LAYERS,
    NAIVE_DOUBLE,
    align_stack_tall,
    alignment_gap_bound,
    check_tall_not_sliced,
    crossing_plane,
    cut_strip_to_bins,
    cut_strips_epsilon_layers,
    naive_bin_bound,
)
from cuboidpack.errors import ContractViolation, PreconditionError
from cuboidpack.generators import generate_instance
from cuboidpack.geometry import Item, Packing, Placement, item_table, strip_height
from cuboidpack.harmonic import harmonic_number, harmonic_round
from cuboidpack.layers import licheng_strip


def column(items):
    """Stack items on top of each other at the origin."""
    z, placements = Fraction(0), []
    for item in items:
        placements.append(Placement(item.id, 0, 0, 0, z))
        z += item.h
    return Packing(tuple(placements), "strip")


def test_crossing_plane():
    assert crossing_plane(fr("0.5"), fr("0.75")) == 1
    assert crossing_plane(fr("0.5"), fr("0.5")) is None
    assert crossing_plane(fr(1), fr(1)) is None


def test_naive_cut_of_simple_column():
    items = [Item(k, 1, 1, "0.4") for k in "abcd"]
    result = cut_strip_to_bins(column(items), item_table(items), NAIVE_DOUBLE)
    assert_feasible(result.bins, items)
    # Slab [0,1): a, b; c straddles z=1; d in slab [1,2).
    assert result.sliced_item_sets == {1: ["c"]}
    assert result.bins.used_bins == 3
    assert result.extra_bins_used == 1


def test_naive_cut_bound_on_layer_strips():
    for seed in range(30):
        items = generate_instance("uniform", 30, seed)
        strip = licheng_strip(items)
        table = item_table(items)
        result = cut_strip_to_bins(strip, table)
        assert_feasible(result.bins, items)
        assert result.bins.used_bins <= naive_bin_bound(strip, table)
        assert naive_bin_bound(strip, table) == 2 * math.ceil(strip_height(strip, table))


def test_cut_requires_z_strip():
    with pytest.raises(PreconditionError):
        cut_strip_to_bins(Packing((), "bins"), {})


def test_epsilon_layers_pack_sliced_layers_together():
    epsilon = Fraction(1, 4)
    items = [Item("a", 1, 1, "0.875"), Item("b", 1, 1, "0.25"), Item("c", 1, 1, "0.75"), Item("d", 1, 1, "0.25")]
    # b straddles z=1, d straddles z=2.
    strip = column(items)
    result = cut_strip_to_bins(strip, item_table(items), EPSILON_LAYERS, epsilon)
    assert_feasible(result.bins, items)
    assert result.sliced_item_sets == {1: ["b"], 2: ["d"]}
    assert result.extra_bins_used == 1
    assert result.bins.used_bins == 3


def test_epsilon_layers_refuse_tall_sliced_item():
    items = [Item("a", 1, 1, "0.5"), Item("b", 1, 1, "0.75")]
    with pytest.raises(ContractViolation):
        cut_strip_to_bins(column(items), item_table(items), EPSILON_LAYERS, Fraction(1, 4))


def test_several_strips_share_extra_bins():
    epsilon = Fraction(1, 4)
    first = [Item("a", 1, 1, "0.875"), Item("b", 1, 1, "0.25")]
    second = [Item("c", 1, 1, "0.875"), Item("d", 1, 1, "0.25")]
    items = first + second
    result = cut_strips_epsilon_layers([column(first), column(second)], item_table(items), epsilon)
    assert_feasible(result.bins, items)
    assert result.extra_bins_used == 1
    assert result.bins.used_bins == 3


def test_align_stack_tall_example():
    items = [Item("a", 1, 1, "0.3"), Item("b", 1, 1, Fraction(1, 4)), Item("c", 1, 1, Fraction(1, 5))]
    stack = align_stack_tall(items, Fraction(1, 5))
    bottoms = {item_id: z for item_id, z, _ in stack.placements}
    assert bottoms["b"] == fr("0.5")
    assert bottoms["c"] == fr("0.8")
    assert stack.gap_total == fr("0.25")


def test_align_stack_requires_sorted_heights():
    with pytest.raises(ContractViolation):
        align_stack_tall([Item("a", 1, 1, "0.1"), Item("b", 1, 1, "0.2")], Fraction(1, 4))


@pytest.mark.parametrize("epsilon", [Fraction(1, 4), Fraction(1, 6), Fraction(1, 10)])
def test_alignment_gap_bound_holds(epsilon):
    rng = np.random.default_rng(int(1 / epsilon))
    k = int(1 / epsilon)
    bound = alignment_gap_bound(epsilon)
    assert bound == harmonic_number(k) - Fraction(3, 2)
    for _ in range(1000):
        heights = [harmonic_round(Fraction(int(v), 120), k) for v in rng.integers(1, 121, size=12)]
        items = [Item(f"s{n}", 1, 1, h) for n, h in enumerate(sorted(heights, reverse=True))]
        assert align_stack_tall(items, epsilon).gap_total <= bound


def test_tall_not_sliced_check():
    epsilon = Fraction(1, 4)
    items = [Item("a", 1, 1, "0.5"), Item("b", 1, 1, "0.75")]
    check = check_tall_not_sliced(column(items), item_table(items), epsilon)
    assert not check
    assert check.witnesses == [("b", 1)]
    aligned = Packing((Placement("a", 0, 0, 0, 0), Placement("b", 0, 0, 0, 1)), "strip")
    assert check_tall_not_sliced(aligned, item_table(items), epsilon)
