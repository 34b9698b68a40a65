from fractions import Fraction

import pytest

from conftest import assert_feasible, cube, fr, grid_items
from cuboidpack.geometry import IDENTITY, Item
from cuboidpack.oracle import oracle_opt_bins
from cuboidpack.rotation import orient_with_height, rotation_5approx


def test_flat_item_keeps_identity():
    item = Item("a", 1, "0.5", "0.01")
    turned, orient = orient_with_height(item, Fraction(1, 10))
    assert orient == IDENTITY
    assert turned.h == fr("0.01")


def test_thin_side_is_turned_down():
    item = Item("a", "0.01", "0.5", 1)
    turned, orient = orient_with_height(item, Fraction(1, 10))
    assert orient[2] == "x"
    assert turned.h == fr("0.01")
    assert sorted(turned.dims) == sorted(item.dims)


def test_nothing_thin_enough():
    item = cube("c", "0.5")
    assert orient_with_height(item, Fraction(1, 10)) == (item, IDENTITY)


def test_eight_half_cubes_share_one_bin():
    items = [cube(f"c{k}", "1/2") for k in range(8)]
    packing, report = rotation_5approx(items, cap=8)
    assert_feasible(packing, items)
    assert packing.used_bins == 1
    assert report.k_accepted == 1


def test_rotation_beats_fixed_orientation():
    items = [Item("t", "0.4", "0.4", 1), Item("f", 1, 1, "0.6")]
    packing, report = rotation_5approx(items)
    assert_feasible(packing, items)
    assert packing.used_bins == 1


def test_small_items_are_grouped():
    mu = Fraction(1, 12**4 * 3)
    items = [Item(f"s{k}", "0.5", "0.5", mu / 2) for k in range(10)]
    packing, report = rotation_5approx(items)
    assert_feasible(packing, items)
    assert report.groups == 1
    assert not report.shared_bin


@pytest.mark.parametrize("seed", range(6))
def test_at_most_five_times_optimal(seed):
    items = grid_items(4, seed)
    packing, report = rotation_5approx(items)
    assert_feasible(packing, items)
    opt = oracle_opt_bins(items, allow_rotations=True).opt
    if report.fallback:
        assert opt > 3
    else:
        assert report.k_accepted <= opt
        assert packing.used_bins <= 5 * opt


def test_empty_instance():
    packing, report = rotation_5approx([])
    assert packing.used_bins == 0
    assert report.bins == 0
