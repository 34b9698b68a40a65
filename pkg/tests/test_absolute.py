import math
from fractions import Fraction

import pytest

from conftest import assert_feasible, fr, grid_items
from cuboidpack.absolute import (
    CASE_FALLBACK,
    CASE_LARGE_THIN,
    AbsParams,
    bin_bound,
    classify_absolute,
    compute_mu,
    pack_Ihs_grouped,
    pack_large_thin,
    pack_separate,
    repack_leftovers,
    solve_absolute_bp,
    solve_absolute_sp,
)
from cuboidpack.errors import PreconditionError
from cuboidpack.geometry import Item, Packing, item_table, max_extent, strip_height, total_volume
from cuboidpack.layers import LiChengBackend, StripBackendGuarantee, licheng_strip

DELTA = Fraction(1, 100)


class TightBackend:
    name = "tight"
    guarantee = StripBackendGuarantee(Fraction(3, 2), Fraction(0), Fraction(1), False)

    def pack(self, items):
        return licheng_strip(items)


def test_mu_moves_down_when_the_band_is_heavy():
    plate = lambda k: Item(f"p{k}", DELTA / 2, 1, 1)
    assert compute_mu([plate(0)], DELTA, 1) == DELTA
    assert compute_mu([plate(k) for k in range(3)], DELTA, 1) == DELTA**4


def test_mu_requires_volume_within_guess():
    with pytest.raises(PreconditionError):
        compute_mu([Item("a", 1, 1, 1), Item("b", 1, 1, "0.5")], DELTA, 1)


def test_classification():
    mu = Fraction(1, 10)
    tiny = mu**4
    items = [
        Item("L", "0.5", "0.5", "0.5"),
        Item("h", "0.5", "0.5", tiny),
        Item("w", tiny, "0.5", "0.5"),
        Item("d", "0.5", tiny, "0.5"),
        Item("rh", "0.5", "0.5", "0.05"),
        Item("rw", "0.05", "0.5", "0.5"),
        Item("rd", "0.5", "0.05", "0.5"),
    ]
    cls = classify_absolute(items, mu)
    assert [i.id for i in cls.L] == ["L"]
    assert [i.id for i in cls.I_h] == ["h"]
    assert [i.id for i in cls.I_w] == ["w"]
    assert [i.id for i in cls.I_d] == ["d"]
    assert [i.id for i in cls.I_rem] == ["rh", "rw", "rd"]
    assert cls.thin("x") == cls.I_w
    assert [i.id for i in cls.I_h_s] == ["h"]


def test_bin_bound_depends_on_backend():
    assert bin_bound(2, LiChengBackend()) == 29
    assert bin_bound(2, TightBackend()) == 12


def test_pack_separate_thin_in_width():
    mu = Fraction(1, 10)
    items = [Item(f"p{k}", Fraction(1, 20), fr(k + 1) / 8, fr(k + 2) / 10) for k in range(7)]
    result = pack_separate(items, "x", 1, mu=mu)
    assert_feasible(result.packing, items)
    assert result.empty.start + result.empty.height == 1
    assert result.empty.axis == "x"


def test_pack_separate_rejects_thick_items():
    with pytest.raises(PreconditionError):
        pack_separate([Item("a", "0.5", "0.5", "0.5")], "x", 1, mu=Fraction(1, 10))


def test_pack_separate_empty():
    result = pack_separate([], "z", 1)
    assert result.empty is None
    assert result.packing.used_bins == 0


def test_plates_pack_into_one_bin():
    mu = Fraction(1, 10)
    plates = [Item(f"h{k}", "0.4", "0.9", mu**4) for k in range(20)]
    packing = pack_Ihs_grouped(plates, 1, Fraction(1, 1000), mu)
    assert_feasible(packing, plates)
    assert packing.used_bins == 1


@pytest.mark.parametrize("plate", [
    Item("wide", "0.6", "0.6", Fraction(1, 10**4)),
    Item("thick", "0.4", "0.4", "0.01"),
])
def test_plate_preconditions(plate):
    with pytest.raises(PreconditionError):
        pack_Ihs_grouped([plate], 1, Fraction(1, 1000), Fraction(1, 10))


def test_leftover_volume_is_bounded():
    leftovers = [Item("a", "0.5", "0.5", "0.5")]
    with pytest.raises(PreconditionError):
        repack_leftovers(leftovers, [], Packing((), "bins"), item_table(leftovers), DELTA, DELTA, 1)


def test_leftovers_fill_free_space_on_top():
    base_items = [Item("b", 1, 1, "0.5")]
    base = licheng_strip(base_items)
    base = Packing(base.placements, "bins")
    rem = [Item("r", "0.5", "0.5", "0.01")]
    packing = repack_leftovers([], rem, base, item_table(base_items), DELTA, DELTA, 1)
    assert_feasible(packing, base_items + rem)
    assert packing.used_bins == 1


def test_large_thin_strips_follow_the_thin_axis():
    items = [Item("flat", "0.8", "0.8", "0.1"), Item("side", "0.1", "0.8", "0.8"), Item("front", "0.8", "0.1", "0.8")]
    result = pack_large_thin(items, Fraction(1, 10))
    assert result.thickness == {"z": fr("0.1"), "x": fr("0.1"), "y": fr("0.1")}
    assert result.strips["x"].strip_axis == "x"
    assert [p.item_id for p in result.strips["y"].placements] == ["front"]


def test_large_thin_needs_a_thin_dimension():
    with pytest.raises(PreconditionError):
        pack_large_thin([Item("cube", "0.5", "0.5", "0.5")], Fraction(1, 10))


def test_empty_instance():
    packing, report = solve_absolute_bp([])
    assert packing.used_bins == 0
    assert report.k_accepted == 0


def test_light_large_items_take_the_strip_case():
    params = AbsParams(1, Fraction(1, 40), Fraction(1, 64000), Fraction(1, 40))
    items = [Item("big", "0.1", "0.1", "0.05"), Item("t", "0.5", "0.5", params.delta**4)]
    packing, report = solve_absolute_bp(items, params)
    assert_feasible(packing, items)
    assert report.case == CASE_LARGE_THIN
    assert report.k_accepted == 1
    assert report.mu == params.delta
    assert packing.used_bins == 1


@pytest.mark.parametrize("seed", range(4))
def test_absolute_bp_respects_its_bound(seed):
    items = grid_items(5, seed)
    packing, report = solve_absolute_bp(items)
    assert_feasible(packing, items)
    assert packing.used_bins == report.bins
    assert packing.used_bins <= report.bin_bound
    if report.case != CASE_FALLBACK:
        assert report.k_accepted >= math.ceil(total_volume(items))
        assert report.bin_bound == 13 * report.k_accepted + 3


def test_volume_above_k_max_falls_back():
    items = [Item(f"u{k}", 1, 1, 1) for k in range(4)]
    packing, report = solve_absolute_bp(items)
    assert_feasible(packing, items)
    assert report.case == CASE_FALLBACK
    assert report.bin_bound == 8 * 4 + 18
    assert 0 in report.rejected
    assert report.to_dict()["case"] == CASE_FALLBACK


def test_absolute_sp(monkeypatch):
    monkeypatch.setenv("CUBOIDPACK_GUESS_EXPONENT_CAP", "4")
    items = grid_items(3, 7)
    strip, report = solve_absolute_sp(items)
    table = item_table(items)
    assert_feasible(strip, items)
    assert strip.kind == "strip"
    assert report.height == strip_height(strip, table)
    assert report.height >= max(total_volume(items), max_extent(items, "z"))
    assert report.guesses_tried <= 5
    if not report.fallback:
        assert report.height <= report.height_bound


def test_absolute_sp_empty():
    strip, report = solve_absolute_sp([])
    assert strip.placements == ()
    assert report.height == 0
