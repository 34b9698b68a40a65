from fractions import Fraction

import pytest

from conftest import fr
from cuboidpack.errors import PreconditionError, UnknownItemError
from cuboidpack.geometry import (
    BinSpec,
    Item,
    Packing,
    Placement,
    Placement2D,
    as_rational,
    bin_fill_heights,
    compose_orientation,
    format_rational,
    frame_item,
    frame_packing,
    item_table,
    items_overlap,
    merge_bin_packings,
    oriented_extents,
    renumber_dense,
    verify_packing,
    verify_packing_2d,
)


def test_decimal_strings_parse_exactly():
    assert as_rational("0.35") == Fraction(35, 100)
    assert as_rational("1/12") == Fraction(1, 12)
    assert as_rational(0.1) == Fraction(1, 10)
    with pytest.raises(PreconditionError):
        as_rational("abc")


@pytest.mark.parametrize("value, text", [
    (fr("1/2"), "0.5"),
    (fr(2), "2"),
    (fr("1/3"), "1/3"),
    (fr("3/40"), "0.075"),
])
def test_format_rational(value, text):
    assert format_rational(value) == text
    assert as_rational(text) == value


def test_item_extents_must_lie_in_unit_interval():
    with pytest.raises(PreconditionError):
        Item("a", 0, "0.5", "0.5")
    with pytest.raises(PreconditionError):
        Item("a", "1.01", "0.5", "0.5")
    assert Item("a", 1, 1, 1).volume == 1


def test_identical_boxes_overlap():
    items = item_table([Item("a", 1, 1, 1), Item("b", 1, 1, 1)])
    assert items_overlap(Placement("a", 0, 0, 0, 0), Placement("b", 0, 0, 0, 0), items)


def test_touching_faces_do_not_overlap():
    items = item_table([Item("a", "0.5", 1, 1), Item("b", "0.5", 1, 1)])
    p1, p2 = Placement("a", 0, 0, 0, 0), Placement("b", 0, "0.5", 0, 0)
    assert not items_overlap(p1, p2, items)
    assert not items_overlap(p2, p1, items)


def test_different_bins_never_overlap():
    items = item_table([Item("a", 1, 1, 1), Item("b", 1, 1, 1)])
    assert not items_overlap(Placement("a", 0, 0, 0, 0), Placement("b", 1, 0, 0, 0), items)


def test_unknown_item_raises():
    with pytest.raises(UnknownItemError):
        items_overlap(Placement("a", 0, 0, 0, 0), Placement("zz", 0, 0, 0, 0), item_table([Item("a", 1, 1, 1)]))


def test_single_cube_in_unit_bin_is_feasible():
    items = item_table([Item("a", 1, 1, 1)])
    report = verify_packing(Packing((Placement("a", 0, 0, 0, 0),)), items)
    assert report.feasible and report.complete
    assert report.used_bins == 1
    assert report.total_volume == 1


def test_containment_violation():
    items = item_table([Item("a", "0.6", "0.5", "0.5")])
    report = verify_packing(Packing((Placement("a", 0, "0.5", 0, 0),)), items)
    assert not report.feasible
    assert report.violations[0].kind == "containment"


def test_duplicate_and_unplaced_items_are_reported():
    items = item_table([Item("a", "0.5", "0.5", "0.5"), Item("b", "0.5", "0.5", "0.5")])
    placements = (Placement("a", 0, 0, 0, 0), Placement("a", 1, 0, 0, 0))
    report = verify_packing(Packing(placements), items)
    assert [v.kind for v in report.violations] == ["duplicate"]
    assert report.unplaced == ("b",)
    assert not report.complete


def test_strip_height_of_stacked_items():
    items = item_table([Item("a", 1, 1, "0.5"), Item("b", 1, 1, "0.4")])
    strip = Packing((Placement("a", 0, 0, 0, 0), Placement("b", 0, 0, 0, "0.5")), "strip")
    report = verify_packing(strip, items)
    assert report.feasible
    assert report.strip_height == fr("0.9")


def test_overlap_is_detected_with_witness():
    items = item_table([Item("a", "0.5", "0.5", "0.5"), Item("b", "0.5", "0.5", "0.5")])
    placements = (Placement("a", 0, 0, 0, 0), Placement("b", 0, "0.25", "0.25", "0.25"))
    report = verify_packing(Packing(placements), items)
    assert [v.kind for v in report.violations] == ["overlap"]
    assert report.violations[0].witness == (fr("0.25"), fr("0.25"), fr("0.25"))


def test_wall_contact_in_custom_bin():
    items = item_table([Item("a", "0.5", "0.5", 1)])
    spec = BinSpec("0.5", "0.5", 1)
    assert verify_packing(Packing((Placement("a", 0, 0, 0, 0),), "bins", spec), items).feasible


def test_oriented_extents_follow_axis_letters():
    item = Item("a", "0.1", "0.2", "0.3")
    assert oriented_extents(item, "xyz") == (fr("0.1"), fr("0.2"), fr("0.3"))
    assert oriented_extents(item, "zxy") == (fr("0.3"), fr("0.1"), fr("0.2"))
    twice = compose_orientation("zxy", "yxz")
    assert item.oriented("yxz").oriented("zxy").dims == item.oriented(twice).dims


def test_frame_round_trip_keeps_feasibility():
    items = [Item("a", "0.2", "0.5", 1), Item("b", "0.3", "0.5", 1)]
    placements = (Placement("a", 0, 0, 0, 0), Placement("b", 0, 0, "0.5", 0))
    packing = Packing(placements)
    for axis in ("x", "y", "z"):
        framed_items = [frame_item(i, axis) for i in items]
        framed = frame_packing(packing, axis)
        assert verify_packing(framed, item_table(framed_items)).feasible
        assert frame_packing(framed, axis).placements == packing.placements


def test_merge_and_renumber_keep_bins_dense():
    items = item_table([Item(k, 1, 1, 1) for k in "abc"])
    first = Packing((Placement("a", 2, 0, 0, 0),))
    second = Packing((Placement("b", 0, 0, 0, 0), Placement("c", 5, 0, 0, 0)))
    merged = merge_bin_packings([first, second])
    assert sorted(p.bin_index for p in merged.placements) == [0, 1, 2]
    assert verify_packing(merged, items).feasible
    assert renumber_dense(Packing((Placement("a", 4, 0, 0, 0),))).used_bins == 1


def test_bin_fill_heights():
    items = item_table([Item("a", 1, 1, "0.25"), Item("b", 1, 1, "0.5")])
    packing = Packing((Placement("a", 0, 0, 0, 0), Placement("b", 1, 0, 0, "0.5")))
    assert bin_fill_heights(packing, items) == {0: fr("0.25"), 1: fr(1)}


def test_verify_packing_2d():
    ok = [Placement2D("a", 0, 0, "0.5", 1), Placement2D("b", "0.5", 0, "0.5", 1)]
    assert verify_packing_2d(ok, 1, 1).feasible
    bad = [Placement2D("a", 0, 0, "0.6", 1), Placement2D("b", "0.5", 0, "0.5", 1)]
    assert not verify_packing_2d(bad, 1, 1).feasible


def test_placement_2d_reads_strings_exactly():
    p = Placement2D("a", "1/3", 0, "0.5", 1)
    assert (p.x, p.right, p.top) == (Fraction(1, 3), Fraction(5, 6), 1)
