from fractions import Fraction

import pytest

from conftest import assert_feasible, cube, fr
from cuboidpack.asymptotic import (
    BIG,
    HORIZONTAL,
    INTERMEDIATE,
    TINY,
    VERTICAL,
    Configuration2D,
    Container3D,
    ContainerDescriptor,
    ContainerRect,
    Demands,
    adjust_delta,
    assign_big_lp,
    build_sliced_2d_instance,
    classify_2d,
    compute_delta,
    config_lp_solve,
    generate_configurations,
    lift_configurations,
    place_thin_containers,
    place_tiny_containers,
    solve_asymptotic_bp,
    stack_big,
)
from cuboidpack.errors import InfeasibleError, PreconditionError
from cuboidpack.generators import generate_instance
from cuboidpack.geometry import Item, Rect2D, total_volume

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)


def quadrant_layout():
    t = (HALF, HALF)
    return [ContainerRect(BIG, t, x, y, HALF, HALF) for x in (0, HALF) for y in (0, HALF)]


def test_adjust_delta():
    assert adjust_delta(QUARTER) == Fraction(1, 24)
    assert adjust_delta(Fraction(1, 100)) == Fraction(1, 120)


def test_delta_stays_when_rectangles_are_big():
    assert compute_delta([Rect2D("a", HALF, HALF)], QUARTER) == Fraction(1, 24)


def test_delta_skips_a_heavy_band():
    assert compute_delta([Rect2D("a", "0.01", HALF)], QUARTER) == Fraction(1, 24**4)


def test_delta_needs_unit_fraction():
    with pytest.raises(PreconditionError):
        compute_delta([Rect2D("a", HALF, HALF)], Fraction(2, 5))


def test_slicing_counts():
    items = [cube("a", HALF), Item("b", HALF, HALF, QUARTER)]
    sliced = build_sliced_2d_instance(items, QUARTER)
    assert sliced.params.slice_height == Fraction(3, 128)
    assert sliced.count_of("a") == 22
    assert sliced.count_of("b") == 11
    assert sliced.rect_count == 33
    assert set(sliced.mapping().values()) == {"a", "b"}
    explicit = build_sliced_2d_instance(items, QUARTER, slice_height=QUARTER)
    assert [g.count for g in explicit.groups] == [2, 1]


def test_slicing_empty_instance():
    with pytest.raises(PreconditionError):
        build_sliced_2d_instance([], QUARTER)


@pytest.mark.parametrize("w, d, kind", [
    ("0.5", "0.5", BIG),
    ("1/1000000", "0.5", VERTICAL),
    ("0.5", "1/1000000", HORIZONTAL),
    ("1/1000000", "1/1000000", TINY),
    ("0.01", "0.5", INTERMEDIATE),
])
def test_classify_2d(w, d, kind):
    assert classify_2d(fr(w), fr(d), Fraction(1, 24), Fraction(1, 24**4)) == kind


def test_configuration_counts():
    mu = Fraction(1, 24)
    layout = quadrant_layout()[:2] + [ContainerRect(VERTICAL, HALF, HALF, 0, HALF, HALF)]
    config = Configuration2D.from_layout(layout, mu)
    assert config.big == {(HALF, HALF): 2}
    assert config.vertical == {HALF: 12}
    assert config.validate()


def test_configuration_rejects_off_grid_containers():
    with pytest.raises(PreconditionError):
        Configuration2D.from_layout([ContainerRect(VERTICAL, HALF, 0, 0, Fraction(1, 7), HALF)], Fraction(1, 24))


def test_overlapping_layout_is_invalid():
    layout = [ContainerRect(BIG, (HALF, HALF), 0, 0, HALF, HALF)] * 2
    assert not Configuration2D.from_layout(layout, Fraction(1, 24)).validate()


def test_generated_configurations_cover_demands():
    demands = Demands(Fraction(1, 24), big={(HALF, HALF): Fraction(8)})
    configs = generate_configurations(demands, 6)
    assert configs[0].big == {(HALF, HALF): 4}
    result = config_lp_solve(configs, demands)
    assert result.objective == 2
    assert result.nonzeros() == 1


def test_config_lp_needs_configurations():
    with pytest.raises(PreconditionError):
        config_lp_solve([], Demands(Fraction(1, 24)))


def test_lift_keeps_integer_heights():
    lifted = lift_configurations([quadrant_layout(), quadrant_layout()[:1]], [2, 3])
    assert [c.height for c in lifted] == [2, 3]
    assert {box.config for box in lifted[1].containers} == {1}
    assert all(box.height == 2 for box in lifted[0].containers)


def test_big_assignment_settles_single_types_first():
    t1, t2 = (HALF, HALF), (1, 1)
    items = [Item("a", "0.4", "0.4", HALF), Item("b", "0.4", "0.4", HALF)]
    result = assign_big_lp(items, {"a": [t1], "b": [t1, t2]}, {t1: HALF, t2: 1})
    assert result.assigned == {"a": t1, "b": t2}
    assert result.fractional == []


def test_big_assignment_over_capacity():
    t1 = (HALF, HALF)
    with pytest.raises(InfeasibleError):
        assign_big_lp([Item("a", "0.4", "0.4", HALF)], {"a": [t1]}, {t1: QUARTER})
    with pytest.raises(InfeasibleError):
        assign_big_lp([Item("a", "0.4", "0.4", HALF)], {"a": []}, {t1: 1})


def test_stack_big_spans_containers():
    items = [cube(k, HALF) for k in "abc"]
    result = stack_big(items, [1, 1], QUARTER)
    assert result.positions == {"a": (0, 0), "b": (0, HALF), "c": (1, 0)}
    assert result.extensions == [0, 0]
    with pytest.raises(PreconditionError):
        stack_big(items, [1], QUARTER)


def vertical_box(height=1):
    return Container3D(VERTICAL, HALF, 0, 0, 0, Fraction(1, 10), HALF, height)


def test_thin_containers_take_vertical_items():
    items = [Item(f"v{k}", Fraction(1, 1000), "0.4", "0.3") for k in range(10)]
    fill = place_thin_containers(items, [vertical_box()], Fraction(1, 100), QUARTER)
    assert len(fill.positions) == 10
    assert not fill.overflow and not fill.unplaced
    assert fill.extensions == [0]
    assert all(x < Fraction(1, 10) and z == 0 for _, x, _, z in fill.positions.values())


def test_thin_containers_in_the_turned_frame():
    box = Container3D(HORIZONTAL, HALF, 0, 0, 0, HALF, Fraction(1, 10), 1)
    items = [Item(f"h{k}", "0.4", Fraction(1, 1000), "0.3") for k in range(10)]
    fill = place_thin_containers(items, [box], Fraction(1, 100), QUARTER, HORIZONTAL)
    assert len(fill.positions) == 10
    assert all(y < Fraction(1, 10) for _, _, y, _ in fill.positions.values())


def test_thin_container_checks():
    with pytest.raises(PreconditionError):
        place_thin_containers([Item("v", "0.5", "0.4", "0.3")], [vertical_box()], Fraction(1, 100), QUARTER)
    with pytest.raises(PreconditionError):
        place_thin_containers([], [vertical_box()], Fraction(1, 100), QUARTER, "diagonal")


def test_thin_border_crossers_stay_within_their_bound():
    box = Container3D(VERTICAL, HALF, 0, 0, 0, Fraction(1, 20), HALF, 1)
    items = [Item(f"v{k:02d}", Fraction(1, 200), "0.4", HALF) for k in range(40)]
    fill = place_thin_containers(items, [box], Fraction(1, 100), QUARTER)
    # 20 items reach the container area; 14 share the first shelf of width 7/100.
    assert len(fill.unplaced) == 20
    assert len(fill.overflow) == 4
    assert len(fill.positions) == 16
    assert total_volume(fill.overflow) == Fraction(1, 250)
    assert fill.overflow_bound == Fraction(3, 250)
    assert sorted({z for _, _, _, z in fill.positions.values()}) == [0, HALF]


def test_tiny_containers():
    box = Container3D(TINY, None, 0, 0, 0, HALF, HALF, 1)
    items = [Item(f"t{k}", "0.001", "0.001", "0.2") for k in range(50)]
    fill = place_tiny_containers(items, [box], Fraction(1, 100), QUARTER)
    assert len(fill.positions) == 50
    assert fill.extensions == [0]
    with pytest.raises(PreconditionError):
        place_tiny_containers([cube("c", HALF)], [box], Fraction(1, 100), QUARTER)


def test_descriptor_heights():
    descriptor = ContainerDescriptor([quadrant_layout(), quadrant_layout()], [2, None], [None, Fraction(4)])
    assert descriptor.resolve_heights(Fraction(1, 8)) == [2, 1]


def test_explicit_descriptor_packs_half_cubes():
    items = [cube(f"c{k}", HALF) for k in range(8)]
    descriptor = ContainerDescriptor([quadrant_layout()], [1], [None])
    packing, report = solve_asymptotic_bp(items, QUARTER, "explicit", descriptor)
    assert_feasible(packing, items)
    assert packing.used_bins == 1
    assert report.configurations == 1
    assert report.config_height == 1
    assert report.fallback_bins == 0
    assert report.tall_not_sliced


def test_items_without_containers_go_to_fallback():
    items = [cube(f"c{k}", HALF) for k in range(3)]
    tiny_only = [ContainerRect(TINY, None, 0, 0, 1, 1)]
    packing, report = solve_asymptotic_bp(items, QUARTER, "explicit", ContainerDescriptor([tiny_only], [1], [None]))
    assert_feasible(packing, items)
    assert report.fallback_bins == packing.used_bins
    assert "fractional" in report.overflow_volume


def test_overlapping_descriptor_is_rejected_before_packing():
    items = [cube(f"c{k}", HALF) for k in range(8)]
    layout = quadrant_layout() + [ContainerRect(BIG, (HALF, HALF), Fraction(3, 4), 0, HALF, HALF)]
    with pytest.raises(PreconditionError, match="configuration 0"):
        solve_asymptotic_bp(items, QUARTER, "explicit", ContainerDescriptor([layout], [1], [None]))


def test_pipeline_fills_thin_and_tiny_containers():
    sliver = Fraction(1, 10**6)
    items = (
        [cube(f"c{k}", HALF) for k in range(4)]
        + [Item(f"v{k}", sliver, HALF, HALF) for k in range(20)]
        + [Item(f"h{k}", HALF, sliver, Fraction(1, 3)) for k in range(20)]
        + [Item(f"t{k}", sliver, sliver, QUARTER) for k in range(50)]
    )
    packing, report = solve_asymptotic_bp(items, QUARTER)
    assert_feasible(packing, items)
    assert not report.fallback
    assert report.mu == Fraction(1, 24**4)
    assert not {VERTICAL, HORIZONTAL, TINY} & set(report.overflow_volume)
    assert report.overflow_bound > 0
    assert report.overflow_measured <= report.overflow_bound
    assert report.tall_not_sliced


@pytest.mark.parametrize("family", ["uniform", "cube-heavy", "grid12"])
def test_generator_pipeline_is_feasible(family):
    for seed in range(3):
        items = generate_instance(family, 40, seed)
        packing, report = solve_asymptotic_bp(items, QUARTER)
        assert_feasible(packing, items)
        assert report.bins == packing.used_bins
        assert report.tall_not_sliced
        assert "container_source" in report.to_dict()


def test_asymptotic_preconditions():
    items = [cube("c", HALF)]
    with pytest.raises(PreconditionError):
        solve_asymptotic_bp(items, Fraction(1, 3))
    with pytest.raises(PreconditionError):
        solve_asymptotic_bp(items, QUARTER, "oracle")
    with pytest.raises(PreconditionError):
        solve_asymptotic_bp(items, QUARTER, "explicit")


def test_empty_instance():
    packing, report = solve_asymptotic_bp([])
    assert packing.used_bins == 0
    assert report.bins == 0
