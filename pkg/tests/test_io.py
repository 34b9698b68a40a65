import json
from fractions import Fraction

import pytest

from conftest import fr
from cuboidpack.asymptotic import BIG, TINY, VERTICAL, solve_asymptotic_bp
from cuboidpack.config import PROJECT_ROOT
from cuboidpack.errors import InstanceFormatError
from cuboidpack.geometry import BinSpec, Item, Packing, Placement
from cuboidpack.io import (
    descriptor_from_dict,
    dump_instance,
    dump_packing,
    dump_report,
    instance_from_dict,
    instance_to_dict,
    load_descriptor,
    load_instance,
    load_packing,
    packing_from_dict,
    read_json,
)


def test_instance_dimensions_are_exact():
    instance = instance_from_dict({"items": [{"id": 7, "w": "0.1", "d": "1/3", "h": 0.25}]})
    item = instance.items[0]
    assert item.id == "7"
    assert (item.w, item.d, item.h) == (Fraction(1, 10), Fraction(1, 3), Fraction(1, 4))
    assert instance.bin_spec == BinSpec(1, 1, 1)


def test_instance_dict_keeps_rationals_as_strings():
    payload = instance_to_dict([Item("a", "1/3", "0.5", 1)], name="tiny")
    assert payload["name"] == "tiny"
    assert payload["items"][0] == {"id": "a", "w": "1/3", "d": "0.5", "h": "1"}


def test_instance_file_round_trip(tmp_path):
    items = [Item("a", "1/3", "0.5", 1), Item("b", "0.125", "0.2", "0.7")]
    path = dump_instance(tmp_path / "inst.json", items, name="pair")
    loaded = load_instance(path)
    assert loaded.items == items
    assert loaded.name == "pair"
    assert not (tmp_path / "inst.json.tmp").exists()


@pytest.mark.parametrize("payload", [
    {"items": [{"id": "a", "w": "abc", "d": 1, "h": 1}]},
    {"items": [{"id": "a", "w": 2, "d": 1, "h": 1}]},
    {"items": [{"id": "a", "w": 1, "d": 1}]},
    {"items": [{"id": "a", "w": 1, "d": 1, "h": 1}, {"id": "a", "w": 1, "d": 1, "h": 1}]},
    {"bins": []},
])
def test_malformed_instances(payload):
    with pytest.raises(InstanceFormatError):
        instance_from_dict(payload)


def test_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{\"items\": [", encoding="utf-8")
    with pytest.raises(InstanceFormatError):
        read_json(path)


def test_packing_round_trip(tmp_path):
    packing = Packing(
        (Placement("a", 0, 0, 0, 0), Placement("b", 1, "0.5", 0, "1/3", "zxy")),
        "bins",
        BinSpec(1, 1, 1),
    )
    path = dump_packing(tmp_path / "out.packing.json", packing)
    raw = json.loads(path.read_text(encoding="utf-8"))
    assert raw["placements"][1] == {"id": "b", "bin": 1, "x": "0.5", "y": "0", "z": "1/3", "orient": "zxy"}
    assert load_packing(path) == packing


def test_strip_packing_fields():
    packing = packing_from_dict({"kind": "strip", "strip_axis": "x", "placements": []})
    assert packing.kind == "strip"
    assert packing.strip_axis == "x"


def test_bad_orientation_is_a_format_error():
    with pytest.raises(InstanceFormatError):
        packing_from_dict({"placements": [{"id": "a", "x": 0, "y": 0, "z": 0, "orient": "xxz"}]})


def test_descriptor_keys():
    descriptor = descriptor_from_dict({
        "configurations": [
            {
                "height": 2,
                "containers": [
                    {"kind": "big", "type": ["0.5", "0.5"], "x": 0, "y": 0, "w": "0.5", "d": "0.5"},
                    {"kind": "vertical", "x": "0.5", "y": 0, "w": "0.5", "d": "0.25"},
                ],
            },
            {"multiplicity": "3/2", "containers": [{"kind": "tiny", "x": 0, "y": 0, "w": 1, "d": 1}]},
        ]
    })
    first, second = descriptor.layouts
    assert first[0].kind == BIG and first[0].key == (fr("0.5"), fr("0.5"))
    assert first[1].kind == VERTICAL and first[1].key == fr("0.25")
    assert second[0].kind == TINY and second[0].key is None
    assert descriptor.heights == [2, None]
    assert descriptor.multiplicities == [None, Fraction(3, 2)]


@pytest.mark.parametrize("config", [
    {"containers": []},
    {"height": 2, "multiplicity": 1, "containers": []},
    {"height": "1.5", "containers": []},
    {"height": 0, "containers": []},
    {"multiplicity": -1, "containers": []},
    {"height": 1, "containers": [{"kind": "diagonal", "x": 0, "y": 0, "w": 1, "d": 1}]},
    {"height": 1, "containers": [
        {"kind": "big", "x": 0, "y": 0, "w": "0.5", "d": "0.5"},
        {"kind": "big", "x": "0.25", "y": 0, "w": "0.5", "d": "0.5"},
    ]},
    {"height": 1, "containers": [{"kind": "big", "x": "0.75", "y": 0, "w": "0.5", "d": "0.5"}]},
    {"height": 1, "containers": [{"kind": "tiny", "x": 0, "y": 0, "w": 0, "d": 1}]},
])
def test_descriptor_validation(config):
    with pytest.raises(InstanceFormatError):
        descriptor_from_dict({"configurations": [config]})


def test_descriptor_file(tmp_path):
    path = tmp_path / "containers.json"
    path.write_text(json.dumps({"configurations": [{"height": 1, "containers": []}]}), encoding="utf-8")
    assert load_descriptor(path).heights == [1]


def test_report_rationals_are_strings(tmp_path):
    path = dump_report(tmp_path / "r.json", {"objective": Fraction(1, 3), "ratio": 1.5, "nested": {"v": [Fraction(1, 2)]}})
    raw = json.loads(path.read_text(encoding="utf-8"))
    assert raw == {"objective": "1/3", "ratio": 1.5, "nested": {"v": ["0.5"]}}


def test_bundled_samples_load():
    data = PROJECT_ROOT / "data"
    assert len(load_instance(data / "sample_small.json").items) == 6
    cubes = load_instance(data / "sample_half_cubes.json").items
    descriptor = load_descriptor(data / "sample_containers.json")
    packing, _ = solve_asymptotic_bp(cubes, Fraction(1, 4), "explicit", descriptor)
    assert packing.used_bins == 1
