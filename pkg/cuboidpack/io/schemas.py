"""
schemas.py
----------
JSON files of the toolkit: instances, packings, container descriptors and
solver reports.

Dimensions are stored as decimal or "p/q" strings and parsed exactly. Writes
go through a temp file and ``os.replace`` so a crashed run never leaves half
a file behind.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, ValidationError, field_validator, model_validator

from cuboidpack.asymptotic import BIG, HORIZONTAL, VERTICAL, ContainerDescriptor, ContainerRect
from cuboidpack.errors import InstanceFormatError, PackingError, PreconditionError
from cuboidpack.geometry import UNIT_BIN, BinSpec, Item, Packing, Placement, as_rational, format_rational

PathLike = Union[str, Path]

Rational = Annotated[
    Fraction,
    BeforeValidator(as_rational),
    PlainSerializer(format_rational, return_type=str),
]


class _Model(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)


class BinModel(_Model):
    w: Rational = Fraction(1)
    d: Rational = Fraction(1)
    h: Rational = Fraction(1)


class ItemModel(_Model):
    id: str
    w: Rational
    d: Rational
    h: Rational

    @field_validator("id", mode="before")
    @classmethod
    def _stringify(cls, value):
        return str(value)


class InstanceModel(_Model):
    name: Optional[str] = None
    bin: BinModel = Field(default_factory=BinModel)
    items: List[ItemModel]


class PlacementModel(_Model):
    id: str
    bin: int = 0
    x: Rational
    y: Rational
    z: Rational
    orient: str = "xyz"

    @field_validator("id", mode="before")
    @classmethod
    def _stringify(cls, value):
        return str(value)


class PackingModel(_Model):
    kind: Literal["bins", "strip"] = "bins"
    strip_axis: Literal["x", "y", "z"] = "z"
    bin: BinModel = Field(default_factory=BinModel)
    placements: List[PlacementModel]


class ContainerModel(_Model):
    kind: Literal["big", "vertical", "horizontal", "tiny"]
    type: Optional[Tuple[Rational, Rational]] = None
    size: Optional[Rational] = None
    x: Rational
    y: Rational
    w: Rational
    d: Rational


class ConfigurationModel(_Model):
    multiplicity: Optional[Rational] = None
    height: Optional[Rational] = None
    containers: List[ContainerModel]

    @model_validator(mode="after")
    def _one_of(self):
        if (self.multiplicity is None) == (self.height is None):
            raise ValueError("give exactly one of multiplicity or height")
        if self.height is not None and (self.height.denominator != 1 or self.height < 1):
            raise ValueError(f"height must be a positive integer, got {self.height}")
        if self.multiplicity is not None and self.multiplicity < 0:
            raise ValueError("multiplicity must be non-negative")
        return self


class DescriptorModel(_Model):
    configurations: List[ConfigurationModel]


@dataclass
class Instance:
    items: List[Item]
    bin_spec: BinSpec = UNIT_BIN
    name: Optional[str] = None


# --- Low-level JSON ---

def read_json(path: PathLike) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: malformed JSON ({exc})") from exc


def write_json(path: PathLike, payload: Any) -> Path:
    """Atomically write ``payload`` as pretty JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(payload, f, ensure_ascii=False, indent=2)
        f.write("\n")
    os.replace(tmp, path)
    return path


def _validate(model, payload: Any, what: str):
    try:
        return model.model_validate(payload)
    except ValidationError as exc:
        raise InstanceFormatError(f"invalid {what}: {exc}") from exc


def _bin_spec(model: BinModel) -> BinSpec:
    return BinSpec(model.w, model.d, model.h)


def _bin_model(spec: BinSpec) -> BinModel:
    return BinModel(w=spec.W, d=spec.D, h=spec.H)


# --- Instances ---

def instance_from_dict(payload: Any) -> Instance:
    model = _validate(InstanceModel, payload, "instance")
    try:
        items = [Item(i.id, i.w, i.d, i.h) for i in model.items]
        spec = _bin_spec(model.bin)
    except PackingError as exc:
        raise InstanceFormatError(f"invalid instance: {exc}") from exc
    ids = [i.id for i in items]
    if len(set(ids)) != len(ids):
        raise InstanceFormatError("invalid instance: duplicate item ids")
    return Instance(items, spec, model.name)


def instance_to_dict(items: Sequence[Item], bin_spec: BinSpec = UNIT_BIN, name: Optional[str] = None) -> dict:
    model = InstanceModel(
        name=name,
        bin=_bin_model(bin_spec),
        items=[ItemModel(id=i.id, w=i.w, d=i.d, h=i.h) for i in items],
    )
    return model.model_dump(mode="json", exclude_none=True)


def load_instance(path: PathLike) -> Instance:
    return instance_from_dict(read_json(path))


def dump_instance(path: PathLike, items: Sequence[Item], bin_spec: BinSpec = UNIT_BIN, name: Optional[str] = None) -> Path:
    return write_json(path, instance_to_dict(items, bin_spec, name))


# --- Packings ---

def packing_from_dict(payload: Any) -> Packing:
    model = _validate(PackingModel, payload, "packing")
    try:
        placements = tuple(
            Placement(p.id, p.bin, p.x, p.y, p.z, p.orient) for p in model.placements
        )
        return Packing(placements, model.kind, _bin_spec(model.bin), model.strip_axis)
    except PackingError as exc:
        raise InstanceFormatError(f"invalid packing: {exc}") from exc


def packing_to_dict(packing: Packing) -> dict:
    model = PackingModel(
        kind=packing.kind,
        strip_axis=packing.strip_axis,
        bin=_bin_model(packing.bin_spec),
        placements=[
            PlacementModel(id=p.item_id, bin=p.bin_index, x=p.x, y=p.y, z=p.z, orient=p.orient)
            for p in packing.placements
        ],
    )
    return model.model_dump(mode="json")


def load_packing(path: PathLike) -> Packing:
    return packing_from_dict(read_json(path))


def dump_packing(path: PathLike, packing: Packing) -> Path:
    return write_json(path, packing_to_dict(packing))


# --- Container descriptors ---

def _container(model: ContainerModel) -> ContainerRect:
    if model.kind == BIG:
        key = tuple(model.type) if model.type is not None else (model.w, model.d)
    elif model.kind == VERTICAL:
        key = model.size if model.size is not None else model.d
    elif model.kind == HORIZONTAL:
        key = model.size if model.size is not None else model.w
    else:
        key = None
    return ContainerRect(model.kind, key, model.x, model.y, model.w, model.d)


def descriptor_from_dict(payload: Any) -> ContainerDescriptor:
    model = _validate(DescriptorModel, payload, "container descriptor")
    layouts, heights, mults = [], [], []
    for config in model.configurations:
        layouts.append([_container(c) for c in config.containers])
        heights.append(None if config.height is None else config.height.numerator)
        mults.append(config.multiplicity)
    descriptor = ContainerDescriptor(layouts, heights, mults)
    try:
        descriptor.validate()
    except PreconditionError as exc:
        raise InstanceFormatError(f"invalid container descriptor: {exc}") from exc
    return descriptor


def load_descriptor(path: PathLike) -> ContainerDescriptor:
    return descriptor_from_dict(read_json(path))


# --- Reports ---

def jsonable(value: Any) -> Any:
    """Rationals become exact strings; floats are left as approximations."""
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


def dump_report(path: PathLike, report: dict) -> Path:
    return write_json(path, jsonable(report))

