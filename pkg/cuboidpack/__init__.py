"""Exact-arithmetic approximation algorithms for 3D cuboid packing."""

from cuboidpack.geometry import BinSpec, Item, Packing, Placement, verify_packing

__all__ = ["BinSpec", "Item", "Packing", "Placement", "verify_packing"]
