import os
from fractions import Fraction

import numpy as np
import pytest

from cuboidpack import config
from cuboidpack.geometry import Item, Packing, item_table, verify_packing


def fr(value) -> Fraction:
    """Rational shorthand: fr("1/3"), fr(0.25), fr(2)."""
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def assert_feasible(packing: Packing, items, complete: bool = True):
    report = verify_packing(packing, item_table(items))
    assert report.feasible, report.violations[:5]
    if complete:
        assert not report.unplaced, report.unplaced[:5]
    return report


def grid_items(n: int, seed: int, grid: int = 12, low: int = 1, high: int = 12, prefix: str = "g"):
    """``n`` items with dimensions k/grid, k drawn uniformly from [low, high]."""
    rng = np.random.default_rng(seed)
    dims = rng.integers(low, high + 1, size=(n, 3))
    return [Item(f"{prefix}{k}", Fraction(int(w), grid), Fraction(int(d), grid), Fraction(int(h), grid))
            for k, (w, d, h) in enumerate(dims)]


def cube(item_id: str, side) -> Item:
    side = fr(side)
    return Item(item_id, side, side, side)


@pytest.fixture(autouse=True)
def _fresh_settings(monkeypatch):
    """Each test sees settings built from its own environment."""
    for key in list(os.environ):
        if key.startswith("CUBOIDPACK_"):
            monkeypatch.delenv(key, raising=False)
    monkeypatch.setattr(config, "ENV_FILE", config.PROJECT_ROOT / ".env.test-missing")
    config.get_settings.cache_clear()
    yield
    config.get_settings.cache_clear()
