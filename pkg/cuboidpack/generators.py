"""
generators.py
-------------
Seeded random instances for tests and benchmarks.

Every dimension is drawn as an integer numerator over a fixed grid so the
instances are exact and reproduce byte for byte from the seed.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional

import numpy as np

from cuboidpack.errors import PreconditionError
from cuboidpack.geometry import Item

UNIFORM = "uniform"
CUBE_HEAVY = "cube-heavy"
THIN_HEAVY = "thin-heavy"
GRID12 = "grid12"
SLIVER = "sliver"
FAMILIES = (UNIFORM, CUBE_HEAVY, THIN_HEAVY, GRID12, SLIVER)

FINE_GRID = 100
SLIVER_GRID = 10**7


def _on_grid(rng: np.random.Generator, low: int, high: int, grid: int, size: int) -> List[Fraction]:
    return [Fraction(int(v), grid) for v in rng.integers(low, high + 1, size=size)]


def _uniform(rng, n):
    w, d, h = (_on_grid(rng, 1, FINE_GRID, FINE_GRID, n) for _ in range(3))
    return list(zip(w, d, h))


def _cube_heavy(rng, n):
    out = []
    for _ in range(n):
        if rng.random() < 0.75:
            side = _on_grid(rng, 25, 60, FINE_GRID, 1)[0]
            jitter = _on_grid(rng, 0, 5, FINE_GRID, 3)
            out.append(tuple(min(side + j, Fraction(1)) for j in jitter))
        else:
            out.append(tuple(_on_grid(rng, 1, FINE_GRID, FINE_GRID, 3)))
    return out


def _thin_heavy(rng, n):
    out = []
    for _ in range(n):
        dims = _on_grid(rng, 20, FINE_GRID, FINE_GRID, 3)
        if rng.random() < 0.8:
            dims[int(rng.integers(0, 3))] = Fraction(int(rng.integers(1, 4)), 400)
        out.append(tuple(dims))
    return out


def _grid12(rng, n):
    w, d, h = (_on_grid(rng, 1, 12, 12, n) for _ in range(3))
    return list(zip(w, d, h))


def _sliver(rng, n):
    # Base sides are at least 1/10 or below 1/3,000,000, never in between.
    out = []
    for _ in range(n):
        w, d = _on_grid(rng, 10, FINE_GRID, FINE_GRID, 2)
        h = _on_grid(rng, 1, FINE_GRID, FINE_GRID, 1)[0]
        roll = rng.random()
        if roll < 0.3:
            w = _on_grid(rng, 1, 3, SLIVER_GRID, 1)[0]
        elif roll < 0.6:
            d = _on_grid(rng, 1, 3, SLIVER_GRID, 1)[0]
        elif roll < 0.8:
            w, d = _on_grid(rng, 1, 3, SLIVER_GRID, 2)
        out.append((w, d, h))
    return out


_FAMILY_DRAWS = {
    UNIFORM: _uniform,
    CUBE_HEAVY: _cube_heavy,
    THIN_HEAVY: _thin_heavy,
    GRID12: _grid12,
    SLIVER: _sliver,
}


def generate_instance(family: str, n: int, seed: Optional[int] = 0, prefix: str = "i") -> List[Item]:
    """``n`` items of ``family`` drawn with ``numpy.random.default_rng(seed)``."""
    if family not in _FAMILY_DRAWS:
        raise PreconditionError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    if n < 0:
        raise PreconditionError("n must be non-negative")
    rng = np.random.default_rng(seed)
    dims = _FAMILY_DRAWS[family](rng, n)
    return [Item(f"{prefix}{k}", w, d, h) for k, (w, d, h) in enumerate(dims)]
