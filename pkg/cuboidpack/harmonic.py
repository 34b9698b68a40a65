"""
harmonic.py
-----------
Harmonic rounding of lengths, the Sylvester sequence and the constants T_k
and T_inf that bound harmonic sums of sequences totalling at most one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from cuboidpack.errors import PreconditionError
from cuboidpack.geometry import ONE, ZERO, Item, as_rational

IDENTITY_TAIL = "identity_tail"
SCALED_TAIL = "scaled_tail"
VARIANTS = (IDENTITY_TAIL, SCALED_TAIL)

DEFAULT_TRUNCATION = 8


def sylvester(m: int) -> List[int]:
    """First ``m`` terms 1, 2, 6, 42, 1806, ... (each is prev * (prev + 1))."""
    terms: List[int] = []
    t = 1
    for _ in range(m):
        terms.append(t)
        t = t * (t + 1)
    return terms


def harmonic_number(k: int) -> Fraction:
    return sum((Fraction(1, i) for i in range(1, k + 1)), ZERO)


def harmonic_round(alpha, k: int, variant: str = IDENTITY_TAIL) -> Fraction:
    """Round ``alpha`` in (1/(q+1), 1/q] up to 1/q when q <= k - 1."""
    alpha = as_rational(alpha)
    if not ZERO < alpha <= ONE:
        raise PreconditionError(f"alpha={alpha} outside (0, 1]")
    if k < 2:
        raise PreconditionError(f"k={k} must be at least 2")
    if variant not in VARIANTS:
        raise PreconditionError(f"unknown rounding variant {variant!r}")
    q = math.floor(1 / alpha)
    if q <= k - 1:
        return Fraction(1, q)
    if variant == IDENTITY_TAIL:
        return alpha
    return Fraction(k, k - 1) * alpha


def _m_of(k: int) -> Tuple[int, List[int]]:
    # Smallest m with t_m < k <= t_{m+1}.
    terms = [1, 2]
    while terms[-1] < k:
        terms.append(terms[-1] * (terms[-1] + 1))
    return len(terms) - 1, terms


def harmonic_constant(k: int) -> Fraction:
    """T_k = sum_{q <= m(k)} 1/t_q + k / (t_{m(k)+1} (k - 1))."""
    if k < 2:
        raise PreconditionError(f"k={k} must be at least 2")
    m, terms = _m_of(k)
    head = sum((Fraction(1, t) for t in terms[:m]), ZERO)
    return head + Fraction(k, terms[m] * (k - 1))


def harmonic_constant_inf(m: int = DEFAULT_TRUNCATION) -> Fraction:
    """Truncated T_inf = sum of 1/t_i for the first ``m`` Sylvester terms."""
    if m < 1:
        raise PreconditionError("truncation must be at least 1")
    return sum((Fraction(1, t) for t in sylvester(m)), ZERO)


@dataclass(frozen=True)
class HarmonicTable:
    k: int
    sylvester: Tuple[int, ...]
    T_k: Fraction
    T_inf_approx: Fraction
    truncation: int = DEFAULT_TRUNCATION

    @classmethod
    def build(cls, k: int, truncation: int = DEFAULT_TRUNCATION) -> "HarmonicTable":
        return cls(
            k=k,
            sylvester=tuple(sylvester(truncation)),
            T_k=harmonic_constant(k),
            T_inf_approx=harmonic_constant_inf(truncation),
            truncation=truncation,
        )


@dataclass(frozen=True)
class RoundedInstance:
    original: Tuple[Item, ...]
    items: Tuple[Item, ...]
    k: int
    variant: str = IDENTITY_TAIL
    mapping: Dict[str, Tuple[Fraction, Fraction]] = field(default_factory=dict)

    def rounded_height(self, item_id: str) -> Fraction:
        return self.mapping[item_id][1]


def round_instance_heights(items: Sequence[Item], k: int, variant: str = IDENTITY_TAIL) -> RoundedInstance:
    rounded = []
    mapping = {}
    for item in items:
        h = harmonic_round(item.h, k, variant)
        rounded.append(item.with_dims(h=h))
        mapping[item.id] = (item.h, h)
    return RoundedInstance(tuple(items), tuple(rounded), k, variant, mapping)
