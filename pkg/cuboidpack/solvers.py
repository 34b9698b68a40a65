"""
solvers.py
----------
One entry point per ``--algo`` name. Every call returns the packing, the
objective it reached and a JSON-ready report; the packing is re-verified
here so callers never hand out an infeasible result.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Optional, Sequence, Union

from cuboidpack.absolute import AbsParams, solve_absolute_bp, solve_absolute_sp
from cuboidpack.asymptotic import ContainerDescriptor, solve_asymptotic_bp
from cuboidpack.config import get_settings
from cuboidpack.errors import ContractViolation, PreconditionError
from cuboidpack.geometry import Item, Packing, VerifyReport, item_table, strip_height, total_volume, verify_packing
from cuboidpack.layers import get_backend, licheng_bound, licheng_strip, volume_bin_pack
from cuboidpack.mvbb import APTAS, solve_mvbb
from cuboidpack.rotation import rotation_5approx

logger = logging.getLogger(__name__)

BINS = "bins"
HEIGHT = "height"
VOLUME = "volume"


@dataclass
class SolveOptions:
    epsilon: Optional[Fraction] = None
    k_max: Optional[int] = None
    backend: Optional[str] = None
    rotations: bool = False
    mvbb_mode: str = APTAS
    container_source: str = "generator"
    descriptor: Optional[ContainerDescriptor] = None


@dataclass
class SolveOutcome:
    algo: str
    packing: Packing
    objective: Union[int, Fraction]
    objective_kind: str
    report: Dict = field(default_factory=dict)
    verification: Optional[VerifyReport] = None

    @property
    def feasible(self) -> bool:
        return self.verification is not None and self.verification.complete


def _backend(options: SolveOptions):
    settings = get_settings()
    return get_backend(options.backend or settings.backend, settings.external_backend)


def _absolute(items, options: SolveOptions) -> SolveOutcome:
    backend = _backend(options)
    params = AbsParams.default(K=options.k_max, epsilon=options.epsilon, backend=backend.name)
    packing, report = solve_absolute_bp(items, params, backend)
    return SolveOutcome("absolute", packing, packing.used_bins, BINS, report.to_dict())


def _absolute_sp(items, options: SolveOptions) -> SolveOutcome:
    backend = _backend(options)
    params = AbsParams.default(K=1, epsilon=options.epsilon, backend=backend.name)
    packing, report = solve_absolute_sp(items, params, backend)
    return SolveOutcome("absolute-sp", packing, report.height, HEIGHT, report.to_dict())


def _asymptotic(items, options: SolveOptions) -> SolveOutcome:
    packing, report = solve_asymptotic_bp(items, options.epsilon, options.container_source, options.descriptor)
    return SolveOutcome("asymptotic", packing, packing.used_bins, BINS, report.to_dict())


def _mvbb(items, options: SolveOptions) -> SolveOutcome:
    result = solve_mvbb(items, options.epsilon, options.mvbb_mode, backend=_backend(options))
    report = {
        "mode": result.mode,
        "box": [result.box.W, result.box.D, result.box.H],
        "volume": result.volume,
        "lower_bound": result.lower_bound,
        "axis": result.axis,
        "guess": list(result.guess) if result.guess else None,
        "height_bound": result.height_bound,
        "mu": result.mu,
        "guesses": result.guesses,
        "certified": result.certified,
    }
    return SolveOutcome("mvbb", result.packing, result.volume, VOLUME, report)


def _rotation(items, options: SolveOptions) -> SolveOutcome:
    packing, report = rotation_5approx(items, options.k_max)
    body = {
        "k_accepted": report.k_accepted,
        "bins": report.bins,
        "bin_bound": None if report.k_accepted is None else 5 * report.k_accepted,
        "mu": report.mu,
        "groups": report.groups,
        "shared_bin": report.shared_bin,
        "fallback": report.fallback,
        "rejected": report.rejected,
    }
    return SolveOutcome("rotation", packing, packing.used_bins, BINS, body)


def _licheng(items, options: SolveOptions) -> SolveOutcome:
    strip = licheng_strip(items, "general")
    height = strip_height(strip, item_table(items))
    return SolveOutcome("licheng", strip, height, HEIGHT, {"height": height, "height_bound": licheng_bound(items)})


def _volume(items, options: SolveOptions) -> SolveOutcome:
    packing = volume_bin_pack(items)
    v = total_volume(items)
    return SolveOutcome("volume", packing, packing.used_bins, BINS, {"bins": packing.used_bins, "bin_bound": 8 * v + 18})


ALGORITHMS: Dict[str, Callable[[Sequence[Item], SolveOptions], SolveOutcome]] = {
    "absolute": _absolute,
    "absolute-sp": _absolute_sp,
    "asymptotic": _asymptotic,
    "mvbb": _mvbb,
    "rotation": _rotation,
    "licheng": _licheng,
    "volume": _volume,
}


def run_algorithm(algo: str, items: Sequence[Item], options: Optional[SolveOptions] = None) -> SolveOutcome:
    """Dispatch ``algo`` and verify what it returns."""
    if algo not in ALGORITHMS:
        raise PreconditionError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGORITHMS)}")
    options = options or SolveOptions()
    if options.rotations and algo != "rotation":
        logger.warning("--rotations only affects the rotation algorithm; %s packs items as given", algo)
    items = list(items)
    table = item_table(items)
    outcome = ALGORITHMS[algo](items, options)
    outcome.verification = verify_packing(outcome.packing, table)
    if not outcome.verification.complete:
        raise ContractViolation(
            f"{algo} returned an infeasible packing: {outcome.verification.violations[:3]}"
            f" unplaced={list(outcome.verification.unplaced[:3])}"
        )
    return outcome
