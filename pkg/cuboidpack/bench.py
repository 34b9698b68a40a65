"""
bench.py
--------
Run several algorithms over a set of instances and tabulate the results
against lower bounds and, for small instances, the exact optimum.
"""

from __future__ import annotations

import logging
import math
import time
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import pandas as pd
from tqdm import tqdm

from cuboidpack.config import get_settings
from cuboidpack.errors import OracleCapExceeded, PackingError, SearchBudgetExceeded
from cuboidpack.generators import generate_instance
from cuboidpack.geometry import Item, format_rational, max_extent, total_volume
from cuboidpack.io.schemas import load_instance
from cuboidpack.mvbb import volume_lower_bound_box
from cuboidpack.oracle import oracle_opt_bins
from cuboidpack.solvers import BINS, HEIGHT, SolveOptions, run_algorithm

logger = logging.getLogger(__name__)

COLUMNS = ["instance", "algo", "result", "volume_lb", "oracle_opt", "ratio", "runtime_ms"]
NamedInstance = Tuple[str, List[Item]]


def instances_from_dir(directory) -> List[NamedInstance]:
    """Every ``*.json`` instance in ``directory``, sorted by file name."""
    out = []
    for path in sorted(Path(directory).glob("*.json")):
        out.append((path.stem, load_instance(path).items))
    return out


def generated_instances(family: str, count: int, n: int, seed: int = 0) -> List[NamedInstance]:
    return [(f"{family}-{seed + k:04d}", generate_instance(family, n, seed + k)) for k in range(count)]


def lower_bound(kind: str, items: Sequence[Item]):
    v = total_volume(items)
    if kind == BINS:
        return math.ceil(v)
    if kind == HEIGHT:
        return max(v, max_extent(items, "z"))
    return volume_lower_bound_box(items)


def _oracle(items: Sequence[Item], cap: int, rotations: bool) -> Optional[int]:
    if not items or len(items) > cap:
        return None
    try:
        result = oracle_opt_bins(items, allow_rotations=rotations, cap=cap)
    except (OracleCapExceeded, SearchBudgetExceeded) as exc:
        logger.debug("oracle skipped: %s", exc)
        return None
    return None if result is None else result.opt


def run_bench(
    instances: Iterable[NamedInstance],
    algos: Sequence[str],
    options: Optional[SolveOptions] = None,
    oracle_cap: Optional[int] = None,
    timing: bool = False,
    progress: bool = True,
) -> pd.DataFrame:
    """One row per (instance, algo), sorted by instance then algo."""
    options = options or SolveOptions()
    cap = get_settings().oracle_cap if oracle_cap is None else oracle_cap
    instances = list(instances)
    rows: List[Dict] = []
    jobs = [(name, items, algo) for name, items in instances for algo in algos]
    oracle_cache: Dict[Tuple[str, bool], Optional[int]] = {}

    for name, items, algo in tqdm(jobs, desc="bench", unit="run", disable=not progress):
        start = time.perf_counter()
        try:
            outcome = run_algorithm(algo, items, options)
        except PackingError as exc:
            logger.warning("%s on %s failed: %s", algo, name, exc)
            rows.append(dict.fromkeys(COLUMNS, "") | {"instance": name, "algo": algo, "result": "error"})
            continue
        elapsed = (time.perf_counter() - start) * 1000

        lb = lower_bound(outcome.objective_kind, items)
        opt = None
        if outcome.objective_kind == BINS:
            rotations = algo == "rotation"
            key = (name, rotations)
            if key not in oracle_cache:
                oracle_cache[key] = _oracle(items, cap, rotations)
            opt = oracle_cache[key]
        reference = opt if opt else lb
        ratio = f"{float(outcome.objective) / float(reference):.4f}" if reference else ""
        rows.append({
            "instance": name,
            "algo": algo,
            "result": format_rational(outcome.objective),
            "volume_lb": format_rational(lb),
            "oracle_opt": "" if opt is None else str(opt),
            "ratio": ratio,
            "runtime_ms": f"{elapsed:.1f}" if timing else "",
        })

    frame = pd.DataFrame(rows, columns=COLUMNS)
    if not frame.empty:
        frame = frame.sort_values(["instance", "algo"], kind="mergesort").reset_index(drop=True)
    return frame


def write_bench_csv(frame: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path
