"""
config.py
---------
Process-wide settings. Values come from ``CUBOIDPACK_*`` environment
variables, optionally loaded from the project's ``.env`` file.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from cuboidpack.errors import PreconditionError

PROJECT_ROOT = Path(__file__).resolve().parent.parent
ENV_FILE = PROJECT_ROOT / ".env"
DATA_DIR = PROJECT_ROOT / "data"


@dataclass(frozen=True)
class Settings:
    epsilon: Fraction = Fraction(1, 40)
    asymptotic_epsilon: Fraction = Fraction(1, 6)
    k_max: int = 3
    oracle_cap: int = 6
    oracle_node_budget: int = 2_000_000
    slot_candidates: int = 32
    slot_cap: int = 64
    gap_node_budget: int = 200_000
    type_grid: int = 6
    guess_exponent_cap: int = 24
    backend: str = "licheng"
    external_backend: Optional[str] = None
    seed: int = 0
    log_level: str = "INFO"
    data_dir: Path = DATA_DIR


def _read(key: str, default, parse):
    raw = os.getenv(key)
    if raw is None or raw.strip() == "":
        return default
    try:
        return parse(raw.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise PreconditionError(f"{key}: cannot parse {raw!r}") from exc


def load_settings(env_file: Optional[Path] = None) -> Settings:
    """Build :class:`Settings` from the environment (after loading ``.env``)."""
    load_dotenv(dotenv_path=env_file or ENV_FILE)
    base = Settings()
    return Settings(
        epsilon=_read("CUBOIDPACK_EPSILON", base.epsilon, Fraction),
        asymptotic_epsilon=_read("CUBOIDPACK_ASYMPTOTIC_EPSILON", base.asymptotic_epsilon, Fraction),
        k_max=_read("CUBOIDPACK_K_MAX", base.k_max, int),
        oracle_cap=_read("CUBOIDPACK_ORACLE_CAP", base.oracle_cap, int),
        oracle_node_budget=_read("CUBOIDPACK_ORACLE_NODE_BUDGET", base.oracle_node_budget, int),
        slot_candidates=_read("CUBOIDPACK_SLOT_CANDIDATES", base.slot_candidates, int),
        slot_cap=_read("CUBOIDPACK_SLOT_CAP", base.slot_cap, int),
        gap_node_budget=_read("CUBOIDPACK_GAP_NODE_BUDGET", base.gap_node_budget, int),
        type_grid=_read("CUBOIDPACK_TYPE_GRID", base.type_grid, int),
        guess_exponent_cap=_read("CUBOIDPACK_GUESS_EXPONENT_CAP", base.guess_exponent_cap, int),
        backend=_read("CUBOIDPACK_BACKEND", base.backend, str),
        external_backend=_read("CUBOIDPACK_EXTERNAL_BACKEND", base.external_backend, str),
        seed=_read("CUBOIDPACK_SEED", base.seed, int),
        log_level=_read("CUBOIDPACK_LOG_LEVEL", base.log_level, str).upper(),
        data_dir=_read("CUBOIDPACK_DATA_DIR", base.data_dir, Path),
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return load_settings()
