"""Configuration loader for the bidisc L-index toolkit.

Reads YAML settings from config/settings.yaml and provides a dict-like interface.
Falls back to in-code defaults if the file is missing or malformed. The worker
count can be capped from the environment via BINDEX_THREADS.
"""
from __future__ import annotations
import hashlib
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

try:
    import yaml  # type: ignore
except Exception:  # pragma: no cover
    yaml = None  # Minimal fallback

logger = logging.getLogger(__name__)

DEFAULTS: Dict[str, Any] = {
    'default_beta': 2.0,
    'index_tol': 1e-9,
    'default_cap': 12,
    'truncation_threshold': 1e-6,
    'alias_threshold': 1e-8,
    'cauchy_noise_floor': 1e-14,
    'extraction_radius_cap': 0.25,
    'extraction_radius_fraction': 0.5,
    'min_cauchy_samples': 16,
    'inner_grid': [8, 16],
    'outer_grid': [4, 8],
    'outer_max_radius': 0.9,
    'polydisc_grid': [4, 8],
    'skeleton_samples': 64,
    'exhaustion_levels': [0.5, 0.7, 0.9, 0.95],
    'exhaustion_grid': [2, 4],
    'comparability_spread_cap': 1e6,
    'comparability_growth': 2.0,
    'comparability_boundary_levels': [0.9, 0.99, 0.999],
    'verdict_slack': 1e-9,
    'tail_band_fraction': 0.01,
    'iteration_overrun_factor': 10,
    'max_workers': None,
}

CONFIG_PATH = Path(__file__).parent / 'settings.yaml'
THREADS_ENV = 'BINDEX_THREADS'

_cache: Dict[str, Any] | None = None


def _compute_version(path: Path) -> str:
    try:
        data = path.read_bytes()
        return hashlib.sha1(data).hexdigest()[:12]
    except Exception:
        return "unknown"


def get_config(refresh: bool = False) -> Dict[str, Any]:
    global _cache
    if _cache is not None and not refresh:
        return _cache
    cfg = DEFAULTS.copy()
    if CONFIG_PATH.exists() and yaml is not None:
        try:
            with open(CONFIG_PATH, 'r') as f:
                loaded = yaml.safe_load(f) or {}
            if isinstance(loaded, dict):
                for k, v in loaded.items():
                    cfg[k] = v
        except Exception as e:  # pragma: no cover
            logger.warning(f"Failed to load config/settings.yaml, using defaults: {e}")
    cfg['config_version'] = _compute_version(CONFIG_PATH) if CONFIG_PATH.exists() else 'defaults'
    _cache = cfg
    return cfg


def get_config_version() -> str:
    return get_config().get('config_version', 'unknown')


def resolve_max_workers(requested: Optional[int] = None) -> int:
    """Worker count for grid sweeps.

    Precedence: explicit argument, then BINDEX_THREADS, then ``max_workers``
    from settings, then the CPU count. BINDEX_THREADS also caps an explicit request.
    """
    cap: Optional[int] = None
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            cap = max(1, int(raw))
        except ValueError:
            logger.warning(f"Ignoring {THREADS_ENV}={raw!r}: not an integer")
    workers = requested or cap or get_config().get('max_workers') or (os.cpu_count() or 1)
    if cap is not None:
        workers = min(workers, cap)
    return max(1, int(workers))


__all__ = ['get_config', 'get_config_version', 'resolve_max_workers', 'THREADS_ENV']
