"""Versioning utilities: git commit hash for run lineage in the sidecar log."""
from __future__ import annotations
import subprocess
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent


def get_commit_hash(short: bool = True) -> str:
    try:
        args = ['git', 'rev-parse', '--short', 'HEAD'] if short else ['git', 'rev-parse', 'HEAD']
        result = subprocess.run(args, capture_output=True, text=True, timeout=5, cwd=REPO_ROOT)
        if result.returncode == 0:
            return result.stdout.strip()
    except Exception:
        pass
    return 'unknown'


def run_lineage() -> dict:
    """Identifiers recorded at the top of every sidecar log."""
    from config.load_config import get_config_version
    return {'config_version': get_config_version(), 'commit': get_commit_hash()}
