import re

from config.load_config import DEFAULTS, THREADS_ENV, get_config, get_config_version, resolve_max_workers
from config.versioning import run_lineage


def test_config_has_defaults_and_version():
    cfg = get_config(refresh=True)
    for key in DEFAULTS:
        assert key in cfg
    assert cfg['default_cap'] == 12
    assert cfg['truncation_threshold'] == 1e-6
    assert re.fullmatch(r'[0-9a-f]{12}', cfg['config_version'])
    assert get_config_version() == cfg['config_version']


def test_config_is_cached():
    assert get_config() is get_config()


def test_explicit_workers(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert resolve_max_workers(3) == 3


def test_env_caps_workers(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, '2')
    assert resolve_max_workers(8) == 2
    assert resolve_max_workers() == 2
    assert resolve_max_workers(1) == 1


def test_bad_env_is_ignored(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, 'many')
    assert resolve_max_workers(5) == 5
    assert resolve_max_workers() >= 1


def test_run_lineage():
    lineage = run_lineage()
    assert set(lineage) == {'config_version', 'commit'}
