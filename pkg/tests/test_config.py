"""Tests for configuration discovery and typed settings."""

from pathlib import Path

import pytest

from hardy_refine.config import RefineConfig
from hardy_refine.errors import ConfigError
from hardy_refine.quadrature import QuadConfig, Transform


@pytest.fixture(autouse=True)
def no_seed_env(monkeypatch):
    monkeypatch.delenv("HARDY_REFINE_SEED", raising=False)


def write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def test_defaults_when_isolated():
    config = RefineConfig(isolated=True)
    assert config.get_seed() == 42
    assert config.get_jobs() == 1
    assert config.get_output_format() == "json"
    assert config.get_quad_config() == QuadConfig()
    assert config.get_superquad_grid() == [0.0, 0.1, 0.5, 1.0, 2.0, 10.0]


def test_finds_config_in_parent_directory(tmp_path):
    write(tmp_path / "hardy_refine.toml", "seed = 7\n")
    nested = tmp_path / "a" / "b"
    nested.mkdir(parents=True)
    config = RefineConfig()
    assert config.find_config_file(nested) == (tmp_path / "hardy_refine.toml").resolve()
    config.load(nested)
    assert config.get_seed() == 7
    assert config.project_root == tmp_path.resolve()


def test_pyproject_needs_tool_table(tmp_path):
    write(tmp_path / "pyproject.toml", "[project]\nname = 'x'\n")
    assert RefineConfig().find_config_file(tmp_path) != tmp_path / "pyproject.toml"

    write(tmp_path / "pyproject.toml", "[tool.hardy-refine]\njobs = 3\n")
    config = RefineConfig()
    assert config.find_config_file(tmp_path) == (tmp_path / "pyproject.toml").resolve()
    config.load(tmp_path)
    assert config.get_jobs() == 3


def test_explicit_path_and_missing_file(tmp_path):
    path = write(tmp_path / "custom.toml", "[quadrature]\nrel-tol = 1e-8\ntransform = 'log-truncate'\n")
    quad = RefineConfig(config_path=path).get_quad_config()
    assert quad.rel_tol == 1e-8
    assert quad.transform is Transform.LOG_TRUNCATE
    with pytest.raises(ConfigError):
        RefineConfig(config_path=tmp_path / "missing.toml").load()


def test_cli_overrides_win(tmp_path):
    path = write(tmp_path / "c.toml", "[quadrature]\nrel-tol = 1e-8\n")
    quad = RefineConfig(config_path=path).get_quad_config(rel_tol=1e-6, abs_tol=None)
    assert quad.rel_tol == 1e-6
    assert quad.abs_tol == 1e-12


def test_extend_merges_tables(tmp_path):
    write(tmp_path / "base.toml", "seed = 1\n[operator]\ndim = 4\ntrials = 10\n")
    child = write(tmp_path / "child.toml", "extend = 'base.toml'\n[operator]\ntrials = 5\n")
    config = RefineConfig(config_path=child)
    assert config.get_seed() == 1
    assert config.get_dim() == 4
    assert config.get_trials() == 5


def test_circular_extend_terminates(tmp_path):
    write(tmp_path / "a.toml", "extend = 'b.toml'\nseed = 1\n")
    write(tmp_path / "b.toml", "extend = 'a.toml'\nseed = 2\njobs = 2\n")
    config = RefineConfig(config_path=tmp_path / "a.toml")
    assert config.get_seed() == 1
    assert config.get_jobs() == 2


def test_seed_environment_overrides_file(tmp_path, monkeypatch):
    path = write(tmp_path / "c.toml", "seed = 7\n")
    monkeypatch.setenv("HARDY_REFINE_SEED", "99")
    assert RefineConfig(config_path=path).get_seed() == 99
    monkeypatch.setenv("HARDY_REFINE_SEED", "abc")
    with pytest.raises(ConfigError):
        RefineConfig(config_path=path).get_seed()


@pytest.mark.parametrize("text", [
    "jobs = 0\n",
    "jobs = 1.5\n",
    "seed = 'x'\n",
    "output-format = 'xml'\n",
    "[quadrature]\ntransform = 'none'\n",
    "[quadrature]\nrel-tol = -1.0\n",
    "[quadrature]\nmax-panels = true\n",
    "[operator]\ngrid-lower = 10.0\ngrid-upper = 1.0\n",
    "[superquad]\ngrid = ['a']\n",
])
def test_invalid_settings(tmp_path, text):
    path = write(tmp_path / "bad.toml", text)
    config = RefineConfig(config_path=path)
    with pytest.raises(ConfigError):
        config.get_seed()
        config.get_jobs()
        config.get_output_format()
        config.get_quad_config()
        config.get_grid_bounds()
        config.get_superquad_grid()


def test_malformed_toml(tmp_path):
    path = write(tmp_path / "bad.toml", "seed = \n")
    with pytest.raises(ConfigError):
        RefineConfig(config_path=path).load()
