"""Configuration parser for hardy-refine.

Settings come from a ``hardy_refine.toml`` (or ``.hardy_refine.toml``, or the
``[tool.hardy-refine]`` table of a ``pyproject.toml``) found by walking up
from the working directory. A config may ``extend`` another one; child keys
override parent keys table by table.
"""

import os
import sys
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from hardy_refine.errors import ConfigError, PreconditionError
from hardy_refine.logging import get_logger
from hardy_refine.quadrature import QuadConfig, Transform

# Module logger
logger = get_logger("config")

# Config file search order
CONFIG_FILES = [
    "hardy_refine.toml",
    ".hardy_refine.toml",
    "pyproject.toml",
]

PYPROJECT_TABLE = "hardy-refine"
SEED_ENV = "HARDY_REFINE_SEED"

DEFAULT_SEED = 42
DEFAULT_SUPERQUAD_GRID = [0.0, 0.1, 0.5, 1.0, 2.0, 10.0]
OUTPUT_FORMATS = ("json", "csv")


class RefineConfig:
    """Configuration manager for hardy-refine.

    Loaded lazily; ``isolated=True`` ignores every config file and uses the
    built-in defaults.
    """

    def __init__(self, config_path: Path | None = None, isolated: bool = False):
        """Initialize the configuration.

        Args:
            config_path: Optional explicit path to config file.
            isolated: Skip config discovery entirely.
        """
        self.config_path = config_path
        self.isolated = isolated
        self._config: dict[str, Any] | None = None
        self._project_root: Path | None = None

    def find_config_file(self, start_dir: Path | None = None) -> Path | None:
        """Find a config file by walking up the directory tree.

        Args:
            start_dir: Directory to start searching from. Defaults to cwd.

        Returns:
            Path to config file if found, None otherwise.
        """
        if self.config_path is not None:
            logger.debug("Using explicit config path: %s", self.config_path)
            if not self.config_path.exists():
                raise ConfigError(f"config file not found: {self.config_path}")
            return self.config_path

        current = (start_dir or Path.cwd()).resolve()
        logger.debug("Searching for config file starting from: %s", current)
        while True:
            for config_name in CONFIG_FILES:
                config_file = current / config_name
                if not config_file.exists():
                    continue
                if config_name == "pyproject.toml":
                    try:
                        data = _read_toml(config_file)
                    except ConfigError as e:
                        logger.debug("Error reading %s: %s", config_file, e)
                        continue
                    if PYPROJECT_TABLE not in data.get("tool", {}):
                        logger.debug("Skipping %s (no [tool.%s] section)", config_file, PYPROJECT_TABLE)
                        continue
                logger.debug("Using config file: %s", config_file)
                return config_file

            parent = current.parent
            if parent == current:
                break
            current = parent

        logger.debug("No config file found, using defaults")
        return None

    def load(self, start_dir: Path | None = None) -> dict[str, Any]:
        """Load the configuration.

        Args:
            start_dir: Directory to start searching for config.

        Returns:
            Configuration dictionary.
        """
        if self._config is not None:
            return self._config

        config_file = None if self.isolated else self.find_config_file(start_dir)
        if config_file is None:
            self._config = {}
            self._project_root = Path.cwd()
            self._log_resolved_settings()
            return self._config

        self._project_root = config_file.parent
        self._config = _section(config_file, _read_toml(config_file))
        if "extend" in self._config:
            logger.debug("Resolving extend configuration: %s", self._config["extend"])
            self._config = self._resolve_extend(self._config, {config_file.resolve()})

        self.config_path = config_file
        self._log_resolved_settings()
        return self._config

    def _log_resolved_settings(self) -> None:
        logger.debug("Resolved settings:")
        logger.debug("  seed: %d", self.get_seed())
        logger.debug("  jobs: %d", self.get_jobs())
        quad = self.get_quad_config()
        logger.debug(
            "  quadrature: rel-tol=%g abs-tol=%g max-panels=%d transform=%s",
            quad.rel_tol, quad.abs_tol, quad.max_panels, quad.transform.value,
        )

    def _resolve_extend(self, config: dict[str, Any], seen_paths: set[Path]) -> dict[str, Any]:
        """Merge the configuration ``config`` extends into it (recursively)."""
        extend_path = Path(config["extend"]).expanduser()
        if not extend_path.is_absolute() and self._project_root:
            extend_path = self._project_root / extend_path
        extend_path = extend_path.resolve()

        if not extend_path.exists():
            raise ConfigError(f"extended config not found: {extend_path}")
        if extend_path in seen_paths:
            logger.debug("Ignoring circular extend of %s", extend_path)
            return {k: v for k, v in config.items() if k != "extend"}
        seen_paths.add(extend_path)

        parent_config = _section(extend_path, _read_toml(extend_path))
        if "extend" in parent_config:
            old_root = self._project_root
            self._project_root = extend_path.parent
            parent_config = self._resolve_extend(parent_config, seen_paths)
            self._project_root = old_root

        return _merge_configs(parent_config, config)

    @property
    def config(self) -> dict[str, Any]:
        """Get the loaded configuration."""
        if self._config is None:
            return self.load()
        return self._config

    @property
    def project_root(self) -> Path:
        """Get the project root directory."""
        if self._project_root is None:
            self.load()
        return self._project_root or Path.cwd()

    # ========== Global Options ==========

    def get_seed(self) -> int:
        """Master seed: HARDY_REFINE_SEED overrides the file, which overrides 42."""
        env = os.environ.get(SEED_ENV)
        if env:
            try:
                return int(env)
            except ValueError:
                raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None
        return _typed(self.config, "seed", DEFAULT_SEED, int)

    def get_output_format(self) -> str:
        """Report format, json or csv."""
        fmt = self.config.get("output-format", "json")
        if fmt not in OUTPUT_FORMATS:
            raise ConfigError(f"output-format must be one of {OUTPUT_FORMATS}, got {fmt!r}")
        return fmt

    def get_jobs(self) -> int:
        """Worker processes for sweeps and random suites."""
        jobs = _typed(self.config, "jobs", 1, int)
        if jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {jobs}")
        return jobs

    # ========== Quadrature [quadrature] ==========

    def get_quadrature_config(self) -> dict[str, Any]:
        """Get the raw [quadrature] table."""
        return self.config.get("quadrature", {})

    def get_quad_config(self, **overrides: Any) -> QuadConfig:
        """Build the QuadConfig, with non-None keyword overrides from the CLI."""
        table = self.get_quadrature_config()
        try:
            transform = Transform(table.get("transform", Transform.RATIONAL.value))
        except ValueError:
            choices = ", ".join(t.value for t in Transform)
            raise ConfigError(f"quadrature.transform must be one of {choices}") from None
        values: dict[str, Any] = {
            "rel_tol": _typed(table, "rel-tol", 1e-10, float),
            "abs_tol": _typed(table, "abs-tol", 1e-12, float),
            "max_panels": _typed(table, "max-panels", 2000, int),
            "transform": transform,
            "truncate_lower": _typed(table, "truncate-lower", 1e-6, float),
            "truncate_upper": _typed(table, "truncate-upper", 1e6, float),
            "average_grid_lower": _typed(table, "average-grid-lower", 1e-6, float),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return QuadConfig(**values)
        except PreconditionError as e:
            raise ConfigError(f"invalid quadrature settings: {e}") from None

    # ========== Superquadratic checks [superquad] ==========

    def get_superquad_config(self) -> dict[str, Any]:
        """Get the raw [superquad] table."""
        return self.config.get("superquad", {})

    def get_superquad_tol(self) -> float:
        return _typed(self.get_superquad_config(), "tol", 1e-9, float)

    def get_superquad_grid(self) -> list[float]:
        grid = self.get_superquad_config().get("grid", DEFAULT_SUPERQUAD_GRID)
        try:
            return [float(x) for x in grid]
        except (TypeError, ValueError):
            raise ConfigError(f"superquad.grid must be a list of numbers, got {grid!r}") from None

    # ========== Operator checks [operator] ==========

    def get_operator_config(self) -> dict[str, Any]:
        """Get the raw [operator] table."""
        return self.config.get("operator", {})

    def get_dim(self) -> int:
        return _typed(self.get_operator_config(), "dim", 3, int)

    def get_grid_points(self) -> int:
        return _typed(self.get_operator_config(), "grid-points", 33, int)

    def get_grid_bounds(self) -> tuple[float, float]:
        table = self.get_operator_config()
        lower = _typed(table, "grid-lower", 1e-4, float)
        upper = _typed(table, "grid-upper", 1e4, float)
        if not 0 < lower < upper:
            raise ConfigError(f"operator grid needs 0 < grid-lower < grid-upper, got [{lower}, {upper}]")
        return lower, upper

    def get_hansen_tol(self) -> float:
        return _typed(self.get_operator_config(), "hansen-tol", 1e-6, float)

    def get_trials(self) -> int:
        return _typed(self.get_operator_config(), "trials", 50, int)


def _read_toml(path: Path) -> dict[str, Any]:
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"cannot read {path}: {e}") from None


def _section(path: Path, data: dict[str, Any]) -> dict[str, Any]:
    if path.name == "pyproject.toml":
        return dict(data.get("tool", {}).get(PYPROJECT_TABLE, {}))
    return data


def _merge_configs(parent: dict[str, Any], child: dict[str, Any]) -> dict[str, Any]:
    """Merge parent and child configurations; the child takes precedence."""
    result = dict(parent)
    for key, value in child.items():
        if key == "extend":
            continue
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = _merge_configs(result[key], value)
        else:
            result[key] = value
    return result


def _typed(table: dict[str, Any], key: str, default: Any, kind: type) -> Any:
    value = table.get(key, default)
    # bool is an int subclass; reject it for numeric settings.
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    if kind is int:
        if value != int(value):
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return int(value)
    return float(value)
