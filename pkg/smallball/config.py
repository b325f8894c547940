from pathlib import Path
import os
from typing import Dict, Any, Optional, Union
import re
import logging

logger = logging.getLogger(__name__)

DEFAULT_DATADIR = Path.home() / ".smallball"
CONFIG_FILENAME = "smallball.conf"
ENV_PREFIX = "SMALLBALL_"

DEFAULTS: Dict[str, Any] = {
    "max_atoms": 1_000_000,
    "mitm_threshold": 16,
    "mc_samples": 100_000,
    "mc_substreams": 4,
    "center_grid_resolution": 256,
    "esseen_constant": 2.0,
    "zero_mass_tol": 1e-10,
    "candidate_depth": 6,
    "max_rank": 4,
    "exhaustive_budget": 20_000,
    "ratio_threshold": 10.0,
    "threads": 4,
}


def _coerce(value: str) -> Any:
    """Convert a raw configuration string to bool, int or float where it looks like one."""
    value = value.strip()
    if re.match(r"^-?\d+$", value):
        return int(value)
    if re.match(r"^-?(\d+\.\d*|\.\d+|\d+)([eE][-+]?\d+)?$", value):
        return float(value)
    if value.lower() in ("true", "yes", "y", "on"):
        return True
    if value.lower() in ("false", "no", "n", "off"):
        return False
    return value


class SmallballConfig:
    """
    Parser for smallball configuration files.
    Reads smallball.conf (key=value lines) and applies SMALLBALL_<KEY>
    environment overrides on top of the built-in defaults.
    """

    def __init__(self, datadir: Optional[Union[str, Path]] = None, use_env: bool = True):
        """
        Initialize the smallball configuration parser.

        Args:
            datadir: Directory holding smallball.conf (defaults to ~/.smallball)
            use_env: Whether SMALLBALL_<KEY> environment variables override file values
        """
        self.datadir = Path(datadir) if datadir else DEFAULT_DATADIR
        self.config: Dict[str, Any] = {}
        self._load_config()
        if use_env:
            self._load_env()

    def _load_config(self) -> None:
        """Load and parse the configuration file."""
        config_path = self._get_config_path()

        if not config_path.exists():
            logger.debug(f"smallball config file not found at {config_path}, using defaults")
            return

        try:
            with open(config_path, "r") as f:
                for line in f:
                    line = line.strip()

                    # Skip comments and empty lines
                    if not line or line.startswith("#"):
                        continue

                    if "=" in line:
                        key, value = line.split("=", 1)
                        self.config[key.strip()] = _coerce(value)
                    # Bare keys are switches
                    else:
                        self.config[line] = True
        except OSError as e:
            logger.error(f"Error reading smallball config file: {e}")

    def _load_env(self) -> None:
        """Apply SMALLBALL_<KEY> overrides."""
        for name, value in os.environ.items():
            if name.startswith(ENV_PREFIX):
                self.config[name[len(ENV_PREFIX):].lower()] = _coerce(value)

    def _get_config_path(self) -> Path:
        """Get the path to the configuration file."""
        return self.datadir / CONFIG_FILENAME

    def get(self, key: str, default: Any = None) -> Any:
        """Get a configuration value by key, falling back to the built-in default."""
        if key in self.config:
            return self.config[key]
        if default is not None:
            return default
        return DEFAULTS.get(key)

    def _get_int(self, key: str) -> int:
        value = self.get(key)
        try:
            return int(value)
        except (TypeError, ValueError):
            logger.warning(f"Invalid value {value!r} for {key}, using {DEFAULTS[key]}")
            return DEFAULTS[key]

    def _get_float(self, key: str) -> float:
        value = self.get(key)
        try:
            return float(value)
        except (TypeError, ValueError):
            logger.warning(f"Invalid value {value!r} for {key}, using {DEFAULTS[key]}")
            return DEFAULTS[key]

    @property
    def max_atoms(self) -> int:
        """Atom budget for exact laws."""
        return self._get_int("max_atoms")

    @property
    def mitm_threshold(self) -> int:
        return self._get_int("mitm_threshold")

    @property
    def mc_samples(self) -> int:
        """Default Monte Carlo sample count."""
        return self._get_int("mc_samples")

    @property
    def mc_substreams(self) -> int:
        return self._get_int("mc_substreams")

    @property
    def center_grid_resolution(self) -> int:
        return self._get_int("center_grid_resolution")

    @property
    def esseen_constant(self) -> float:
        return self._get_float("esseen_constant")

    @property
    def zero_mass_tol(self) -> float:
        return self._get_float("zero_mass_tol")

    @property
    def candidate_depth(self) -> int:
        """Largest divisor k used for candidate generators |x|/k."""
        return self._get_int("candidate_depth")

    @property
    def max_rank(self) -> int:
        return self._get_int("max_rank")

    @property
    def exhaustive_budget(self) -> int:
        return self._get_int("exhaustive_budget")

    @property
    def ratio_threshold(self) -> float:
        return self._get_float("ratio_threshold")

    @property
    def threads(self) -> int:
        """Worker threads for parameter sweeps."""
        return max(1, self._get_int("threads"))

    def get_all(self) -> Dict[str, Any]:
        """Get all configuration options, defaults included."""
        merged = dict(DEFAULTS)
        merged.update(self.config)
        return merged

    def __getitem__(self, key: str) -> Any:
        """Allow dictionary-like access to configuration options."""
        if key in self.config:
            return self.config[key]
        return DEFAULTS[key]

    def __contains__(self, key: str) -> bool:
        """Check if a configuration option exists."""
        return key in self.config or key in DEFAULTS
