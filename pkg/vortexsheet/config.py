"""Configuration management for vortexsheet."""

import os
import tomli
from pathlib import Path
from typing import Any, Dict, Optional

from vortexsheet.errors import ConfigError

DEFAULT_CONFIG_FILE = "config.toml"
CONFIG_ENV = "VORTEXSHEET_CONFIG"
OUT_DIR_ENV = "VORTEXSHEET_OUT_DIR"


class Config:
    """Configuration class for vortexsheet runs."""

    def __init__(self, config_file: Optional[str] = None, required: bool = False):
        """Initialize configuration from TOML file.

        A missing file falls back to built-in defaults unless ``required``.
        """
        self.config_file = config_file or os.environ.get(CONFIG_ENV, DEFAULT_CONFIG_FILE)
        self.required = required
        self._config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from TOML file."""
        config_path = Path(self.config_file)
        if not config_path.exists():
            if self.required:
                raise ConfigError(f"Configuration file {self.config_file} not found")
            return {}

        try:
            with open(config_path, "rb") as f:
                return tomli.load(f)
        except tomli.TOMLDecodeError as e:
            raise ConfigError(f"Configuration file {self.config_file} is not valid TOML: {e}")

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value using dot notation."""
        keys = key.split(".")
        value = self._config

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default

        return value

    def section(self, name: str) -> Dict[str, Any]:
        """Return a whole table, empty if absent."""
        value = self.get(name, {})
        return dict(value) if isinstance(value, dict) else {}

    @property
    def log_level(self) -> str:
        return self.get("app.log_level", "INFO")

    @property
    def out_dir(self) -> str:
        return os.environ.get(OUT_DIR_ENV) or self.get("output.out_dir", "results")

    @property
    def ledger_enabled(self) -> bool:
        return self.get("ledger.enabled", True)

    @property
    def ledger_db_file(self) -> str:
        return self.get("ledger.db_file", "results/ledger.db")


# Global config instance
config = Config()
