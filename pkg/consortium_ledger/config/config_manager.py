"""
Centralized configuration management for consortium ledger.

This module provides a configuration manager that handles loading, merging,
and providing access to configuration from different sources with proper precedence.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

try:
    import tomli
except ImportError:
    tomli = None

from pydantic import ValidationError

from consortium_ledger.common.exceptions import ConfigurationError
from consortium_ledger.config.config_models import AppConfig

logger = logging.getLogger("consortium_ledger.config")

ENV_PREFIX = "CONSORTIUM_LEDGER_"

DEFAULT_CONFIG_PATHS = [
    Path("~/.config/consortium_ledger/config.yaml").expanduser(),
    Path("~/.config/consortium_ledger/config.toml").expanduser(),
    Path("~/.config/consortium_ledger/config.json").expanduser(),
    Path(os.getcwd()) / "consortium_ledger.yaml",
    Path(os.getcwd()) / "consortium_ledger.toml",
    Path(os.getcwd()) / "consortium_ledger.json",
]


def read_structured_file(path: Path) -> Dict[str, Any]:
    """
    Read a YAML, TOML or JSON document based on its extension.

    Shared by configuration and scenario loading.

    Raises:
        ConfigurationError: If the format is unsupported or the file is invalid
    """
    suffix = path.suffix.lower()

    try:
        with open(path, "r", encoding="utf-8") as f:
            if suffix in (".yaml", ".yml"):
                return yaml.safe_load(f) or {}
            elif suffix == ".json":
                return json.load(f)
            elif suffix == ".toml":
                if tomli is None:
                    raise ConfigurationError(
                        "tomli package not installed, cannot read TOML files"
                    )
                return tomli.loads(f.read())
            else:
                raise ConfigurationError(f"Unsupported config file format: {suffix}")
    except ConfigurationError:
        raise
    except Exception as e:
        raise ConfigurationError(f"Error reading config file {path}: {str(e)}")


class ConfigManager:
    """
    Loads and merges configuration with precedence
    CLI > environment > file > defaults.
    """

    # Maps CLI parameter names onto (section, key)
    CLI_TO_CONFIG = {
        "verbose": ("logging", "verbose"),
        "log_file": ("logging", "log_file"),
        "log_level": ("logging", "log_level"),
        "no_progress": ("ui", "progress_bars"),
        "workers": ("sweep", "workers"),
        "seeds": ("sweep", "seeds"),
    }

    def __init__(self):
        self._config = AppConfig()
        self._config_loaded = False
        self._config_path = None

    def load_configuration(
        self,
        config_file: Optional[str] = None,
        cli_args: Optional[dict] = None,
        env_prefix: str = ENV_PREFIX,
    ) -> AppConfig:
        """
        Load configuration from file, environment and CLI arguments.

        Args:
            config_file: Optional path to config file
            cli_args: Optional CLI arguments
            env_prefix: Prefix for environment variables

        Returns:
            Loaded configuration

        Raises:
            ConfigurationError: If loading or validation fails
        """
        config_data: Dict[str, Any] = {}

        file_config = self._load_from_file(config_file)
        if file_config:
            self._deep_update(config_data, file_config)

        env_config = self._load_from_env(env_prefix)
        if env_config:
            self._deep_update(config_data, env_config)

        if cli_args:
            cli_config = self._process_cli_args(cli_args)
            if cli_config:
                self._deep_update(config_data, cli_config)

        try:
            self._config = AppConfig.parse_obj(config_data) if config_data else AppConfig()
            self._config_loaded = True
        except ValidationError as e:
            raise ConfigurationError(f"Configuration validation failed: {str(e)}")

        return self._config

    def _load_from_file(self, config_path: Optional[str] = None) -> Dict[str, Any]:
        result: Dict[str, Any] = {}

        if config_path:
            path = Path(config_path).expanduser()
            if not path.exists():
                raise ConfigurationError(f"Config file not found: {path}", "config")
            result = read_structured_file(path)
            self._config_path = path
            logger.debug(f"Loaded configuration from {path}")
            return result

        for path in DEFAULT_CONFIG_PATHS:
            if path.exists():
                try:
                    result = read_structured_file(path)
                    self._config_path = path
                    logger.debug(f"Loaded configuration from {path}")
                    break
                except ConfigurationError as e:
                    logger.warning(str(e))
                    continue

        if not result:
            logger.debug("No configuration file found, using defaults")

        return result

    def _load_from_env(self, prefix: str = ENV_PREFIX) -> Dict[str, Any]:
        """
        Load configuration from environment variables.

        Variables use the prefix and double underscores for nesting, e.g.
        CONSORTIUM_LEDGER_LEDGER__SIGNATURE_INTERVAL=10. Names without a
        double underscore, such as CONSORTIUM_LEDGER_FULL_SWEEP, are skipped.
        """
        result: Dict[str, Any] = {}

        for key, value in os.environ.items():
            if not key.startswith(prefix):
                continue

            config_key = key[len(prefix) :].lower()
            parts = config_key.split("__")
            if len(parts) < 2:
                continue

            processed_value = self._convert_env_value(value)

            current = result
            for part in parts[:-1]:
                current = current.setdefault(part, {})
            current[parts[-1]] = processed_value
            logger.debug(f"Loaded {key}={processed_value} from environment")

        return result

    def _convert_env_value(self, value: str) -> Any:
        if value.lower() in ("true", "yes", "y"):
            return True
        elif value.lower() in ("false", "no", "n"):
            return False
        elif value.lower() in ("none", "null"):
            return None

        try:
            if "." in value:
                return float(value)
            return int(value)
        except ValueError:
            return value

    def _process_cli_args(self, args: Dict[str, Any]) -> Dict[str, Any]:
        result: Dict[str, Any] = {}

        for arg_name, value in args.items():
            if arg_name not in self.CLI_TO_CONFIG or value is None:
                continue
            section, key = self.CLI_TO_CONFIG[arg_name]
            if arg_name == "no_progress":
                if not value:
                    continue
                value = False
            elif value is False:
                # Unset flags must not override file or environment values
                continue
            result.setdefault(section, {})[key] = value
            logger.debug(f"Set {section}.{key}={value} from CLI argument")

        return result

    def _deep_update(self, target: Dict[str, Any], source: Dict[str, Any]) -> None:
        for key, value in source.items():
            if (
                isinstance(value, dict)
                and key in target
                and isinstance(target[key], dict)
            ):
                self._deep_update(target[key], value)
            else:
                target[key] = value

    @property
    def config(self) -> AppConfig:
        if not self._config_loaded:
            self.load_configuration()
        return self._config

    def generate_template(self, format: str = "yaml") -> str:
        """
        Generate a configuration file template holding every default.

        Args:
            format: Output format ("yaml" or "json")

        Raises:
            ValueError: If format is not supported
        """
        template = AppConfig().model_dump(mode="json")

        if format.lower() == "yaml":
            return yaml.dump(template, sort_keys=False)
        elif format.lower() == "json":
            return json.dumps(template, indent=2)
        else:
            raise ValueError(f"Unsupported format: {format}")

    def apply_click_context(self, ctx) -> AppConfig:
        """
        Update configuration from a Click context.
        """
        params = ctx.params or {}
        return self.load_configuration(
            config_file=params.get("config"), cli_args=params
        )


# Global configuration manager instance
config_manager = ConfigManager()
